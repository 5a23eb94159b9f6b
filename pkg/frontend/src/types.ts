/** Wire types mirroring the recommendation service's JSON bodies. */

export interface RecommendationResult {
  url: string;
  title: string;
  answer_text: string;
  insufficient_context: boolean;
  rerank_score: number;
  status: string;
}

export interface Recommendation {
  case_id: string;
  query_text: string;
  status: 'ok' | 'not_single_turn' | 'no_results';
  results: RecommendationResult[];
}

export interface CaseBody {
  case_id: string;
  subject: string;
  description?: string;
  product_name?: string;
  product_version?: string;
}

export interface FeedbackBody {
  case_id: string;
  result_index: number;
  accuracy_stars: number;
  readability_stars: number;
  category: string;
  comment?: string;
  timestamp?: number;
}

export interface FeedbackAck {
  persisted: boolean;
  duplicate: boolean;
}

export interface FeedbackSummary {
  total: number;
  category_counts: Record<string, number>;
  category_proportions: Record<string, number>;
  mean_accuracy_stars: number | null;
  mean_readability_stars: number | null;
}
