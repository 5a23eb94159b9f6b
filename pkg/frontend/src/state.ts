/** Per-card feedback form state: rating axes, category, submit gating. */

/** The four feedback options, in the deployed order. Values are the wire
 * enum; labels are what the agent reads in the dropdown. */
export const FEEDBACK_CATEGORIES = [
  { value: 'useful', label: 'useful' },
  { value: 'somewhat_useful', label: 'somewhat useful' },
  { value: 'no_useful_suggestion', label: 'no useful suggestion' },
  { value: 'need_more_client_info', label: 'need more client info' },
] as const;

export type CategoryValue = (typeof FEEDBACK_CATEGORIES)[number]['value'];

export interface CardFeedbackState {
  accuracyStars: number | null;
  readabilityStars: number | null;
  category: CategoryValue | null;
  comment: string;
  /** Set after a successful submit; controls stay disabled from then on. */
  locked: boolean;
  error: string | null;
}

export function initialCardState(): CardFeedbackState {
  return {
    accuracyStars: null,
    readabilityStars: null,
    category: null,
    comment: '',
    locked: false,
    error: null,
  };
}

export type StarAxis = 'accuracy' | 'readability';

export function setStars(
  state: CardFeedbackState,
  axis: StarAxis,
  stars: number,
): CardFeedbackState {
  if (state.locked) {
    return state;
  }
  if (!Number.isInteger(stars) || stars < 1 || stars > 5) {
    return { ...state, error: 'ratings must be between 1 and 5 stars' };
  }
  const patch = axis === 'accuracy' ? { accuracyStars: stars } : { readabilityStars: stars };
  return { ...state, ...patch, error: null };
}

export function setCategory(state: CardFeedbackState, category: CategoryValue): CardFeedbackState {
  if (state.locked) {
    return state;
  }
  return { ...state, category, error: null };
}

export function setComment(state: CardFeedbackState, comment: string): CardFeedbackState {
  return state.locked ? state : { ...state, comment };
}

/** Submit stays disabled until both star axes are chosen. */
export function canSubmit(state: CardFeedbackState): boolean {
  return !state.locked && state.accuracyStars !== null && state.readabilityStars !== null;
}

/** Pre-flight validation; returns the inline error (no network call) or null. */
export function validateForSubmit(state: CardFeedbackState): string | null {
  if (state.locked) {
    return 'feedback already submitted';
  }
  if (state.accuracyStars === null || state.readabilityStars === null) {
    return 'choose both star ratings first';
  }
  if (state.category === null) {
    return 'select a feedback category';
  }
  return null;
}

export function lockAfterSubmit(state: CardFeedbackState): CardFeedbackState {
  return { ...state, locked: true, error: null };
}

export function withError(state: CardFeedbackState, error: string): CardFeedbackState {
  return { ...state, error };
}
