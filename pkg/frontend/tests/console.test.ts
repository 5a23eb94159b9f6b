import { ChildProcess, execFileSync, spawn } from 'node:child_process';
import { mkdtempSync, readFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient, ApiError } from '../src/api.js';
import {
  FEEDBACK_CATEGORIES,
  canSubmit,
  initialCardState,
  lockAfterSubmit,
  setCategory,
  setStars,
  validateForSubmit,
} from '../src/state.js';
import {
  renderCard,
  renderCategoryOptions,
  renderError,
  renderRecommendation,
  renderSummary,
} from '../src/render.js';
import type { Recommendation, RecommendationResult } from '../src/types.js';

// ---------------------------------------------------------------------------
// unit: feedback form state machine

describe('feedback form state', () => {
  it('blocks submit until both star axes are set', () => {
    let state = initialCardState();
    expect(canSubmit(state)).toBe(false);
    state = setStars(state, 'accuracy', 4);
    expect(canSubmit(state)).toBe(false);
    state = setStars(state, 'readability', 5);
    expect(canSubmit(state)).toBe(true);
  });

  it('requires a category at submit time without a network call', () => {
    let state = initialCardState();
    state = setStars(state, 'accuracy', 4);
    state = setStars(state, 'readability', 5);
    expect(validateForSubmit(state)).toMatch(/category/);
    state = setCategory(state, 'useful');
    expect(validateForSubmit(state)).toBeNull();
  });

  it('rejects out-of-range stars with an inline error', () => {
    const state = setStars(initialCardState(), 'accuracy', 6);
    expect(state.accuracyStars).toBeNull();
    expect(state.error).toMatch(/between 1 and 5/);
  });

  it('locks controls after a successful submit; duplicate submit is a no-op', () => {
    let state = initialCardState();
    state = setStars(state, 'accuracy', 4);
    state = setStars(state, 'readability', 5);
    state = setCategory(state, 'useful');
    state = lockAfterSubmit(state);
    expect(canSubmit(state)).toBe(false);
    expect(validateForSubmit(state)).toMatch(/already submitted/);
    expect(setStars(state, 'accuracy', 1)).toBe(state); // locked: no edits
  });
});

// ---------------------------------------------------------------------------
// unit: renderers

function sampleResult(overrides: Partial<RecommendationResult> = {}): RecommendationResult {
  return {
    url: 'https://docs.example.com/fix',
    title: 'Fixing the thing',
    answer_text: 'Run the <repair> tool & restart.',
    insufficient_context: false,
    rerank_score: 0.7,
    status: 'ok',
    ...overrides,
  };
}

describe('renderers', () => {
  it('dropdown holds exactly the four options, in order', () => {
    const html = renderCategoryOptions(null);
    const values = [...html.matchAll(/<option value="([^"]+)"/g)].map((m) => m[1]);
    expect(values).toEqual([
      'useful',
      'somewhat_useful',
      'no_useful_suggestion',
      'need_more_client_info',
    ]);
    const labels = [...html.matchAll(/>([^<]+)<\/option>/g)].map((m) => m[1]);
    expect(labels).toEqual([
      'useful',
      'somewhat useful',
      'no useful suggestion',
      'need more client info',
    ]);
  });

  it('renders the answer text escaped but unmodified, with the exact link', () => {
    const html = renderCard(sampleResult(), 0, initialCardState());
    expect(html).toContain('href="https://docs.example.com/fix"');
    expect(html).toContain('Run the &lt;repair&gt; tool &amp; restart.');
  });

  it('shows the insufficiency banner only when flagged', () => {
    const flagged = renderCard(sampleResult({ insufficient_context: true }), 0, initialCardState());
    const clean = renderCard(sampleResult(), 0, initialCardState());
    expect(flagged).toContain('banner-insufficient');
    expect(clean).not.toContain('banner-insufficient');
  });

  it('renders a not-single-turn notice instead of cards', () => {
    const recommendation: Recommendation = {
      case_id: 'c',
      query_text: '',
      status: 'not_single_turn',
      results: [],
    };
    expect(renderRecommendation(recommendation, [])).toContain('more information');
  });

  it('maps 404 to a re-resolve prompt and 503 to a retry affordance', () => {
    expect(renderError(new ApiError(404, 'gone'))).toContain('resolve the case again');
    expect(renderError(new ApiError(503, 'down'))).toContain('data-action="retry"');
  });

  it('summary table covers all four categories', () => {
    const html = renderSummary({
      total: 2,
      category_counts: { useful: 2 },
      category_proportions: { useful: 1.0 },
      mean_accuracy_stars: 4.5,
      mean_readability_stars: 5,
    });
    for (const { label } of FEEDBACK_CATEGORIES) {
      expect(html).toContain(label);
    }
    expect(html).toContain('2 ratings');
  });
});

// ---------------------------------------------------------------------------
// integration: live mock-mode service

const repoRoot = fileURLToPath(new URL('../..', import.meta.url));
const python = process.env.PYTHON ?? 'python3';
const port = 21000 + Math.floor(Math.random() * 8000);
const base = `http://127.0.0.1:${port}`;
let service: ChildProcess | null = null;
let feedbackPath = '';

async function waitForHealth(): Promise<void> {
  for (let attempt = 0; attempt < 120; attempt++) {
    try {
      const response = await fetch(`${base}/health`);
      if (response.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error('service did not become healthy');
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), 'console-it-'));
  const index = join(dir, 'index.jsonl');
  feedbackPath = join(dir, 'feedback.jsonl');
  const env = { ...process.env, MOCK_MODELS: '1' };
  execFileSync(
    python,
    ['-m', 'casesolve', 'ingest', '--corpus', join(repoRoot, 'sample_data', 'corpus.jsonl'), '--out', index],
    { env },
  );
  service = spawn(
    python,
    ['-m', 'casesolve', 'serve', '--index', index, '--feedback', feedbackPath, '--port', String(port)],
    { env, stdio: 'ignore' },
  );
  await waitForHealth();
});

afterAll(() => {
  service?.kill();
});

describe('console against a running mock-mode service', () => {
  const client = new ApiClient(base);

  it('renders at most three cards in service re-rank order', async () => {
    const recommendation = await client.submitCase({
      case_id: 'console-it-1',
      subject: 'Login failure reported',
      description: 'login failure authentication password credential cache problems',
      product_name: 'Alpha Server',
    });
    expect(recommendation).not.toBeNull();
    const rec = recommendation as Recommendation;
    expect(rec.status).toBe('ok');
    expect(rec.results.length).toBeLessThanOrEqual(3);
    const scores = rec.results.map((r) => r.rerank_score);
    expect([...scores].sort((a, b) => b - a)).toEqual(scores);

    const html = renderRecommendation(rec, rec.results.map(() => initialCardState()));
    const renderedUrls = [...html.matchAll(/data-url="([^"]+)"/g)].map((m) => m[1]);
    expect(renderedUrls).toEqual(rec.results.map((r) => r.url));
  });

  it('a 4-star/5-star "useful" submission lands in the feedback store as one valid record', async () => {
    const caseId = 'console-it-feedback';
    await client.submitCase({
      case_id: caseId,
      subject: 'Login failure reported',
      description: 'login failure authentication password credential cache problems',
    });

    let state = initialCardState();
    state = setStars(state, 'accuracy', 4);
    state = setStars(state, 'readability', 5);
    state = setCategory(state, 'useful');
    expect(validateForSubmit(state)).toBeNull();

    const ack = await client.submitFeedback({
      case_id: caseId,
      result_index: 0,
      accuracy_stars: state.accuracyStars as number,
      readability_stars: state.readabilityStars as number,
      category: state.category as string,
      timestamp: 1_700_000_123,
    });
    expect(ack.persisted).toBe(true);
    expect(ack.duplicate).toBe(false);

    const records = readFileSync(feedbackPath, 'utf-8')
      .split('\n')
      .filter((line) => line.trim())
      .map((line) => JSON.parse(line) as Record<string, unknown>)
      .filter((record) => record.case_id === caseId);
    expect(records).toHaveLength(1);
    expect(records[0]).toMatchObject({
      case_id: caseId,
      result_index: 0,
      accuracy_stars: 4,
      readability_stars: 5,
      category: 'useful',
    });

    // duplicate submit is acknowledged as a no-op
    const again = await client.submitFeedback({
      case_id: caseId,
      result_index: 0,
      accuracy_stars: 4,
      readability_stars: 5,
      category: 'useful',
      timestamp: 1_700_000_123,
    });
    expect(again.duplicate).toBe(true);
  });

  it('summary endpoint renders into the four-category table', async () => {
    const summary = await client.fetchSummary();
    expect(summary.total).toBeGreaterThanOrEqual(1);
    const html = renderSummary(summary);
    expect(html).toContain('somewhat useful');
  });

  it('surfaces a 404 feedback error as a re-resolve banner', async () => {
    try {
      await client.submitFeedback({
        case_id: 'never-served',
        result_index: 0,
        accuracy_stars: 4,
        readability_stars: 5,
        category: 'useful',
      });
      expect.unreachable('expected a 404');
    } catch (error) {
      expect(error).toBeInstanceOf(ApiError);
      expect(renderError(error)).toContain('resolve the case again');
    }
  });
});
