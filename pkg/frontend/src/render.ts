/** Pure HTML renderers; all view output flows through these. */

import type { FeedbackSummary, Recommendation, RecommendationResult } from './types.js';
import { CardFeedbackState, FEEDBACK_CATEGORIES, canSubmit } from './state.js';
import { ApiError } from './api.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;');
}

function renderStarsRow(axis: string, cardIndex: number, selected: number | null, locked: boolean): string {
  const buttons = [1, 2, 3, 4, 5]
    .map((value) => {
      const pressed = selected !== null && value <= selected;
      return `<button type="button" class="star${pressed ? ' star-on' : ''}"
        data-axis="${axis}" data-card="${cardIndex}" data-stars="${value}"
        aria-pressed="${pressed}" ${locked ? 'disabled' : ''}>${pressed ? '★' : '☆'}</button>`;
    })
    .join('');
  return `<div class="stars" data-axis-row="${axis}">${escapeHtml(axis)}: ${buttons}</div>`;
}

export function renderCategoryOptions(selected: string | null): string {
  const placeholder = `<option value="" ${selected === null ? 'selected' : ''} disabled>choose one</option>`;
  const options = FEEDBACK_CATEGORIES.map(
    ({ value, label }) =>
      `<option value="${value}" ${selected === value ? 'selected' : ''}>${escapeHtml(label)}</option>`,
  );
  return placeholder + options.join('');
}

export function renderCard(
  result: RecommendationResult,
  index: number,
  feedback: CardFeedbackState,
): string {
  const banner = result.insufficient_context
    ? '<p class="banner banner-insufficient">The assistant could not ground an accurate answer in this document.</p>'
    : '';
  const error = feedback.error ? `<p class="inline-error">${escapeHtml(feedback.error)}</p>` : '';
  const submitted = feedback.locked ? '<p class="submitted">Feedback recorded.</p>' : '';
  // The answer text and link are rendered exactly as served (escaped, never rewritten).
  return `<article class="card" data-card-index="${index}" data-url="${escapeHtml(result.url)}">
  <h3><a href="${escapeHtml(result.url)}" target="_blank" rel="noopener">${escapeHtml(result.title || result.url)}</a></h3>
  ${banner}
  <p class="answer">${escapeHtml(result.answer_text)}</p>
  <form class="feedback" data-card="${index}">
    ${renderStarsRow('accuracy', index, feedback.accuracyStars, feedback.locked)}
    ${renderStarsRow('readability', index, feedback.readabilityStars, feedback.locked)}
    <label>feedback:
      <select data-card="${index}" ${feedback.locked ? 'disabled' : ''}>${renderCategoryOptions(feedback.category)}</select>
    </label>
    <input type="text" class="comment" placeholder="optional comment" value="${escapeHtml(feedback.comment)}" ${feedback.locked ? 'disabled' : ''}>
    <button type="submit" ${canSubmit(feedback) ? '' : 'disabled'}>Submit feedback</button>
    ${error}${submitted}
  </form>
</article>`;
}

export function renderRecommendation(
  recommendation: Recommendation,
  feedback: CardFeedbackState[],
): string {
  if (recommendation.status === 'not_single_turn') {
    return '<p class="notice">This case needs more information from the customer before a solution can be suggested.</p>';
  }
  if (recommendation.status === 'no_results' || recommendation.results.length === 0) {
    return '<p class="notice">No matching documentation was found for this case.</p>';
  }
  const query = `<p class="query">Suggested search: <em>${escapeHtml(recommendation.query_text)}</em></p>`;
  const cards = recommendation.results
    .map((result, index) => renderCard(result, index, feedback[index]))
    .join('\n');
  return `${query}\n<section class="cards">${cards}</section>`;
}

export function renderSummary(summary: FeedbackSummary): string {
  const rows = FEEDBACK_CATEGORIES.map(({ value, label }) => {
    const count = summary.category_counts[value] ?? 0;
    const proportion = summary.category_proportions[value] ?? 0;
    return `<tr><td>${escapeHtml(label)}</td><td>${count}</td><td>${(proportion * 100).toFixed(1)}%</td></tr>`;
  }).join('');
  const stars = (value: number | null) => (value === null ? '-' : value.toFixed(2));
  return `<table class="summary">
  <thead><tr><th>category</th><th>count</th><th>share</th></tr></thead>
  <tbody>${rows}</tbody>
</table>
<p>mean accuracy: ${stars(summary.mean_accuracy_stars)} ★ &middot; mean readability: ${stars(summary.mean_readability_stars)} ★ &middot; ${summary.total} ratings</p>`;
}

export function renderError(error: unknown): string {
  if (error instanceof ApiError) {
    if (error.status === 404) {
      return '<p class="banner banner-error">This recommendation has expired; resolve the case again before sending feedback.</p>';
    }
    if (error.retryable) {
      return `<p class="banner banner-error">The model service is unavailable.
  <button type="button" data-action="retry">Retry</button></p>`;
    }
    const stage = error.stage ? ` (stage: ${escapeHtml(error.stage)})` : '';
    return `<p class="banner banner-error">${escapeHtml(error.detail)}${stage}</p>`;
  }
  return `<p class="banner banner-error">${escapeHtml(String(error))}</p>`;
}
