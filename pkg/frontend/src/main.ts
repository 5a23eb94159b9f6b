/** Browser bootstrap: wires the DOM to the client, state, and renderers. */

import { ApiClient } from './api.js';
import {
  CardFeedbackState,
  CategoryValue,
  StarAxis,
  initialCardState,
  lockAfterSubmit,
  setCategory,
  setComment,
  setStars,
  validateForSubmit,
  withError,
} from './state.js';
import { renderError, renderRecommendation, renderSummary } from './render.js';
import type { Recommendation } from './types.js';

const client = new ApiClient('');

let current: Recommendation | null = null;
let cardStates: CardFeedbackState[] = [];
let resolving = false;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function redrawCards(): void {
  const container = el<HTMLDivElement>('results');
  if (current) {
    container.innerHTML = renderRecommendation(current, cardStates);
  }
}

async function resolveCase(event: Event): Promise<void> {
  event.preventDefault();
  if (resolving) {
    return; // at most one in-flight resolve
  }
  const subject = el<HTMLInputElement>('subject').value.trim();
  if (!subject) {
    el<HTMLDivElement>('results').innerHTML =
      '<p class="inline-error">subject is required</p>';
    return;
  }
  resolving = true;
  el<HTMLDivElement>('results').innerHTML = '<p class="notice">Resolving&hellip;</p>';
  try {
    const recommendation = await client.submitCase({
      case_id: el<HTMLInputElement>('case-id').value.trim() || `console-${Date.now()}`,
      subject,
      description: el<HTMLTextAreaElement>('description').value,
      product_name: el<HTMLInputElement>('product-name').value.trim(),
      product_version: el<HTMLInputElement>('product-version').value.trim(),
    });
    if (recommendation === null) {
      el<HTMLDivElement>('results').innerHTML =
        '<p class="notice">The service is running silently; no recommendation body was returned.</p>';
      return;
    }
    current = recommendation;
    cardStates = recommendation.results.map(() => initialCardState());
    redrawCards();
  } catch (error) {
    el<HTMLDivElement>('results').innerHTML = renderError(error);
  } finally {
    resolving = false;
  }
}

async function submitFeedback(cardIndex: number): Promise<void> {
  if (!current) {
    return;
  }
  const state = cardStates[cardIndex];
  const problem = validateForSubmit(state);
  if (problem) {
    cardStates[cardIndex] = withError(state, problem);
    redrawCards();
    return;
  }
  try {
    await client.submitFeedback({
      case_id: current.case_id,
      result_index: cardIndex,
      accuracy_stars: state.accuracyStars as number,
      readability_stars: state.readabilityStars as number,
      category: state.category as string,
      comment: state.comment,
    });
    cardStates[cardIndex] = lockAfterSubmit(state);
  } catch (error) {
    el<HTMLDivElement>('results').insertAdjacentHTML('beforeend', renderError(error));
  }
  redrawCards();
}

function onResultsClick(event: Event): void {
  const target = event.target as HTMLElement;
  const starButton = target.closest<HTMLButtonElement>('button.star');
  if (starButton) {
    const card = Number(starButton.dataset.card);
    const axis = starButton.dataset.axis as StarAxis;
    cardStates[card] = setStars(cardStates[card], axis, Number(starButton.dataset.stars));
    redrawCards();
  }
}

function onResultsChange(event: Event): void {
  const target = event.target as HTMLElement;
  if (target instanceof HTMLSelectElement) {
    const card = Number(target.dataset.card);
    cardStates[card] = setCategory(cardStates[card], target.value as CategoryValue);
    redrawCards();
  } else if (target instanceof HTMLInputElement && target.classList.contains('comment')) {
    const card = Number(target.closest<HTMLFormElement>('form.feedback')?.dataset.card);
    cardStates[card] = setComment(cardStates[card], target.value);
  }
}

function onResultsSubmit(event: Event): void {
  const form = (event.target as HTMLElement).closest<HTMLFormElement>('form.feedback');
  if (form) {
    event.preventDefault();
    void submitFeedback(Number(form.dataset.card));
  }
}

async function refreshSummary(): Promise<void> {
  try {
    el<HTMLDivElement>('summary').innerHTML = renderSummary(await client.fetchSummary());
  } catch (error) {
    el<HTMLDivElement>('summary').innerHTML = renderError(error);
  }
}

export function boot(): void {
  el<HTMLFormElement>('case-form').addEventListener('submit', (e) => void resolveCase(e));
  const results = el<HTMLDivElement>('results');
  results.addEventListener('click', onResultsClick);
  results.addEventListener('change', onResultsChange);
  results.addEventListener('submit', onResultsSubmit);
  el<HTMLButtonElement>('refresh-summary').addEventListener('click', () => void refreshSummary());
  void refreshSummary();
}

if (typeof document !== 'undefined') {
  boot();
}
