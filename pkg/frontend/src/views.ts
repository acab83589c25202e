// Pure renderers: data in, detached DOM out. No fetching, and no
// reordering; every list is shown exactly as the service returned it.

import { formatDate, formatScore, lengthBadge, lengthBadgeClass, scoreBarPercent } from './format.js';
import type { Candidate, CandidatesResponse, InputMode, QueueEntry } from './types.js';

export interface QueueHandlers {
  onReview: (reportId: string) => void;
}

export interface ReviewHandlers {
  onToggleMode: (mode: InputMode) => void;
  onLink: (incidentId: string) => void;
  onCreateNew: () => void;
  onBack: () => void;
}

export interface CreateFormHandlers {
  onSubmit: (title: string, description: string) => void;
  onCancel: () => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function renderNotice(message: string): HTMLElement {
  const banner = el('div', 'notice', message);
  banner.dataset['role'] = 'notice';
  return banner;
}

export function renderErrorBanner(message: string, onRetry: () => void): HTMLElement {
  const banner = el('div', 'error-banner');
  banner.dataset['role'] = 'error-banner';
  banner.appendChild(el('span', undefined, message));
  const retry = el('button', 'retry', 'Retry');
  retry.addEventListener('click', onRetry);
  banner.appendChild(retry);
  return banner;
}

export function renderQueue(entries: QueueEntry[], handlers: QueueHandlers): HTMLElement {
  const screen = el('section', 'queue-screen');
  screen.dataset['role'] = 'queue';
  screen.appendChild(el('h2', undefined, 'Pending reports'));

  if (entries.length === 0) {
    const empty = el('p', 'empty-state', 'Nothing waiting for review.');
    empty.dataset['role'] = 'queue-empty';
    screen.appendChild(empty);
    return screen;
  }

  const list = el('ul', 'queue-list');
  for (const entry of entries) {
    const item = el('li', 'queue-item');
    item.dataset['reportId'] = entry.report_id;

    const title = el('a', 'queue-title', entry.title);
    title.href = `#/report/${encodeURIComponent(entry.report_id)}`;
    title.addEventListener('click', (event) => {
      event.preventDefault();
      handlers.onReview(entry.report_id);
    });
    item.appendChild(title);

    item.appendChild(el('span', 'queue-date', formatDate(entry.submitted_at)));
    item.appendChild(
      el('span', lengthBadgeClass(entry.description_length), lengthBadge(entry.description_length))
    );
    list.appendChild(item);
  }
  screen.appendChild(list);
  return screen;
}

export function renderCandidateList(candidates: Candidate[]): HTMLElement {
  const list = el('ol', 'candidate-list');
  list.dataset['role'] = 'candidates';
  const best = candidates.length > 0 ? candidates[0].score : 0;

  candidates.forEach((candidate, position) => {
    const item = el('li', 'candidate');
    item.dataset['incidentId'] = candidate.incident_id;
    item.dataset['rank'] = String(position + 1);

    const header = el('div', 'candidate-header');
    header.appendChild(el('span', 'candidate-rank', `#${position + 1}`));
    header.appendChild(el('span', 'candidate-title', candidate.title));
    const score = el('span', 'candidate-score', formatScore(candidate.score));
    score.dataset['role'] = 'score';
    header.appendChild(score);
    item.appendChild(header);

    const bar = el('div', 'score-bar');
    const fill = el('div', 'score-bar-fill');
    fill.style.width = `${scoreBarPercent(candidate.score, best)}%`;
    bar.appendChild(fill);
    item.appendChild(bar);

    item.appendChild(el('p', 'candidate-snippet', candidate.snippet));
    list.appendChild(item);
  });
  return list;
}

export function renderReview(
  detail: CandidatesResponse,
  mode: InputMode,
  handlers: ReviewHandlers
): HTMLElement {
  const screen = el('section', 'review-screen');
  screen.dataset['role'] = 'review';
  screen.dataset['reportId'] = detail.report_id;

  const back = el('button', 'back', '← Queue');
  back.addEventListener('click', handlers.onBack);
  screen.appendChild(back);

  screen.appendChild(el('h2', undefined, detail.report.title));
  if (detail.report.description) {
    screen.appendChild(el('p', 'report-description', detail.report.description));
  }
  screen.appendChild(el('p', 'backend-label', `ranked by ${detail.backend}`));

  const toggle = el('div', 'mode-toggle');
  toggle.dataset['role'] = 'mode-toggle';
  const modes: Array<[InputMode, string]> = [
    ['title_description', 'Title + description'],
    ['title', 'Title only'],
  ];
  for (const [value, label] of modes) {
    const button = el('button', value === mode ? 'mode active' : 'mode', label);
    button.dataset['mode'] = value;
    button.disabled = value === mode;
    button.addEventListener('click', () => handlers.onToggleMode(value));
    toggle.appendChild(button);
  }
  screen.appendChild(toggle);

  const candidates = renderCandidateList(detail.candidates);
  candidates.querySelectorAll('li').forEach((item) => {
    const incidentId = item.dataset['incidentId'];
    if (!incidentId) {
      return;
    }
    const link = el('button', 'link-action', 'Link');
    link.dataset['role'] = 'link';
    link.addEventListener('click', () => handlers.onLink(incidentId));
    item.appendChild(link);
  });
  screen.appendChild(candidates);

  const create = el('button', 'create-action', 'New incident…');
  create.dataset['role'] = 'create-new';
  create.addEventListener('click', handlers.onCreateNew);
  screen.appendChild(create);
  return screen;
}

export function renderCreateForm(
  report: { title: string; description: string },
  handlers: CreateFormHandlers
): HTMLElement {
  const screen = el('section', 'create-screen');
  screen.dataset['role'] = 'create-form';
  screen.appendChild(el('h2', undefined, 'Create a new incident'));

  const form = el('form');
  const titleInput = el('input');
  titleInput.name = 'title';
  titleInput.value = report.title;
  const descriptionInput = el('textarea');
  descriptionInput.name = 'description';
  descriptionInput.value = report.description;

  const error = el('p', 'inline-error');
  error.dataset['role'] = 'inline-error';
  error.hidden = true;

  const submit = el('button', 'submit', 'Create incident');
  submit.type = 'submit';
  const cancel = el('button', 'cancel', 'Cancel');
  cancel.type = 'button';
  cancel.addEventListener('click', handlers.onCancel);

  form.append(titleInput, descriptionInput, error, submit, cancel);
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const title = titleInput.value.trim();
    if (!title) {
      error.textContent = 'Title must be non-empty.';
      error.hidden = false;
      return;
    }
    error.hidden = true;
    handlers.onSubmit(title, descriptionInput.value);
  });
  screen.appendChild(form);
  return screen;
}
