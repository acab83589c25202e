import { describe, expect, it, vi } from 'vitest';
import type { Candidate, QueueEntry } from '../src/types.js';
import {
  renderCandidateList,
  renderCreateForm,
  renderErrorBanner,
  renderQueue,
} from '../src/views.js';

function entry(over: Partial<QueueEntry> = {}): QueueEntry {
  return {
    report_id: 'r1',
    status: 'pending',
    title: 'Robot arm mishap',
    submitted_at: '2024-03-01T10:00:00+00:00',
    description_length: 140,
    decided_at: null,
    decided_incident_id: null,
    ...over,
  };
}

describe('renderQueue', () => {
  it('lists entries in the exact order given, with date and length badge', () => {
    const screen = renderQueue(
      [entry(), entry({ report_id: 'r2', title: 'Chatbot leak', description_length: 20 })],
      { onReview: () => undefined }
    );
    const items = [...screen.querySelectorAll('li')];
    expect(items.map((li) => li.dataset['reportId'])).toEqual(['r1', 'r2']);
    expect(screen.querySelector('.queue-date')?.textContent).toBe('2024-03-01');
    const badges = [...screen.querySelectorAll('.badge')];
    expect(badges.map((b) => b.textContent)).toEqual(['140 chars', '20 chars']);
    expect(badges[1].classList.contains('badge-short')).toBe(true);
    expect(badges[0].classList.contains('badge-short')).toBe(false);
  });

  it('renders the empty state when nothing is pending', () => {
    const screen = renderQueue([], { onReview: () => undefined });
    expect(screen.querySelector('[data-role="queue-empty"]')).not.toBeNull();
    expect(screen.querySelector('li')).toBeNull();
  });

  it('review click hands the report id to the handler', () => {
    const onReview = vi.fn();
    const screen = renderQueue([entry({ report_id: 'r7' })], { onReview });
    (screen.querySelector('a.queue-title') as HTMLAnchorElement).click();
    expect(onReview).toHaveBeenCalledWith('r7');
  });
});

describe('renderCandidateList', () => {
  it('is a faithful view: same order, 3-decimal scores, rank positions', () => {
    // deliberately not score-sorted; the view must not reorder
    const candidates: Candidate[] = [
      { incident_id: 'i2', score: 0.25, title: 'Warehouse arm', snippet: 'arm pinned' },
      { incident_id: 'i9', score: 0.9251, title: 'Chatbot', snippet: 'records shown' },
      { incident_id: 'i4', score: 0, title: 'Shuttle', snippet: 'curb strike' },
    ];
    const list = renderCandidateList(candidates);
    const items = [...list.querySelectorAll('li')];
    expect(items.map((li) => li.dataset['incidentId'])).toEqual(['i2', 'i9', 'i4']);
    expect(items.map((li) => li.dataset['rank'])).toEqual(['1', '2', '3']);
    expect(items.map((li) => li.querySelector('[data-role="score"]')?.textContent)).toEqual([
      '0.250',
      '0.925',
      '0.000',
    ]);
    expect(items.map((li) => li.querySelector('.candidate-snippet')?.textContent)).toEqual([
      'arm pinned',
      'records shown',
      'curb strike',
    ]);
  });

  it('sizes score bars relative to the first candidate', () => {
    const list = renderCandidateList([
      { incident_id: 'a', score: 0.8, title: '', snippet: '' },
      { incident_id: 'b', score: 0.2, title: '', snippet: '' },
    ]);
    const widths = [...list.querySelectorAll('.score-bar-fill')].map(
      (fill) => (fill as HTMLElement).style.width
    );
    expect(widths).toEqual(['100%', '25%']);
  });

  it('collapses bars instead of dividing by non-positive scores', () => {
    const list = renderCandidateList([
      { incident_id: 'a', score: -1, title: '', snippet: '' },
      { incident_id: 'b', score: -1, title: '', snippet: '' },
    ]);
    const widths = [...list.querySelectorAll('.score-bar-fill')].map(
      (fill) => (fill as HTMLElement).style.width
    );
    expect(widths).toEqual(['0%', '0%']);
  });
});

describe('renderErrorBanner', () => {
  it('shows the message and wires the retry button', () => {
    const onRetry = vi.fn();
    const banner = renderErrorBanner('Service unreachable.', onRetry);
    expect(banner.textContent).toContain('Service unreachable.');
    (banner.querySelector('button') as HTMLButtonElement).click();
    expect(onRetry).toHaveBeenCalledTimes(1);
  });
});

describe('renderCreateForm', () => {
  const report = { title: 'Drone swarm', description: 'clipped a crane' };

  function submit(form: HTMLFormElement): void {
    form.dispatchEvent(new Event('submit', { bubbles: true, cancelable: true }));
  }

  it('prefills title and description from the report', () => {
    const screen = renderCreateForm(report, { onSubmit: () => undefined, onCancel: () => undefined });
    expect((screen.querySelector('input[name="title"]') as HTMLInputElement).value).toBe(
      'Drone swarm'
    );
    expect(
      (screen.querySelector('textarea[name="description"]') as HTMLTextAreaElement).value
    ).toBe('clipped a crane');
  });

  it('blocks empty titles inline and never calls the handler', () => {
    const onSubmit = vi.fn();
    const screen = renderCreateForm(report, { onSubmit, onCancel: () => undefined });
    const title = screen.querySelector('input[name="title"]') as HTMLInputElement;
    title.value = '   ';
    submit(screen.querySelector('form') as HTMLFormElement);
    const error = screen.querySelector('[data-role="inline-error"]') as HTMLElement;
    expect(error.hidden).toBe(false);
    expect(error.textContent).toContain('non-empty');
    expect(onSubmit).not.toHaveBeenCalled();
  });

  it('submits the trimmed title and clears the error', () => {
    const onSubmit = vi.fn();
    const screen = renderCreateForm(report, { onSubmit, onCancel: () => undefined });
    const form = screen.querySelector('form') as HTMLFormElement;
    const title = screen.querySelector('input[name="title"]') as HTMLInputElement;
    title.value = '  ';
    submit(form);
    title.value = '  Drone swarm crane strike ';
    submit(form);
    expect(onSubmit).toHaveBeenCalledWith('Drone swarm crane strike', 'clipped a crane');
    expect((screen.querySelector('[data-role="inline-error"]') as HTMLElement).hidden).toBe(true);
  });
});
