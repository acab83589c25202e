// Screen controller. Owns which view is on screen and the polling
// timer; everything else is fetched fresh from the service, so a
// refresh loses nothing but navigation.

import { ApiClient, ApiError } from './api.js';
import type { InputMode, QueueEntry } from './types.js';
import {
  renderCreateForm,
  renderErrorBanner,
  renderNotice,
  renderQueue,
  renderReview,
} from './views.js';

export interface AppOptions {
  /** Queue refresh period; 0 disables polling. */
  pollIntervalMs?: number;
}

type View =
  | { kind: 'queue' }
  | { kind: 'review'; reportId: string; mode: InputMode }
  | { kind: 'create'; reportId: string };

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    if (err.kind === 'unreachable') {
      return 'Service unreachable.';
    }
    if (err.kind === 'conflict') {
      return `Already decided: ${err.message}`;
    }
    return err.message;
  }
  return String(err);
}

export class TriageApp {
  private readonly root: HTMLElement;
  private readonly api: ApiClient;
  private readonly pollIntervalMs: number;
  private view: View = { kind: 'queue' };
  private notice: string | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(root: HTMLElement, api: ApiClient, options: AppOptions = {}) {
    this.root = root;
    this.api = api;
    this.pollIntervalMs = options.pollIntervalMs ?? 10_000;
  }

  async start(): Promise<void> {
    await this.showQueue();
    if (this.pollIntervalMs > 0) {
      this.timer = setInterval(() => {
        if (this.view.kind === 'queue') {
          void this.showQueue();
        }
      }, this.pollIntervalMs);
    }
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  private swap(...nodes: HTMLElement[]): void {
    this.root.replaceChildren(...nodes);
  }

  /** One-shot notice shown on the next queue render. */
  private consumeNotice(): HTMLElement[] {
    if (this.notice === null) {
      return [];
    }
    const node = renderNotice(this.notice);
    this.notice = null;
    return [node];
  }

  async showQueue(): Promise<void> {
    this.view = { kind: 'queue' };
    let entries: QueueEntry[];
    try {
      entries = (await this.api.queue('pending')).entries;
    } catch (err) {
      this.swap(renderErrorBanner(describeError(err), () => void this.showQueue()));
      return;
    }
    this.swap(
      ...this.consumeNotice(),
      renderQueue(entries, { onReview: (reportId) => void this.showReview(reportId) })
    );
  }

  async showReview(reportId: string, mode: InputMode = 'title_description'): Promise<void> {
    this.view = { kind: 'review', reportId, mode };
    try {
      const detail = await this.api.candidates(reportId, mode);
      this.swap(
        renderReview(detail, mode, {
          onToggleMode: (next) => void this.showReview(reportId, next),
          onLink: (incidentId) => void this.commitLink(reportId, incidentId),
          onCreateNew: () => this.showCreate(reportId, detail.report),
          onBack: () => void this.showQueue(),
        })
      );
    } catch (err) {
      // unknown or vanished report: back to the queue with a notice
      this.notice = describeError(err);
      await this.showQueue();
    }
  }

  private showCreate(reportId: string, report: { title: string; description: string }): void {
    this.view = { kind: 'create', reportId };
    this.swap(
      renderCreateForm(report, {
        onSubmit: (title, description) =>
          void this.createIncident(reportId, title, description),
        onCancel: () => void this.showReview(reportId),
      })
    );
  }

  private async commitLink(reportId: string, incidentId: string): Promise<void> {
    try {
      await this.api.commitLink(reportId, incidentId);
      this.notice = `Linked to incident ${incidentId}.`;
    } catch (err) {
      // a 409 means someone decided it first; the queue refresh shows that
      this.notice = describeError(err);
    }
    await this.showQueue();
  }

  private async createIncident(
    reportId: string,
    title: string,
    description: string
  ): Promise<void> {
    try {
      const created = await this.api.createIncident(reportId, title, description);
      this.notice = `Created incident ${created.incident.incident_id}.`;
    } catch (err) {
      this.notice = describeError(err);
    }
    await this.showQueue();
  }
}
