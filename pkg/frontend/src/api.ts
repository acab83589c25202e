import type {
  CandidatesResponse,
  CreateIncidentResponse,
  HealthResponse,
  IncidentDetail,
  InputMode,
  QueueEntry,
  QueueResponse,
  SubmitResponse,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thrown for any non-2xx response or transport failure; status 0 means unreachable. */
export class ApiError extends Error {
  readonly status: number;
  readonly kind: string;

  constructor(status: number, kind: string, detail: string) {
    super(detail);
    this.name = 'ApiError';
    this.status = status;
    this.kind = kind;
  }
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = '', fetchImpl?: FetchLike) {
    // strip one trailing slash so path concatenation stays predictable
    this.baseUrl = baseUrl.endsWith('/') ? baseUrl.slice(0, -1) : baseUrl;
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, 'unreachable', `service unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      let kind = 'http_error';
      let detail = `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as { error?: string; detail?: string };
        if (body && typeof body.error === 'string') {
          kind = body.error;
          detail = body.detail ?? detail;
        }
      } catch {
        // non-JSON error body; keep the generic detail
      }
      throw new ApiError(response.status, kind, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<HealthResponse> {
    return this.request('/api/health');
  }

  queue(status = 'pending'): Promise<QueueResponse> {
    return this.request(`/api/queue?status=${encodeURIComponent(status)}`);
  }

  candidates(reportId: string, mode: InputMode, k?: number): Promise<CandidatesResponse> {
    const params = new URLSearchParams({ mode });
    if (k !== undefined) {
      params.set('k', String(k));
    }
    return this.request(
      `/api/reports/${encodeURIComponent(reportId)}/candidates?${params.toString()}`
    );
  }

  submitReport(title: string, description: string): Promise<SubmitResponse> {
    return this.post('/api/reports', { title, description });
  }

  commitLink(reportId: string, incidentId: string): Promise<QueueEntry> {
    return this.post('/api/links', { report_id: reportId, incident_id: incidentId });
  }

  createIncident(
    fromReportId: string,
    title?: string,
    description?: string
  ): Promise<CreateIncidentResponse> {
    return this.post('/api/incidents', {
      from_report_id: fromReportId,
      title: title ?? null,
      description: description ?? null,
    });
  }

  incident(incidentId: string): Promise<IncidentDetail> {
    return this.request(`/api/incidents/${encodeURIComponent(incidentId)}`);
  }
}
