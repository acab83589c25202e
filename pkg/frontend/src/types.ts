// Wire types, mirroring the service JSON field for field.

export type InputMode = 'title' | 'title_description';

export type QueueStatus = 'pending' | 'linked' | 'new_incident_created';

export interface QueueEntry {
  report_id: string;
  status: QueueStatus;
  title: string;
  submitted_at: string;
  description_length: number;
  decided_at: string | null;
  decided_incident_id: string | null;
}

export interface Candidate {
  incident_id: string;
  score: number;
  title: string;
  snippet: string;
}

export interface HealthResponse {
  status: string;
  backend: string;
  incidents: number;
  pending: number;
}

export interface QueueResponse {
  entries: QueueEntry[];
}

export interface SubmitResponse {
  report_id: string;
  backend: string;
  candidates: Candidate[];
}

export interface CandidatesResponse {
  report_id: string;
  mode: string;
  backend: string;
  report: { title: string; description: string };
  candidates: Candidate[];
}

export interface IncidentDetail {
  incident_id: string;
  title: string;
  description: string;
  occurred_at: string | null;
  created_from_report_id: string | null;
}

export interface CreateIncidentResponse {
  incident: IncidentDetail;
  entry: QueueEntry;
}

export interface ApiErrorBody {
  error: 'not_found' | 'conflict' | 'validation_error';
  detail: string;
}
