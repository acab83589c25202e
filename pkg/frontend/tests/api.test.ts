import { describe, expect, it } from 'vitest';
import { ApiClient, ApiError, type FetchLike } from '../src/api.js';

interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
  contentType: string | null;
}

function recordingFetch(respond: (url: string) => Response) {
  const calls: RecordedCall[] = [];
  const fetchImpl: FetchLike = async (url, init) => {
    const headers = new Headers(init?.headers);
    calls.push({
      url,
      method: init?.method ?? 'GET',
      body: init?.body ? JSON.parse(String(init.body)) : null,
      contentType: headers.get('Content-Type'),
    });
    return respond(url);
  };
  return { calls, fetchImpl };
}

const ok = (payload: unknown) => new Response(JSON.stringify(payload), { status: 200 });

describe('ApiClient request shapes', () => {
  it('queries the queue with a status filter', async () => {
    const { calls, fetchImpl } = recordingFetch(() => ok({ entries: [] }));
    const api = new ApiClient('http://svc', fetchImpl);
    await api.queue();
    await api.queue('all');
    expect(calls.map((c) => c.url)).toEqual([
      'http://svc/api/queue?status=pending',
      'http://svc/api/queue?status=all',
    ]);
    expect(calls[0].method).toBe('GET');
  });

  it('builds the candidates path from report id, mode, and k', async () => {
    const { calls, fetchImpl } = recordingFetch(() =>
      ok({ report_id: 'r 1', mode: 'title', backend: 'bm25', report: { title: '', description: '' }, candidates: [] })
    );
    const api = new ApiClient('', fetchImpl);
    await api.candidates('r 1', 'title', 5);
    expect(calls[0].url).toBe('/api/reports/r%201/candidates?mode=title&k=5');
    await api.candidates('r 1', 'title_description');
    expect(calls[1].url).toBe('/api/reports/r%201/candidates?mode=title_description');
  });

  it('posts link decisions with the service field names', async () => {
    const { calls, fetchImpl } = recordingFetch(() => ok({}));
    const api = new ApiClient('', fetchImpl);
    await api.commitLink('r1', 'i9');
    expect(calls[0]).toMatchObject({
      url: '/api/links',
      method: 'POST',
      body: { report_id: 'r1', incident_id: 'i9' },
      contentType: 'application/json',
    });
  });

  it('posts create-incident bodies with nullable overrides', async () => {
    const { calls, fetchImpl } = recordingFetch(() => ok({ incident: {}, entry: {} }));
    const api = new ApiClient('', fetchImpl);
    await api.createIncident('r1');
    expect(calls[0].body).toEqual({ from_report_id: 'r1', title: null, description: null });
    await api.createIncident('r1', 'Better title', 'text');
    expect(calls[1].body).toEqual({
      from_report_id: 'r1',
      title: 'Better title',
      description: 'text',
    });
  });

  it('strips one trailing slash from the base url', async () => {
    const { calls, fetchImpl } = recordingFetch(() => ok({ status: 'ok' }));
    const api = new ApiClient('http://svc:8080/', fetchImpl);
    await api.health();
    expect(calls[0].url).toBe('http://svc:8080/api/health');
  });
});

describe('ApiClient error mapping', () => {
  it('maps service error bodies onto ApiError', async () => {
    const fetchImpl: FetchLike = async () =>
      new Response(JSON.stringify({ error: 'conflict', detail: 'already decided' }), {
        status: 409,
      });
    const api = new ApiClient('', fetchImpl);
    const err = await api.commitLink('r1', 'i1').catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err).toMatchObject({ status: 409, kind: 'conflict', message: 'already decided' });
  });

  it('keeps a generic detail for non-json error bodies', async () => {
    const fetchImpl: FetchLike = async () => new Response('boom', { status: 500 });
    const api = new ApiClient('', fetchImpl);
    const err = await api.health().catch((e: unknown) => e);
    expect(err).toMatchObject({ status: 500, kind: 'http_error', message: 'HTTP 500' });
  });

  it('wraps transport failures as unreachable with status 0', async () => {
    const fetchImpl: FetchLike = async () => {
      throw new TypeError('fetch failed');
    };
    const api = new ApiClient('', fetchImpl);
    const err = await api.queue().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err).toMatchObject({ status: 0, kind: 'unreachable' });
  });
});
