// Small display helpers shared by the views.

/** Scores render to exactly 3 decimals, whatever the backend's scale. */
export function formatScore(score: number): string {
  if (!Number.isFinite(score)) {
    return 'n/a';
  }
  return score.toFixed(3);
}

/**
 * Width of the qualitative score bar, in percent of the best candidate.
 *
 * Raw BM25 and cosine scales differ, so bars are relative within one
 * list only. Non-positive bests (all-zero BM25, sentinel -1 cosine)
 * collapse every bar to zero rather than dividing by junk.
 */
export function scoreBarPercent(score: number, best: number): number {
  if (!Number.isFinite(score) || !Number.isFinite(best) || best <= 0 || score <= 0) {
    return 0;
  }
  return Math.max(0, Math.min(100, Math.round((score / best) * 100)));
}

export function formatDate(iso: string | null): string {
  if (!iso) {
    return 'undated';
  }
  return iso.slice(0, 10);
}

/** Badge text for the description-length column. */
export function lengthBadge(chars: number): string {
  if (chars === 0) {
    return 'no description';
  }
  return `${chars} chars`;
}

/** Badge modifier class; the service treats under 80 chars as short. */
export function lengthBadgeClass(chars: number): string {
  return chars < 80 ? 'badge badge-short' : 'badge';
}
