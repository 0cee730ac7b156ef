import type { ExportSpan } from './types.js';

export interface HighlightRange {
  start: number;
  end: number;
  requestId: string;
}

/** The ranges to paint as machine-written text: exactly the model spans. */
export function modelHighlights(spans: ExportSpan[]): HighlightRange[] {
  return spans
    .filter((s) => s.kind === 'model')
    .map((s) => ({ start: s.start, end: s.end, requestId: s.request_id ?? '' }));
}

export interface TextSegment {
  text: string;
  kind: 'human' | 'model';
  requestId?: string;
}

/** Split the document text into contiguous render segments following the spans. */
export function segments(text: string, spans: ExportSpan[]): TextSegment[] {
  return spans.map((s) => ({
    text: text.slice(s.start, s.end),
    kind: s.kind,
    ...(s.request_id !== undefined ? { requestId: s.request_id } : {}),
  }));
}
