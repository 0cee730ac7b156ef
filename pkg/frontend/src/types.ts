export type TaskKind = 'continuation' | 'infill' | 'elaborate' | 'rewrite' | 'custom';

export type SpanKind = 'human' | 'model';

export interface ExportSpan {
  start: number;
  end: number;
  kind: SpanKind;
  request_id?: string;
}

export interface AnnotatedExport {
  text: string;
  spans: ExportSpan[];
}

export interface SessionSnapshot {
  session_id: string;
  version: number;
  text: string;
  spans: ExportSpan[];
  backend: string;
  created_at: string;
  updated_at: string;
}

export interface CandidateAnnotations {
  meta_text?: boolean;
  matched_rules?: string[];
  trimmed?: boolean;
  word_count_delta?: number;
}

export interface CandidateView {
  text: string;
  backend_id: string;
  raw_text: string;
  annotations: CandidateAnnotations;
}

export interface SuggestResponse {
  request_id: string;
  candidates: CandidateView[];
}

export interface SelectionRange {
  start: number;
  end: number;
}

export interface SuggestOptions {
  n_words?: number;
  tone?: string;
  instruction?: string;
}
