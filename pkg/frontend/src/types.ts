/** Wire types for the pipeline control API. Every payload carries
 * schema_version; the console never invents state beyond these shapes. */

export interface ResearchQuestion {
  id: string;
  text: string;
  purpose: string;
}

export interface Criteria {
  include_keywords: string[];
  exclude_keywords: string[];
  require_abstract: boolean;
  language_allowlist: string[];
}

import type { QueryNode } from "./query.js";

export interface Protocol {
  topic: string;
  objective: string;
  questions: ResearchQuestion[];
  /** Structured query tree; the server accepts text edits and parses them. */
  query: QueryNode | null;
  year_range: { start: number | null; end: number | null };
  max_records: number;
  criteria: Criteria;
  replication_mode: string;
}

export interface Funnel {
  identified: number;
  deduplicated: number;
  title_included: number;
  abstract_included: number;
  final_included: number;
}

export interface RunState {
  schema_version: string;
  run_id: string;
  stage: string;
  status: string;
  stages_completed: string[];
  protocol: Protocol;
  funnel: Funnel | null;
}

export type Verdict = "include" | "exclude" | "needs_judge";

export interface Decision {
  decision_id: string;
  record_id: string;
  stage: "title" | "abstract";
  verdict: Verdict;
  actor: "rule" | "model" | "human";
  rationale: string;
  timestamp: string;
}

export interface Candidate {
  record_id: string;
  title: string;
  year: number | null;
  abstract: string | null;
  [key: string]: unknown;
}

export interface RunEvent {
  seq: number;
  ts: string;
  kind: string;
  payload: Record<string, unknown>;
}

export interface EventBatch {
  events: RunEvent[];
  cursor: number;
}

export interface ApiErrorBody {
  schema_version: string;
  error: string;
  offset?: number;
  expected?: string[];
  stage?: string;
}
