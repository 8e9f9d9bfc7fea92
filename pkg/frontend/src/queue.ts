/** Pure derivations over the decision history. The console never mutates
 * decisions client-side: the board and queues are recomputed from the latest
 * server payload after every acknowledged mutation. */

import type { Decision } from "./types.js";

/** Latest decision per record within a stage, with human verdicts supreme:
 * once a human has ruled, later machine decisions do not displace it. */
export function effectiveDecisions(
  decisions: Decision[],
  stage: "title" | "abstract",
): Map<string, Decision> {
  const byRecord = new Map<string, Decision>();
  for (const d of decisions) {
    if (d.stage !== stage) continue;
    const current = byRecord.get(d.record_id);
    if (current === undefined || d.actor === "human" || current.actor !== "human") {
      byRecord.set(d.record_id, d);
    }
  }
  return byRecord;
}

export function includedIds(
  decisions: Decision[],
  stage: "title" | "abstract",
): string[] {
  const out: string[] = [];
  for (const [recordId, d] of effectiveDecisions(decisions, stage)) {
    if (d.verdict === "include") out.push(recordId);
  }
  return out;
}

/** Records queued for abstract-stage adjudication: everything effectively
 * included at the title stage. Overriding a title include to exclude removes
 * the record from this queue on the next refresh. */
export function abstractQueue(decisions: Decision[]): string[] {
  return includedIds(decisions, "title");
}

/** Decisions awaiting human attention: judge abstentions first, then
 * machine-made verdicts awaiting confirmation (human ones are settled). */
export function adjudicationQueue(
  decisions: Decision[],
  stage: "title" | "abstract",
): Decision[] {
  const effective = [...effectiveDecisions(decisions, stage).values()];
  const pending = effective.filter((d) => d.verdict === "needs_judge");
  const machine = effective.filter(
    (d) => d.verdict !== "needs_judge" && d.actor !== "human",
  );
  return [...pending, ...machine];
}
