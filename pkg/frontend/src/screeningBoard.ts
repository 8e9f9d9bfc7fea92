/** Screening board: decisions grouped by stage with one-click human
 * overrides. A rationale is mandatory (the submit button stays disabled
 * without one, mirroring the server invariant), and the board only ever
 * re-renders from fresh server state after an acknowledged mutation. */

import { ApiClient } from "./api.js";
import { abstractQueue, effectiveDecisions } from "./queue.js";
import type { Candidate, Decision } from "./types.js";

export interface ScreeningBoard {
  refresh(): Promise<void>;
  element: HTMLElement;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function createScreeningBoard(
  container: HTMLElement,
  api: ApiClient,
  runId: string,
  onOverride: () => void = () => {},
): ScreeningBoard {
  const root = el("section", "screening-board");
  container.appendChild(root);

  async function refresh(): Promise<void> {
    const [{ decisions }, { candidates }] = await Promise.all([
      api.getDecisions(runId),
      api.getCandidates(runId),
    ]);
    render(decisions, candidates);
  }

  function render(decisions: Decision[], candidates: Candidate[]): void {
    root.replaceChildren();
    const titles = new Map(candidates.map((c) => [c.record_id, c.title]));

    for (const stage of ["title", "abstract"] as const) {
      const effective = effectiveDecisions(decisions, stage);
      if (effective.size === 0) continue;
      const section = el("div", `stage-${stage}`);
      section.appendChild(el("h3", "", `${stage} screening`));
      const list = el("ul", "decision-list");
      for (const decision of effective.values()) {
        list.appendChild(renderRow(decision, titles.get(decision.record_id) ?? ""));
      }
      section.appendChild(list);
      root.appendChild(section);
    }

    const queue = abstractQueue(decisions);
    const queueNote = el(
      "p",
      "abstract-queue",
      `${queue.length} record(s) in the abstract screening queue`,
    );
    queueNote.dataset.count = String(queue.length);
    root.appendChild(queueNote);
  }

  function renderRow(decision: Decision, title: string): HTMLElement {
    const row = el("li", `decision verdict-${decision.verdict}`);
    row.dataset.decisionId = decision.decision_id;
    row.appendChild(el("span", "decision-title", title));
    row.appendChild(
      el(
        "span",
        "decision-meta",
        `${decision.verdict} (${decision.actor}): ${decision.rationale}`,
      ),
    );

    const form = el("form", "override-form");
    const rationale = el("input", "override-rationale");
    rationale.type = "text";
    rationale.placeholder = "Rationale (required)";
    const include = overrideButton("include");
    const exclude = overrideButton("exclude");
    const setEnabled = () => {
      const ok = rationale.value.trim().length > 0;
      include.disabled = !ok;
      exclude.disabled = !ok;
    };
    setEnabled();
    rationale.addEventListener("input", setEnabled);

    for (const button of [include, exclude]) {
      button.addEventListener("click", (ev) => {
        ev.preventDefault();
        void submitOverride(
          decision.decision_id,
          button.dataset.verdict as "include" | "exclude",
          rationale.value,
        );
      });
    }
    form.appendChild(rationale);
    form.appendChild(include);
    form.appendChild(exclude);
    row.appendChild(form);
    return row;
  }

  function overrideButton(verdict: "include" | "exclude"): HTMLButtonElement {
    const button = el("button", `override-${verdict}`, verdict);
    button.type = "button";
    button.dataset.verdict = verdict;
    return button;
  }

  async function submitOverride(
    decisionId: string,
    verdict: "include" | "exclude",
    rationale: string,
  ): Promise<void> {
    await api.override(runId, decisionId, verdict, rationale);
    await refresh(); // server state is the only truth
    onOverride();
  }

  return { refresh, element: root };
}
