/** Plan editor: shows the protocol's questions, query and criteria, and
 * submits field edits. Server-side validation failures (including query
 * syntax errors with a byte offset) surface as an inline banner. */

import { ApiClient, ApiError } from "./api.js";
import { printQuery } from "./query.js";
import type { RunState } from "./types.js";

export interface PlanEditor {
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

export function createPlanEditor(
  container: HTMLElement,
  api: ApiClient,
  runId: string,
  onEdited: () => void = () => {},
): PlanEditor {
  const root = el("section", "plan-editor");
  container.appendChild(root);

  async function refresh(): Promise<void> {
    const state = await api.getRun(runId);
    render(state);
  }

  function render(state: RunState): void {
    root.replaceChildren();
    const finalized = state.status === "finalized";
    root.appendChild(el("h2", "", "Review plan"));
    root.appendChild(el("p", "plan-topic", state.protocol.topic));

    const questions = el("ul", "plan-questions");
    for (const q of state.protocol.questions) {
      questions.appendChild(el("li", "", `${q.id}: ${q.text}`));
    }
    root.appendChild(questions);

    const form = el("form", "query-form");
    const label = el("label", "", "Search query");
    const input = el("input", "query-input");
    input.type = "text";
    input.value = state.protocol.query ? printQuery(state.protocol.query) : "";
    input.disabled = finalized;
    const submit = el("button", "query-save", "Save query");
    submit.type = "submit";
    submit.disabled = finalized;
    const banner = el("p", "error-banner");
    banner.hidden = true;

    form.appendChild(label);
    form.appendChild(input);
    form.appendChild(submit);
    form.appendChild(banner);
    root.appendChild(form);

    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      void submitQuery(input.value, banner);
    });
  }

  async function submitQuery(value: string, banner: HTMLElement): Promise<void> {
    banner.hidden = true;
    try {
      await api.editProtocol(runId, "query", value);
      await refresh();
      onEdited();
    } catch (err) {
      if (err instanceof ApiError) {
        let message = err.body.error;
        if (err.body.offset !== undefined) {
          message = `Query error at byte ${err.body.offset}: ${err.body.error}`;
          if (err.body.expected?.length) {
            message += ` — expected one of ${err.body.expected.join(", ")}`;
          }
        }
        banner.textContent = message;
        banner.hidden = false;
      } else {
        throw err;
      }
    }
  }

  return { refresh, element: root };
}
