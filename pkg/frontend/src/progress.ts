/** Progress view: funnel widget, long-poll event timeline with cursor
 * resume, raw report text, and the satisfaction feedback form whose labels
 * come from the server's ratings catalogue. */

import { ApiClient, ApiError } from "./api.js";
import type { Funnel, RunEvent } from "./types.js";

export interface ProgressView {
  refresh(): Promise<void>;
  /** One long-poll step; resolves with the new cursor. */
  pollOnce(): Promise<number>;
  element: HTMLElement;
  cursor: number;
}

const FUNNEL_LABELS: [keyof Funnel, string][] = [
  ["identified", "Records identified"],
  ["deduplicated", "After deduplication"],
  ["title_included", "After title screening"],
  ["abstract_included", "After abstract screening"],
  ["final_included", "In final synthesis"],
];

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

export function createProgressView(
  container: HTMLElement,
  api: ApiClient,
  runId: string,
): ProgressView {
  const root = el("section", "progress-view");
  const funnelBox = el("div", "funnel-widget");
  const timeline = el("ol", "event-timeline");
  const reportBox = el("pre", "report-view");
  const feedbackForm = el("form", "feedback-form");
  root.appendChild(funnelBox);
  root.appendChild(timeline);
  root.appendChild(reportBox);
  root.appendChild(feedbackForm);
  container.appendChild(root);

  const view: ProgressView = { refresh, pollOnce, element: root, cursor: 0 };

  function renderFunnel(funnel: Funnel | null): void {
    funnelBox.replaceChildren();
    funnelBox.appendChild(el("h3", "", "Funnel"));
    if (funnel === null) {
      funnelBox.appendChild(el("p", "", "Not yet computed."));
      return;
    }
    const list = el("ul");
    for (const [key, label] of FUNNEL_LABELS) {
      const item = el("li", `funnel-${key}`, `${label}: ${funnel[key]}`);
      item.dataset.count = String(funnel[key]);
      list.appendChild(item);
    }
    funnelBox.appendChild(list);
  }

  function appendEvents(events: RunEvent[]): void {
    for (const event of events) {
      const item = el("li", `event-${event.kind}`, `${event.ts} ${event.kind}`);
      item.dataset.seq = String(event.seq);
      timeline.appendChild(item);
    }
  }

  async function renderReport(): Promise<void> {
    try {
      // textContent, never re-rendered: the view shows the report verbatim
      reportBox.textContent = await api.getReport(runId);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        reportBox.textContent = "";
        return;
      }
      throw err;
    }
  }

  async function renderFeedbackForm(): Promise<void> {
    const { ratings } = await api.getRatings();
    feedbackForm.replaceChildren();
    const select = el("select", "feedback-rating");
    for (const rating of ratings) {
      const option = el("option", "", rating);
      option.value = rating;
      select.appendChild(option);
    }
    const comment = el("input", "feedback-comment");
    comment.type = "text";
    const submit = el("button", "feedback-submit", "Send feedback");
    submit.type = "submit";
    const note = el("p", "feedback-note");
    feedbackForm.appendChild(select);
    feedbackForm.appendChild(comment);
    feedbackForm.appendChild(submit);
    feedbackForm.appendChild(note);
    // onsubmit assignment (not addEventListener) so repeated refreshes
    // replace the handler instead of stacking duplicate submissions
    feedbackForm.onsubmit = (ev) => {
      ev.preventDefault();
      void api
        .postFeedback(runId, select.value, comment.value)
        .then(({ feedback }) => {
          note.textContent = `Recorded: ${feedback.rating}`;
        });
    };
  }

  async function refresh(): Promise<void> {
    const state = await api.getRun(runId);
    renderFunnel(state.funnel);
    // Replay the whole timeline from the stored cursor position zero so a
    // page reload reconstructs history entirely from the server.
    timeline.replaceChildren();
    view.cursor = 0;
    const batch = await api.getEvents(runId, 0, 0);
    appendEvents(batch.events);
    view.cursor = batch.cursor;
    await renderReport();
    await renderFeedbackForm();
  }

  async function pollOnce(): Promise<number> {
    const batch = await api.getEvents(runId, view.cursor);
    appendEvents(batch.events);
    view.cursor = batch.cursor;
    return batch.cursor;
  }

  return view;
}
