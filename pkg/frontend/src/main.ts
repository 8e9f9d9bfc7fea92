/** Console entry point: picks the run from the URL (?run=<id>), wires the
 * three views together and keeps the timeline live via long polling. */

import { ApiClient } from "./api.js";
import { createPlanEditor } from "./planEditor.js";
import { createProgressView } from "./progress.js";
import { createScreeningBoard } from "./screeningBoard.js";

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const app = document.getElementById("app");
  if (app === null) return;

  let runId = new URLSearchParams(window.location.search).get("run");
  if (runId === null) {
    const { runs } = await api.listRuns();
    const latest = runs[runs.length - 1];
    if (latest === undefined) {
      app.textContent = "No runs yet. Create one with the CLI or POST /api/runs.";
      return;
    }
    runId = latest.run_id;
    const url = new URL(window.location.href);
    url.searchParams.set("run", runId);
    window.history.replaceState(null, "", url);
  }

  const header = document.createElement("header");
  const badge = document.createElement("span");
  badge.className = "stage-badge";
  header.appendChild(badge);
  app.appendChild(header);

  async function updateBadge(): Promise<void> {
    const state = await api.getRun(runId!);
    badge.textContent = `${runId}: ${state.stage} (${state.status})`;
  }

  const progress = createProgressView(app, api, runId);
  const refreshAll = () => {
    void updateBadge();
    void progress.refresh();
  };
  const plan = createPlanEditor(app, api, runId, refreshAll);
  const board = createScreeningBoard(app, api, runId, refreshAll);

  const advanceButton = document.createElement("button");
  advanceButton.className = "advance-button";
  advanceButton.textContent = "Advance stage";
  advanceButton.addEventListener("click", () => {
    void api.advance(runId!).then(() => {
      refreshAll();
      void plan.refresh();
      void board.refresh();
    });
  });
  header.appendChild(advanceButton);

  await updateBadge();
  await plan.refresh();
  await board.refresh();
  await progress.refresh();

  const poll = async (): Promise<void> => {
    try {
      const before = progress.cursor;
      const after = await progress.pollOnce();
      if (after !== before) {
        void updateBadge();
        void board.refresh();
      }
    } finally {
      window.setTimeout(() => void poll(), 500);
    }
  };
  void poll();
}

void boot();
