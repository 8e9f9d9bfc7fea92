import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { createPlanEditor } from "../src/planEditor.js";
import { flush, makeStub } from "./stub.js";

describe("plan editor", () => {
  let stub: ReturnType<typeof makeStub>;
  let api: ApiClient;
  let container: HTMLElement;

  beforeEach(() => {
    stub = makeStub();
    api = new ApiClient("", stub.fetch);
    document.body.innerHTML = "";
    container = document.body;
  });

  it("shows the current query in canonical text form", async () => {
    const editor = createPlanEditor(container, api, stub.runId);
    await editor.refresh();
    const input = container.querySelector<HTMLInputElement>(".query-input");
    expect(input?.value).toBe(
      '"large language models" OR "software development"',
    );
  });

  it("surfaces the server's byte offset when a query edit is rejected", async () => {
    const editor = createPlanEditor(container, api, stub.runId);
    await editor.refresh();

    const input = container.querySelector<HTMLInputElement>(".query-input")!;
    const form = container.querySelector<HTMLFormElement>(".query-form")!;
    const banner = container.querySelector<HTMLElement>(".error-banner")!;
    expect(banner.hidden).toBe(true);

    input.value = "(llm OR";
    form.dispatchEvent(new Event("submit", { cancelable: true }));
    await flush();

    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("Query error at byte 7");
    expect(banner.textContent).toContain("unexpected end of input");
    expect(banner.textContent).toContain("expected one of (, NOT, PHRASE, TERM");
  });

  it("keeps the banner hidden when an edit is accepted", async () => {
    let edited = 0;
    const editor = createPlanEditor(container, api, stub.runId, () => {
      edited += 1;
    });
    await editor.refresh();

    const input = container.querySelector<HTMLInputElement>(".query-input")!;
    input.value = "llm AND agents";
    container
      .querySelector<HTMLFormElement>(".query-form")!
      .dispatchEvent(new Event("submit", { cancelable: true }));
    await flush();

    const banner = container.querySelector<HTMLElement>(".error-banner")!;
    expect(banner.hidden).toBe(true);
    expect(edited).toBe(1);
  });
});
