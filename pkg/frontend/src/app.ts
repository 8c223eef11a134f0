/**
 * The single-page client: a query textbox, a ranked list of clickable
 * results, and a source-code panel.
 *
 * The view is a faithful rendering of the API: results appear in rank order
 * with scores to four decimal places, never re-ranked or filtered. At most
 * one query is in flight; a newer submission makes any stale response a
 * no-op (monotonic request counter). A failed query shows an error banner
 * with a retry button and keeps the previous results on screen.
 */

import { ApiError, ModelResponse, ModelSearchApi, RankedResult } from "./api.js";

export type Status = "idle" | "loading" | "error";

export interface UiState {
  queryText: string;
  results: RankedResult[];
  selectedEntry: ModelResponse | null;
  status: Status;
  errorMessage: string | null;
}

export interface App {
  state: UiState;
  submitQuery(): Promise<void>;
  selectResult(entryId: string): Promise<void>;
  elements: {
    input: HTMLInputElement;
    submit: HTMLButtonElement;
    results: HTMLElement;
    banner: HTMLElement;
    retry: HTMLButtonElement;
    panel: HTMLElement;
  };
}

export function createApp(root: HTMLElement, client: ModelSearchApi, k = 5): App {
  root.innerHTML = `
    <div class="layout">
      <section class="left">
        <div id="results" class="results"></div>
        <div id="error-banner" class="error-banner" hidden>
          <span id="error-message"></span>
          <button id="retry-button" type="button">Retry</button>
        </div>
        <form id="query-form" class="query-form">
          <input id="query-input" type="text"
                 placeholder="Describe your combinatorial problem..." autocomplete="off" />
          <button id="query-submit" type="submit" disabled>Search</button>
        </form>
      </section>
      <section class="right">
        <div id="source-panel" class="source-panel">
          <p class="placeholder">Select a result to view its source code.</p>
        </div>
      </section>
    </div>
  `;

  const input = root.querySelector<HTMLInputElement>("#query-input")!;
  const submit = root.querySelector<HTMLButtonElement>("#query-submit")!;
  const form = root.querySelector<HTMLFormElement>("#query-form")!;
  const resultsBox = root.querySelector<HTMLElement>("#results")!;
  const banner = root.querySelector<HTMLElement>("#error-banner")!;
  const bannerMessage = root.querySelector<HTMLElement>("#error-message")!;
  const retry = root.querySelector<HTMLButtonElement>("#retry-button")!;
  const panel = root.querySelector<HTMLElement>("#source-panel")!;

  const state: UiState = {
    queryText: "",
    results: [],
    selectedEntry: null,
    status: "idle",
    errorMessage: null,
  };

  let requestCounter = 0;

  function renderBanner(): void {
    banner.hidden = state.status !== "error";
    bannerMessage.textContent = state.errorMessage ?? "";
  }

  function renderResults(): void {
    resultsBox.innerHTML = "";
    for (const result of state.results) {
      const button = document.createElement("button");
      button.type = "button";
      button.className = "result-button";
      button.dataset.entryId = result.entry_id;
      button.textContent = `${result.rank}. ${result.name} (${result.score.toFixed(4)})`;
      button.addEventListener("click", () => {
        void selectResult(result.entry_id);
      });
      resultsBox.appendChild(button);
    }
  }

  function renderPanel(): void {
    panel.innerHTML = "";
    if (state.selectedEntry === null) {
      const placeholder = document.createElement("p");
      placeholder.className = "placeholder";
      placeholder.textContent = "Select a result to view its source code.";
      panel.appendChild(placeholder);
      return;
    }
    const title = document.createElement("h2");
    title.className = "model-name";
    title.textContent = state.selectedEntry.name;
    panel.appendChild(title);
    for (const file of state.selectedEntry.source_files) {
      const header = document.createElement("div");
      header.className = "file-header";
      header.textContent = file.filename;
      const code = document.createElement("pre");
      code.className = "file-content";
      code.textContent = file.content;
      panel.appendChild(header);
      panel.appendChild(code);
    }
  }

  function renderPanelError(message: string): void {
    panel.innerHTML = "";
    const error = document.createElement("p");
    error.className = "panel-error";
    error.textContent = message;
    panel.appendChild(error);
  }

  async function submitQuery(): Promise<void> {
    const text = input.value.trim();
    if (!text) {
      return;
    }
    state.queryText = text;
    state.status = "loading";
    renderBanner();
    const ticket = ++requestCounter;
    try {
      const response = await client.query(text, k);
      if (ticket !== requestCounter) {
        return; // a newer query superseded this one
      }
      state.results = response.results;
      state.selectedEntry = null;
      state.status = "idle";
      state.errorMessage = null;
      renderResults();
      renderPanel();
    } catch (error) {
      if (ticket !== requestCounter) {
        return;
      }
      state.status = "error";
      state.errorMessage =
        error instanceof ApiError ? error.message : "query failed unexpectedly";
      // previous results stay rendered
    }
    renderBanner();
  }

  async function selectResult(entryId: string): Promise<void> {
    if (!state.results.some((r) => r.entry_id === entryId)) {
      throw new Error(`entry ${entryId} is not among the current results`);
    }
    try {
      const model = await client.getModel(entryId);
      state.selectedEntry = model;
      renderPanel();
    } catch (error) {
      state.selectedEntry = null;
      const message =
        error instanceof ApiError && error.status === 404
          ? `model ${entryId} was not found on the server`
          : error instanceof Error
            ? error.message
            : "failed to load the model";
      renderPanelError(message);
    }
  }

  input.addEventListener("input", () => {
    submit.disabled = input.value.trim().length === 0;
  });
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void submitQuery();
  });
  retry.addEventListener("click", () => {
    void submitQuery();
  });

  return {
    state,
    submitQuery,
    selectResult,
    elements: { input, submit, results: resultsBox, banner, retry, panel },
  };
}
