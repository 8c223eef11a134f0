/** UI logic against a scripted fake backend: stale responses, 404s, preconditions. */

import { beforeEach, describe, expect, it } from "vitest";

import { ApiError, ModelResponse, ModelSearchApi, QueryResponse } from "../src/api.js";
import { App, createApp } from "../src/app.js";

function rankedResponse(ids: string[]): QueryResponse {
  return {
    results: ids.map((id, i) => ({
      entry_id: id,
      name: id.toUpperCase(),
      score: 0.9 - i * 0.1,
      rank: i + 1,
    })),
    config: "SC+D2",
    provider: "fallback-768",
    k: 5,
  };
}

function model(id: string): ModelResponse {
  return {
    entry_id: id,
    name: id.toUpperCase(),
    provenance: "test",
    source_files: [{ filename: `${id}.mzn`, content: `% ${id}\nsolve satisfy;\n` }],
    descriptions: {},
  };
}

class FakeApi implements ModelSearchApi {
  queryImpl: (text: string) => Promise<QueryResponse> = async (text) =>
    rankedResponse(["alpha", "beta"]);
  getModelImpl: (id: string) => Promise<ModelResponse> = async (id) => model(id);

  query(text: string): Promise<QueryResponse> {
    return this.queryImpl(text);
  }

  getModel(entryId: string): Promise<ModelResponse> {
    return this.getModelImpl(entryId);
  }
}

let fake: FakeApi;
let app: App;

beforeEach(() => {
  document.body.innerHTML = '<div id="app"></div>';
  fake = new FakeApi();
  app = createApp(document.getElementById("app")!, fake);
});

async function submit(text: string): Promise<void> {
  app.elements.input.value = text;
  app.elements.input.dispatchEvent(new Event("input"));
  await app.submitQuery();
}

describe("stale responses", () => {
  it("ignores a slow response superseded by a newer query", async () => {
    let releaseFirst!: () => void;
    const firstGate = new Promise<void>((resolve) => (releaseFirst = resolve));
    let call = 0;
    fake.queryImpl = async () => {
      call += 1;
      if (call === 1) {
        await firstGate;
        return rankedResponse(["stale_one", "stale_two"]);
      }
      return rankedResponse(["fresh_one", "fresh_two"]);
    };

    app.elements.input.value = "first";
    app.elements.input.dispatchEvent(new Event("input"));
    const slow = app.submitQuery();
    await submit("second");
    releaseFirst();
    await slow;

    const labels = [...app.elements.results.querySelectorAll("button")].map((b) => b.textContent);
    expect(labels.some((l) => l?.includes("FRESH_ONE"))).toBe(true);
    expect(labels.some((l) => l?.includes("STALE_ONE"))).toBe(false);
  });
});

describe("selection", () => {
  it("rejects ids that are not among the current results", async () => {
    await submit("anything");
    await expect(app.selectResult("ghost")).rejects.toThrow(/not among/);
  });

  it("renders an inline panel error on 404", async () => {
    fake.getModelImpl = async (id) => {
      throw new ApiError(`no entry with id '${id}'`, 404);
    };
    await submit("anything");
    await app.selectResult("alpha");
    expect(app.elements.panel.querySelector(".panel-error")?.textContent).toContain("alpha");
    // results list stays intact
    expect(app.elements.results.querySelectorAll("button").length).toBe(2);
  });

  it("clears the selection when new results arrive", async () => {
    await submit("anything");
    await app.selectResult("alpha");
    expect(app.state.selectedEntry?.entry_id).toBe("alpha");
    await submit("another query");
    expect(app.state.selectedEntry).toBeNull();
    expect(app.elements.panel.querySelector(".placeholder")).not.toBeNull();
  });
});

describe("error banner", () => {
  it("shows the API error message and keeps old results", async () => {
    await submit("good");
    fake.queryImpl = async () => {
      throw new ApiError("cannot reach the backend: refused");
    };
    await submit("bad");
    expect(app.elements.banner.hidden).toBe(false);
    expect(app.elements.banner.textContent).toContain("cannot reach the backend");
    expect(app.elements.results.querySelectorAll("button").length).toBe(2);
  });
});

describe("rendering fidelity", () => {
  it("respects API order and formats scores to 4 decimals", async () => {
    fake.queryImpl = async () => ({
      results: [
        { entry_id: "zzz", name: "Last Alphabetically", score: 0.75, rank: 1 },
        { entry_id: "aaa", name: "First Alphabetically", score: 0.25, rank: 2 },
      ],
      config: "SC",
      provider: "fallback-768",
      k: 5,
    });
    await submit("anything");
    const labels = [...app.elements.results.querySelectorAll("button")].map((b) => b.textContent);
    expect(labels).toEqual([
      "1. Last Alphabetically (0.7500)",
      "2. First Alphabetically (0.2500)",
    ]);
  });
});
