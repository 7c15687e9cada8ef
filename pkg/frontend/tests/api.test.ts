import assert from "node:assert/strict";
import { test } from "node:test";

import { ApiError, ExperimentClient } from "../src/api.js";
import { initialState } from "../src/slider.js";

interface Captured {
  url: string;
  method?: string;
  body?: string;
}

function clientWith(status: number, payload: unknown): { client: ExperimentClient; calls: Captured[] } {
  const calls: Captured[] = [];
  const fetchFn = (url: string, init?: RequestInit) => {
    calls.push({ url, method: init?.method, body: init?.body as string | undefined });
    return Promise.resolve(
      new Response(JSON.stringify(payload), {
        status,
        headers: { "Content-Type": "application/json" },
      }),
    );
  };
  return { client: new ExperimentClient("http://svc:1", fetchFn), calls };
}

test("startSession posts observer, session and seed", async () => {
  const { client, calls } = clientWith(201, {
    session_id: "o--1",
    observer: "o",
    session: 1,
    total: 75,
  });
  const info = await client.startSession("o", 1, 42);
  assert.equal(info.session_id, "o--1");
  assert.equal(calls[0].url, "http://svc:1/sessions");
  assert.equal(calls[0].method, "POST");
  assert.deepEqual(JSON.parse(calls[0].body ?? ""), { observer: "o", session: 1, seed: 42 });
});

test("currentTrial hits the session trial endpoint", async () => {
  const { client, calls } = clientWith(200, {
    completed: false,
    stimulus_id: "s1",
    image_url: "/stimuli/s1.png",
    index: 0,
    total: 75,
  });
  const trial = await client.currentTrial("o--1");
  assert.equal(trial.stimulus_id, "s1");
  assert.equal(calls[0].url, "http://svc:1/sessions/o--1/trial");
  assert.equal(client.imageUrl(trial.image_url ?? ""), "http://svc:1/stimuli/s1.png");
});

test("submitRatings maps something_else onto the wire key 'other'", async () => {
  const { client, calls } = clientWith(200, { accepted: true, recorded: 1, total: 75 });
  const panel = { ...initialState(), metal: 40, shiny_black: 30, shiny_white: 20, something_else: 10 };
  const result = await client.submitRatings("o--1", "s1", panel);
  assert.ok(result.accepted);
  const sent = JSON.parse(calls[0].body ?? "");
  assert.deepEqual(sent, {
    stimulus_id: "s1",
    metal: 40,
    shiny_black: 30,
    shiny_white: 20,
    other: 10,
  });
});

test("service rejections surface as ApiError with the server message", async () => {
  const { client } = clientWith(400, { error: "ratings must sum to 100, got sum 105" });
  await assert.rejects(
    client.submitRatings("o--1", "s1", initialState()),
    (err: unknown) => err instanceof ApiError && err.status === 400 && /105/.test(err.message),
  );
});

test("network failures propagate untouched (so the UI can offer a retry)", async () => {
  const failing = new ExperimentClient("http://svc:1", () =>
    Promise.reject(new TypeError("fetch failed")),
  );
  await assert.rejects(failing.currentTrial("o--1"), TypeError);
});
