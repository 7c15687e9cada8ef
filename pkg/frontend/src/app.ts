/**
 * Browser entry point: start-session form, stimulus display, the four
 * coupled sliders with digital readouts, and the submit flow.
 *
 * At most one submission is in flight at a time; the controls are
 * disabled while it is pending. A network failure shows a retry banner
 * and leaves the slider state untouched; a service rejection surfaces
 * the server's message verbatim. Stimulus images are shown at native
 * resolution (no client-side smoothing or scaling).
 */

import { ApiError, ExperimentClient, Trial } from "./api.js";
import {
  CATEGORIES,
  CATEGORY_LABELS,
  Category,
  SliderPanelState,
  adjustSlider,
  initialState,
  panelSum,
} from "./slider.js";

interface AppState {
  client: ExperimentClient | null;
  sessionId: string | null;
  trial: Trial | null;
  panel: SliderPanelState;
  pending: boolean;
  notice: string;
  retry: boolean;
}

const state: AppState = {
  client: null,
  sessionId: null,
  trial: null,
  panel: initialState(),
  pending: false,
  notice: "",
  retry: false,
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  for (const child of children) node.append(child);
  return node;
}

function root(): HTMLElement {
  const node = document.getElementById("app");
  if (!node) throw new Error("missing #app container");
  return node;
}

// ---------------------------------------------------------------------------
// Views
// ---------------------------------------------------------------------------

function startForm(): HTMLElement {
  const service = el("input", { id: "service", value: localStorage.getItem("service") ?? "http://127.0.0.1:8765" });
  const observer = el("input", { id: "observer", placeholder: "observer id" });
  const session = el("select", { id: "session" }, [
    el("option", { value: "1" }, ["session 1"]),
    el("option", { value: "2" }, ["session 2"]),
  ]);
  const seed = el("input", { id: "seed", value: String(Math.floor(Math.random() * 1e6)) });
  const button = el("button", {}, ["Start session"]);
  button.addEventListener("click", () => {
    void startSession(service.value.replace(/\/$/, ""), observer.value.trim(), Number(session.value), Number(seed.value));
  });
  return el("div", { class: "start" }, [
    el("h1", {}, ["Material rating experiment"]),
    labelled("Service URL", service),
    labelled("Observer", observer),
    labelled("Session", session),
    labelled("Shuffle seed", seed),
    button,
    notice(),
  ]);
}

function labelled(text: string, control: HTMLElement): HTMLElement {
  return el("label", { class: "field" }, [el("span", {}, [text]), control]);
}

function notice(): HTMLElement {
  if (!state.notice) return el("div");
  const cls = state.retry ? "notice retry" : "notice";
  const children: (Node | string)[] = [state.notice];
  if (state.retry) {
    const again = el("button", {}, ["Retry"]);
    again.addEventListener("click", () => void submit());
    children.push(again);
  }
  return el("div", { class: cls }, children);
}

function sliderRow(category: Category): HTMLElement {
  const value = state.panel[category];
  const range = el("input", {
    type: "range",
    min: "0",
    max: "100",
    step: "1",
    value: String(value),
  });
  if (state.pending) range.setAttribute("disabled", "");
  range.addEventListener("input", () => {
    state.panel = adjustSlider(state.panel, category, Number(range.value));
    render();
  });
  const readout = el("output", { class: "readout" }, [String(value)]);
  return el("div", { class: "slider-row" }, [
    el("span", { class: "slider-label" }, [CATEGORY_LABELS[category]]),
    range,
    readout,
  ]);
}

function trialView(): HTMLElement {
  const trial = state.trial;
  const client = state.client;
  if (!trial || !client) return el("div");
  if (trial.completed) {
    return el("div", { class: "done" }, [
      el("h1", {}, ["All trials complete"]),
      el("p", {}, [`Thank you — every one of the ${trial.total ?? 0} stimuli has been rated.`]),
      el("p", {}, [el("a", { href: client.exportUrl() }, ["Download the ratings CSV"])]),
    ]);
  }
  const image = el("img", {
    src: client.imageUrl(trial.image_url ?? ""),
    alt: "stimulus",
    class: "stimulus",
  });
  const submitButton = el("button", { class: "submit" }, ["Submit ratings"]);
  if (state.pending) submitButton.setAttribute("disabled", "");
  submitButton.addEventListener("click", () => void submit());
  return el("div", { class: "trial" }, [
    el("div", { class: "progress" }, [
      `Trial ${(trial.index ?? 0) + 1} of ${trial.total ?? 0}`,
    ]),
    image,
    el("p", { class: "question" }, [
      "How confident are you that the depicted material is each of the following?",
    ]),
    el("div", { class: "sliders" }, CATEGORIES.map(sliderRow)),
    el("div", { class: "sum" }, [`Total: ${panelSum(state.panel)}%`]),
    submitButton,
    notice(),
  ]);
}

function render(): void {
  const container = root();
  container.replaceChildren(state.sessionId ? trialView() : startForm());
}

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

async function startSession(
  service: string,
  observer: string,
  session: number,
  seed: number,
): Promise<void> {
  if (!observer) {
    state.notice = "Enter an observer id first.";
    state.retry = false;
    render();
    return;
  }
  localStorage.setItem("service", service);
  const client = new ExperimentClient(service);
  try {
    const info = await client.startSession(observer, session, seed);
    state.client = client;
    state.sessionId = info.session_id;
    state.notice = "";
    state.retry = false;
    await loadTrial();
  } catch (err) {
    state.notice = err instanceof ApiError ? err.message : `Cannot reach ${service}`;
    state.retry = false;
    render();
  }
}

async function loadTrial(): Promise<void> {
  if (!state.client || !state.sessionId) return;
  state.trial = await state.client.currentTrial(state.sessionId);
  state.panel = initialState();
  state.notice = "";
  state.retry = false;
  render();
}

async function submit(): Promise<void> {
  const { client, sessionId, trial } = state;
  if (!client || !sessionId || !trial || trial.completed || state.pending) return;
  state.pending = true;
  state.notice = "";
  state.retry = false;
  render();
  try {
    await client.submitRatings(sessionId, trial.stimulus_id ?? "", state.panel);
    state.pending = false;
    await loadTrial();
  } catch (err) {
    state.pending = false;
    if (err instanceof ApiError && err.status === 409) {
      // this trial was already recorded (e.g. a resumed session): move on
      await loadTrial();
      return;
    }
    if (err instanceof ApiError) {
      // service validation errors verbatim; slider state preserved
      state.notice = err.message;
      state.retry = false;
    } else {
      state.notice = "Network problem — your ratings were kept; try again.";
      state.retry = true;
    }
    render();
  }
}

document.addEventListener("DOMContentLoaded", render);
