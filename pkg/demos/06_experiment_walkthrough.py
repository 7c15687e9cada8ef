#!/usr/bin/env python3
"""End-to-end experiment walkthrough with a simulated observer.

Renders a small 75-stimulus set (3 objects x 5 probes x 5 conditions),
starts the rating service on an ephemeral port, drives a scripted
observer through all trials over HTTP (their confidences follow each
image's measured specular coverage plus noise), then exports the ratings
and recomputes the per-probe bias index and its regression against the
illumination statistics.
"""

import json
import threading
import urllib.request
from pathlib import Path

import numpy as np

from shinylab import pngio
from shinylab.analysis import bias_index, linear_fit, load_ratings_csv
from shinylab.envmap import EquirectMap, gaussian_blur
from shinylab.exprig import ExperimentStore, load_catalog, make_server
from shinylab.imstats import specular_coverage
from shinylab.render import render_condition_set
from shinylab.sphharm import diffuseness2, order_powers, project

import io

OUT = Path(__file__).parent / "output" / "experiment"
STIM = OUT / "stimuli"
STIM.mkdir(parents=True, exist_ok=True)

# a fresh walkthrough each run: drop any previous scripted session
for stale in (OUT / "ratings.ndjson", OUT / "ratings.ndjson.sessions.json"):
    stale.unlink(missing_ok=True)

# --- five probes spanning sparse to broad illumination -------------------
H, W = 64, 128
rng = np.random.default_rng(11)
base = np.full((H, W), 0.01)
for _ in range(5):
    i, j = rng.integers(10, 50), rng.integers(0, W)
    di, dj = np.arange(H)[:, None] - i, (np.arange(W)[None, :] - j + W // 2) % W - W // 2
    base += 80.0 * np.exp(-(di**2 + dj**2) / 4.0)
probe = EquirectMap.from_luminance(base)
maps = {"w0": probe}
for k, width in enumerate((4.0, 12.0, 32.0, 96.0), start=1):
    maps[f"w{k}"] = gaussian_blur(probe, width)

# --- render and persist the catalog ---------------------------------------
stimuli = render_condition_set(maps, objects=("sphere", "wavy", "dimpled"), size=96)
coverage = {}
rows = ["stimulus_id,object,material,light_map,factor,filename"]
for stim in stimuli:
    sid = stim.meta.stimulus_id
    pngio.save_gray(STIM / f"{sid}.png", stim.image)
    pngio.save_mask(STIM / f"{sid}_mask.png", stim.mask)
    coverage[sid] = specular_coverage(stim).coverage
    rows.append(
        f"{sid},{stim.meta.object},{stim.meta.material},"
        f"{stim.meta.light_map},{stim.meta.factor:g},{sid}.png"
    )
(STIM / "catalog.csv").write_text("\n".join(rows) + "\n")
print(f"rendered {len(stimuli)} stimuli into {STIM}/")

# --- serve and run a scripted observer ------------------------------------
store = ExperimentStore(OUT / "ratings.ndjson", load_catalog(STIM))
server = make_server(store, stimuli_dir=STIM)
threading.Thread(target=server.serve_forever, daemon=True).start()
base_url = f"http://127.0.0.1:{server.server_address[1]}"
print(f"service listening on {base_url}")


def call(method, path, payload=None):
    data = json.dumps(payload).encode() if payload is not None else None
    req = urllib.request.Request(base_url + path, data=data, method=method)
    if data:
        req.add_header("Content-Type", "application/json")
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


def observer_ratings(sid):
    """Coverage-driven confidences: high coverage reads as metal."""
    cov = coverage[sid]
    metal_conf = np.clip(85 * cov + rng.normal(0, 4), 0, 80)
    black_conf = np.clip(80 * (1 - cov) + rng.normal(0, 4), 0, 100 - metal_conf)
    white_conf = np.clip(rng.normal(8, 2), 0, 100 - metal_conf - black_conf)
    parts = np.array([metal_conf, black_conf, white_conf], dtype=int)
    other = 100 - parts.sum()
    return dict(zip(("metal", "shiny_black", "shiny_white", "other"), map(int, parts))) | {
        "other": int(other)
    }


session = call("POST", "/sessions", {"observer": "sim", "session": 1, "seed": 5})
sid = session["session_id"]
while True:
    trial = call("GET", f"/sessions/{sid}/trial")
    if trial.get("completed"):
        break
    ratings = observer_ratings(trial["stimulus_id"]) | {"stimulus_id": trial["stimulus_id"]}
    call("POST", f"/sessions/{sid}/ratings", ratings)
server.shutdown()
server.server_close()
print(f"scripted observer completed {session['total']} trials")

# --- export and analyze -----------------------------------------------------
records = load_ratings_csv(io.StringIO(store.export_csv()))
bias = {m: bias_index(records, m) for m in maps}
d2 = {m: diffuseness2(order_powers(project(emap, 30))) for m, emap in maps.items()}
print(f"\n{'probe':>6} {'bias index':>11} {'diffuseness2':>13}")
for m in maps:
    print(f"{m:>6} {bias[m]:11.3f} {d2[m]:13.3f}")
fit = linear_fit([d2[m] for m in maps], [bias[m] for m in maps])
print(f"\nbias ~ diffuseness2: R^2 = {fit.r_squared:.3f} (slope {fit.slope:.2f})")
print("broader illumination -> higher coverage -> stronger metal bias")
