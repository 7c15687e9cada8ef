"""Experiment service: trial sequencing, rating persistence, CSV export.

Serves a randomized pass through the stimulus catalog (one trial per
stimulus), validates that every submitted rating vector sums to exactly
100, and persists accepted records to an append-only newline-delimited
JSON log. Sessions are resumable: on restart the cursor is rebuilt from
the log, and duplicate submissions are rejected, so a completed session
always holds exactly one record per stimulus.

HTTP surface (JSON bodies):
    POST /sessions {observer, session, seed}      -> {session_id, ...}
    GET  /sessions/{id}/trial                     -> {stimulus_id, image_url, ...}
    POST /sessions/{id}/ratings {stimulus_id, metal, shiny_black,
                                 shiny_white, other}
    GET  /export.csv
    GET  /stimuli/{file}                          (static images)
"""

from __future__ import annotations

import csv
import json
import random
import re
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .analysis import CATEGORIES, RatingRecord, write_ratings_csv
from .errors import (
    AlreadyRecordedError,
    CatalogError,
    DomainError,
    OutOfOrderError,
    SessionConflictError,
)

DEFAULT_TRIALS = 75  # 3 objects x 5 light maps x 5 conditions
_SUM_TOL = 1e-9
_ID_RE = re.compile(r"^(?P<object>[^_].*?)__(?P<map>.+?)__(?P<material>.+?)__x(?P<factor>[0-9.]+)$")


@dataclass(frozen=True)
class StimulusRef:
    """Catalog entry: a stimulus id, its condition, and its image file."""

    stimulus_id: str
    object: str
    material: str
    light_map: str
    factor: float
    filename: str


@dataclass
class SessionState:
    """One observer's pass through the catalog."""

    observer: str
    session: int
    seed: int
    order: list
    cursor: int = 0

    @property
    def key(self) -> str:
        return f"{self.observer}/{self.session}"

    @property
    def completed(self) -> bool:
        return self.cursor >= len(self.order)


def load_catalog(stimuli_dir, expected_trials: int | None = DEFAULT_TRIALS) -> list:
    """Build the stimulus catalog from a directory of rendered images.

    Uses catalog.csv (stimulus_id, object, material, light_map, factor,
    filename) when present; otherwise parses image filenames of the form
    object__map__material__x<factor>.png, skipping *_mask.png files.
    """
    d = Path(stimuli_dir)
    if not d.is_dir():
        raise CatalogError(f"stimulus directory {d} does not exist")
    refs = []
    manifest = d / "catalog.csv"
    if manifest.exists():
        with open(manifest, newline="") as fh:
            for row in csv.DictReader(fh):
                refs.append(
                    StimulusRef(
                        stimulus_id=row["stimulus_id"],
                        object=row["object"],
                        material=row["material"],
                        light_map=row["light_map"],
                        factor=float(row["factor"]),
                        filename=row["filename"],
                    )
                )
    else:
        for p in sorted(d.glob("*.png")):
            if p.stem.endswith("_mask"):
                continue
            m = _ID_RE.match(p.stem)
            if not m:
                raise CatalogError(
                    f"cannot parse stimulus id from {p.name!r}; provide a catalog.csv"
                )
            refs.append(
                StimulusRef(
                    stimulus_id=p.stem,
                    object=m.group("object"),
                    material=m.group("material"),
                    light_map=m.group("map"),
                    factor=float(m.group("factor")),
                    filename=p.name,
                )
            )
    ids = [r.stimulus_id for r in refs]
    if len(set(ids)) != len(ids):
        raise CatalogError("catalog contains duplicate stimulus ids")
    if expected_trials is not None and len(refs) != expected_trials:
        raise CatalogError(f"catalog has {len(refs)} stimuli, expected {expected_trials}")
    return sorted(refs, key=lambda r: r.stimulus_id)


class ExperimentStore:
    """Append-only rating log plus a session manifest, both on disk."""

    def __init__(self, store_path, catalog, expected_trials: int | None = DEFAULT_TRIALS):
        if expected_trials is not None and len(catalog) != expected_trials:
            raise CatalogError(f"catalog has {len(catalog)} stimuli, expected {expected_trials}")
        self.store_path = Path(store_path)
        self.manifest_path = self.store_path.with_name(self.store_path.name + ".sessions.json")
        self.catalog = {ref.stimulus_id: ref for ref in catalog}
        self._lock = threading.Lock()
        self._sessions: dict = {}
        self._recorded: dict = {}  # session key -> set of stimulus ids
        self._records: list = []
        self._load()

    def _load(self):
        if self.manifest_path.exists():
            manifest = json.loads(self.manifest_path.read_text())
            for key, entry in manifest.items():
                observer, session = key.rsplit("/", 1)
                self._sessions[key] = SessionState(
                    observer=observer,
                    session=int(session),
                    seed=int(entry["seed"]),
                    order=list(entry["order"]),
                )
        if self.store_path.exists():
            with open(self.store_path) as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    raw = json.loads(line)
                    rec = RatingRecord(
                        observer=raw["observer"],
                        session=int(raw["session"]),
                        object=raw["object"],
                        material=raw["material"],
                        light_map=raw["light_map"],
                        factor=float(raw["factor"]),
                        ratings=tuple(raw[c] for c in CATEGORIES),
                    )
                    self._records.append(rec)
                    key = f"{rec.observer}/{rec.session}"
                    self._recorded.setdefault(key, set()).add(raw["stimulus_id"])
        for key, state in self._sessions.items():
            state.cursor = len(self._recorded.get(key, set()))

    def _save_manifest(self):
        manifest = {
            key: {"seed": s.seed, "order": s.order} for key, s in sorted(self._sessions.items())
        }
        self.manifest_path.write_text(json.dumps(manifest, indent=1, sort_keys=True))

    def trial_order(self, seed: int) -> list:
        """Deterministic shuffle of the catalog ids; depends only on the seed."""
        order = sorted(self.catalog)
        random.Random(seed).shuffle(order)
        return order

    def start_session(self, observer: str, session: int, seed: int) -> SessionState:
        if session not in (1, 2):
            raise DomainError(f"session must be 1 or 2, got {session}")
        with self._lock:
            key = f"{observer}/{session}"
            if key in self._sessions:
                raise SessionConflictError(f"session {key} was already started")
            state = SessionState(
                observer=observer, session=session, seed=seed, order=self.trial_order(seed)
            )
            self._sessions[key] = state
            self._recorded.setdefault(key, set())
            self._save_manifest()  # persisted before the first trial is served
            return state

    def get_session(self, key: str) -> SessionState:
        try:
            return self._sessions[key]
        except KeyError:
            raise DomainError(f"unknown session {key!r}") from None

    def next_trial(self, state: SessionState):
        """Current trial's StimulusRef, or None when the session is complete.

        Idempotent: the cursor advances only on an accepted submission.
        """
        if state.completed:
            return None
        return self.catalog[state.order[state.cursor]]

    def submit_rating(self, state: SessionState, stimulus_id: str, ratings: dict) -> int:
        """Validate and durably append one rating; returns the trial index.

        `ratings` maps the four category names to values in [0, 100] that
        must sum to exactly 100.
        """
        values = []
        for cat in CATEGORIES:
            if cat not in ratings:
                raise DomainError(f"missing rating for category {cat!r}")
            values.append(float(ratings[cat]))
        total = sum(values)
        if abs(total - 100.0) > _SUM_TOL:
            raise DomainError(f"ratings must sum to 100, got sum {total:g}")
        if any(v < 0 or v > 100 for v in values):
            raise DomainError(f"ratings must lie in [0, 100], got {values}")
        with self._lock:
            if state.completed:
                raise OutOfOrderError("session is already complete")
            current = state.order[state.cursor]
            if stimulus_id in self._recorded[state.key]:
                raise AlreadyRecordedError(f"rating for {stimulus_id!r} was already recorded")
            if stimulus_id != current:
                raise OutOfOrderError(
                    f"expected a rating for {current!r}, got {stimulus_id!r}"
                )
            ref = self.catalog[stimulus_id]
            record = RatingRecord(
                observer=state.observer,
                session=state.session,
                object=ref.object,
                material=ref.material,
                light_map=ref.light_map,
                factor=ref.factor,
                ratings=tuple(values),
            )
            line = json.dumps(
                {
                    "observer": record.observer,
                    "session": record.session,
                    "stimulus_id": stimulus_id,
                    "object": record.object,
                    "material": record.material,
                    "light_map": record.light_map,
                    "factor": record.factor,
                    **dict(zip(CATEGORIES, record.ratings)),
                },
                sort_keys=True,
            )
            with open(self.store_path, "a") as fh:
                fh.write(line + "\n")
                fh.flush()
            self._records.append(record)
            self._recorded[state.key].add(stimulus_id)
            state.cursor += 1
            return state.cursor

    def records(self) -> list:
        with self._lock:
            return list(self._records)

    def export_csv(self, target=None) -> str | None:
        """All accepted records in the analysis CSV schema."""
        with self._lock:
            records = list(self._records)
        if target is None:
            import io

            buf = io.StringIO()
            write_ratings_csv(records, buf)
            return buf.getvalue()
        write_ratings_csv(records, target)
        return None


# ---------------------------------------------------------------------------
# HTTP layer
# ---------------------------------------------------------------------------

def _session_key_from_id(session_id: str) -> str:
    return session_id.replace("--", "/", 1) if "/" not in session_id else session_id


def _session_id(state: SessionState) -> str:
    return f"{state.observer}--{state.session}"


class _Handler(BaseHTTPRequestHandler):
    store: ExperimentStore = None
    stimuli_dir: Path = None

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _cors(self):
        # the browser client is served as static files from elsewhere
        self.send_header("Access-Control-Allow-Origin", "*")

    def _json(self, status: int, payload: dict):
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self._cors()
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):
        self.send_response(204)
        self._cors()
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        try:
            return json.loads(self.rfile.read(length) or b"{}")
        except json.JSONDecodeError:
            raise DomainError("request body is not valid JSON")

    def do_GET(self):
        try:
            if self.path == "/export.csv":
                body = self.store.export_csv().encode()
                self.send_response(200)
                self.send_header("Content-Type", "text/csv")
                self.send_header("Content-Length", str(len(body)))
                self._cors()
                self.end_headers()
                self.wfile.write(body)
                return
            m = re.match(r"^/sessions/([^/]+)/trial$", self.path)
            if m:
                state = self.store.get_session(_session_key_from_id(m.group(1)))
                ref = self.store.next_trial(state)
                if ref is None:
                    self._json(200, {"completed": True, "total": len(state.order)})
                else:
                    self._json(
                        200,
                        {
                            "completed": False,
                            "stimulus_id": ref.stimulus_id,
                            "image_url": f"/stimuli/{ref.filename}",
                            "index": state.cursor,
                            "total": len(state.order),
                        },
                    )
                return
            m = re.match(r"^/stimuli/([^/]+)$", self.path)
            if m and self.stimuli_dir is not None:
                target = (self.stimuli_dir / m.group(1)).resolve()
                if target.parent != self.stimuli_dir.resolve() or not target.exists():
                    self._json(404, {"error": "no such stimulus image"})
                    return
                body = target.read_bytes()
                self.send_response(200)
                self.send_header("Content-Type", "image/png")
                self.send_header("Content-Length", str(len(body)))
                self._cors()
                self.end_headers()
                self.wfile.write(body)
                return
            self._json(404, {"error": f"no such resource {self.path!r}"})
        except DomainError as exc:
            self._json(404, {"error": str(exc)})

    def do_POST(self):
        try:
            if self.path == "/sessions":
                payload = self._read_json()
                state = self.store.start_session(
                    observer=str(payload["observer"]),
                    session=int(payload["session"]),
                    seed=int(payload.get("seed", 0)),
                )
                self._json(
                    201,
                    {
                        "session_id": _session_id(state),
                        "observer": state.observer,
                        "session": state.session,
                        "total": len(state.order),
                    },
                )
                return
            m = re.match(r"^/sessions/([^/]+)/ratings$", self.path)
            if m:
                state = self.store.get_session(_session_key_from_id(m.group(1)))
                payload = self._read_json()
                stimulus_id = str(payload.get("stimulus_id", ""))
                ratings = {cat: payload.get(cat) for cat in CATEGORIES}
                if any(v is None for v in ratings.values()):
                    raise DomainError(f"ratings payload needs the four categories {CATEGORIES}")
                recorded = self.store.submit_rating(state, stimulus_id, ratings)
                self._json(200, {"accepted": True, "recorded": recorded, "total": len(state.order)})
                return
            self._json(404, {"error": f"no such resource {self.path!r}"})
        except KeyError as exc:
            self._json(400, {"error": f"missing field {exc}"})
        except SessionConflictError as exc:
            self._json(409, {"error": str(exc)})
        except (OutOfOrderError, AlreadyRecordedError) as exc:
            self._json(409, {"error": str(exc)})
        except DomainError as exc:
            self._json(400, {"error": str(exc)})


def make_server(store: ExperimentStore, stimuli_dir=None, host="127.0.0.1", port=0):
    """ThreadingHTTPServer wired to a store; port 0 picks a free port."""
    handler = type(
        "BoundHandler",
        (_Handler,),
        {"store": store, "stimuli_dir": Path(stimuli_dir) if stimuli_dir else None},
    )
    return ThreadingHTTPServer((host, port), handler)


def serve(stimuli_dir, store_path, port: int, host="127.0.0.1", expected_trials=DEFAULT_TRIALS):
    """Blocking entry point used by the CLI."""
    catalog = load_catalog(stimuli_dir, expected_trials)
    store = ExperimentStore(store_path, catalog, expected_trials)
    server = make_server(store, stimuli_dir=stimuli_dir, host=host, port=port)
    print(f"serving {len(catalog)} stimuli on http://{host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
