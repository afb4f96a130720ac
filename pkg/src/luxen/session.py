"""In-memory sessions: frame registry, LRU eviction, recommendation runs.

Each session owns one engine (a config snapshot) and a bounded map of
frames. Parents of live frames are pinned so history-based recommendations
keep working; evicted ids answer 409 on writes instead of 404.
"""

from __future__ import annotations

import secrets
import threading
import time
from collections import OrderedDict
from typing import Optional

from .actions import Recommendation
from .frame import Frame
from .optimize import Engine, EngineConfig
from .specdoc import serialize_spec_doc, to_spec_doc

DEFAULT_FRAME_CAP = 32


class RecommendationRun:
    """One streamed dashboard computation; concurrent readers attach to it."""

    def __init__(self, key: tuple):
        self.key = key
        self.events: list[dict] = []
        self.vis_docs: dict[str, bytes] = {}
        self.done = False
        self.error: Optional[str] = None
        self.cond = threading.Condition()

    def push(self, event: str, data: dict) -> None:
        with self.cond:
            self.events.append({"event": event, "data": data})
            self.cond.notify_all()

    def finish(self, error: Optional[str] = None) -> None:
        with self.cond:
            self.done = True
            self.error = error
            self.cond.notify_all()

    def wait_events(self, after: int, timeout: float) -> tuple[list[dict], bool]:
        deadline = time.monotonic() + timeout
        with self.cond:
            while len(self.events) <= after and not self.done:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    break
                self.cond.wait(remaining)
            return list(self.events[after:]), self.done


class Session:
    def __init__(self, engine: Engine, frame_cap: int = DEFAULT_FRAME_CAP):
        self.id = secrets.token_hex(8)
        self.engine = engine
        self.frame_cap = frame_cap
        self.created_at = time.time()
        self.frames: OrderedDict[str, Frame] = OrderedDict()
        self.evicted: set[str] = set()
        self.runs: dict[str, RecommendationRun] = {}
        self._lock = threading.Lock()
        self._frame_locks: dict[str, threading.Lock] = {}

    def add_frame(self, frame: Frame) -> str:
        with self._lock:
            fid = f"f{secrets.token_hex(6)}"
            self.frames[fid] = frame
            self._frame_locks[fid] = threading.Lock()
            self._evict_if_needed()
            return fid

    def _evict_if_needed(self) -> None:
        while len(self.frames) > self.frame_cap:
            pinned = {
                id(fr.parent) for fr in self.frames.values() if fr.parent is not None
            }
            # LRU order, never the frame that was just added; parents of live
            # frames stay pinned so history recommendations keep working
            candidates = list(self.frames.items())[:-1]
            victim = next(
                (fid for fid, fr in candidates if id(fr) not in pinned), None
            )
            if victim is None:
                return  # everything is pinned; allow temporary overflow
            del self.frames[victim]
            self._frame_locks.pop(victim, None)
            self.runs.pop(victim, None)
            self.evicted.add(victim)

    def get_frame(self, fid: str) -> Optional[Frame]:
        with self._lock:
            frame = self.frames.get(fid)
            if frame is not None:
                self.frames.move_to_end(fid)
            return frame

    def frame_lock(self, fid: str) -> threading.Lock:
        with self._lock:
            return self._frame_locks.setdefault(fid, threading.Lock())

    def was_evicted(self, fid: str) -> bool:
        return fid in self.evicted

    # -- recommendation runs -------------------------------------------------

    def get_or_start_run(self, fid: str, frame: Frame, k: int) -> RecommendationRun:
        """Attach to the in-flight/finished run for this frame state, or start one."""
        key = (frame.version, frame.intent_version, k)
        with self._lock:
            run = self.runs.get(fid)
            if run is not None and run.key == key:
                return run
            run = RecommendationRun(key)
            self.runs[fid] = run

        def compute() -> None:
            try:
                dashboard = self.engine.recommend(
                    frame, k, sink=lambda name, rec: _deliver(run, name, rec)
                )
                run.push(
                    "done",
                    {
                        "actions": len(dashboard.recommendations),
                        "diagnostics": dashboard.diagnostics,
                    },
                )
                run.finish()
            except Exception as e:  # surfaced to the stream, not the socket
                run.push("error", {"message": str(e)})
                run.finish(error=str(e))

        threading.Thread(target=compute, daemon=True).start()
        return run

    def current_run(self, fid: str) -> Optional[RecommendationRun]:
        with self._lock:
            return self.runs.get(fid)


def _deliver(run: RecommendationRun, name: str, rec: Recommendation) -> None:
    vises = []
    for rank, vis in enumerate(rec.vises):
        vis_id = f"{name}-{rank}"
        doc_bytes = serialize_spec_doc(to_spec_doc(vis))
        run.vis_docs[vis_id] = doc_bytes
        vises.append(
            {
                "id": vis_id,
                "score": vis.score,
                "approximate": vis.approximate,
                "spec": to_spec_doc(vis),
            }
        )
    run.push(
        "recommendation",
        {
            "action": name,
            "note": rec.note,
            "truncated": rec.truncated_to_k,
            "vises": vises,
        },
    )


class SessionStore:
    """All live sessions plus a global frame-id index."""

    def __init__(self, config: Optional[EngineConfig] = None, frame_cap: int = DEFAULT_FRAME_CAP):
        self.config = config or EngineConfig()
        self.frame_cap = frame_cap
        self.sessions: dict[str, Session] = {}
        self._frame_index: dict[str, str] = {}
        self._lock = threading.Lock()

    def create_session(self) -> Session:
        session = Session(Engine(self.config), self.frame_cap)
        with self._lock:
            self.sessions[session.id] = session
        return session

    def get_session(self, sid: str) -> Optional[Session]:
        return self.sessions.get(sid)

    def register_frame(self, session: Session, frame: Frame) -> str:
        fid = session.add_frame(frame)
        with self._lock:
            self._frame_index[fid] = session.id
        return fid

    def locate_frame(self, fid: str) -> tuple[Optional[Session], Optional[Frame]]:
        sid = self._frame_index.get(fid)
        if sid is None:
            return None, None
        session = self.sessions.get(sid)
        if session is None:
            return None, None
        return session, session.get_frame(fid)
