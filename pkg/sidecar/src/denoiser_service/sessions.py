"""Session bookkeeping: one reverse trajectory per session, with the seed and
timestep table pinned by the first request that names the session."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from .wire import WireError


@dataclass
class Session:
    session_id: str
    seed: int
    steps: int = 0  # pinned by the first stepped request
    calls: int = field(default=0)

    def check(self, seed: int, steps: int | None = None) -> None:
        if seed != self.seed:
            raise WireError(
                "BackendShapeMismatch",
                f"session {self.session_id}: seed changed mid-session ({self.seed} -> {seed})",
            )
        if steps is not None and steps > 0:
            if self.steps == 0:
                self.steps = steps
            elif steps != self.steps:
                raise WireError(
                    "BackendShapeMismatch",
                    f"session {self.session_id}: step table changed mid-session "
                    f"({self.steps} -> {steps})",
                )
        self.calls += 1


class SessionStore:
    def __init__(self, limit: int = 256):
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self._limit = limit

    def touch(self, session_id: str, seed: int, steps: int | None = None) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                if len(self._sessions) >= self._limit:
                    oldest = next(iter(self._sessions))
                    del self._sessions[oldest]
                session = Session(session_id=session_id, seed=seed)
                self._sessions[session_id] = session
            session.check(seed, steps)
            return session
