"""Wall-clock instrumentation of pipeline stages."""
from __future__ import annotations

import threading
import time
from collections import defaultdict
from contextlib import contextmanager

STAGES = ("alignment", "fit", "predict")


class StageTimer:
    """Accumulates wall-clock seconds and call counts per named stage.

    Safe to share between threads.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._seconds = defaultdict(float)
        self._calls = defaultdict(int)

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            with self._lock:
                self._seconds[name] += elapsed
                self._calls[name] += 1

    def seconds(self, name: str) -> float:
        return self._seconds.get(name, 0.0)

    def calls(self, name: str) -> int:
        return self._calls.get(name, 0)

    def merge(self, other: "StageTimer") -> None:
        with self._lock:
            for k, v in other._seconds.items():
                self._seconds[k] += v
            for k, v in other._calls.items():
                self._calls[k] += v

    def as_dict(self) -> dict:
        return {k: {"seconds": self._seconds[k], "calls": self._calls[k]} for k in sorted(self._seconds)}


def time_reference_estimators(covs, repeats: int = 3, tol: float = 1e-9, timer: StageTimer | None = None) -> dict:
    """Time arithmetic-mean and Riemannian-mean reference construction on one set.

    Each estimator runs ``repeats`` times and the fastest run is kept, which
    is the usual way to suppress scheduler noise. Returns a dict with the two
    best times in seconds and their ratio ``riemannian / euclidean``.
    """
    from ..alignment import reference_from_covariances

    timer = timer or StageTimer()
    best = {}
    for kind, label in (("EI", "reference/euclidean"), ("RI", "reference/riemannian")):
        runs = []
        for _ in range(repeats):
            probe = StageTimer()
            with probe.stage(label):
                reference_from_covariances(covs, kind, tol=tol)
            runs.append(probe.seconds(label))
            timer.merge(probe)
        best[label] = min(runs)
    e, r = best["reference/euclidean"], best["reference/riemannian"]
    return {"euclidean_seconds": e, "riemannian_seconds": r, "speedup": r / e if e > 0 else float("inf")}
