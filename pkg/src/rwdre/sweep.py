"""Parameter-grid sweeps with deterministic parallel execution.

Each grid point gets its own master seed keyed by (sweep seed, SWEEP,
grid indices), so the result rows are identical whatever the worker
count or completion order.  Volatile data (timestamps, wall times) live
only in the manifest, outside the determinism hash.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import __version__
from . import randomness as rnd
from .estimators import estimate_speed
from .params import ConfigError, ModelParams

_AXES = ("rho", "p_circ", "p_bullet", "q0")


@dataclass(frozen=True)
class SweepConfig:
    """Grid axes plus the estimator settings applied at every point."""

    rho: tuple[float, ...] = (0.0,)
    p_circ: tuple[float, ...] = (0.75,)
    p_bullet: tuple[float, ...] = (0.25,)
    q0: tuple[float, ...] = (0.0,)
    n: int = 1000
    replicas: int = 200
    confidence: float = 0.95
    master_seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.n < 1 or self.replicas < 1:
            raise ConfigError("n and replicas must be >= 1")
        if not 0.0 < self.confidence < 1.0:
            raise ConfigError("confidence must be in (0, 1)")
        for point in self.grid():
            ModelParams(*point)  # range checks before any work

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown sweep config keys: {sorted(unknown)}")
        kw = dict(d)
        for axis in _AXES:
            if axis in kw:
                kw[axis] = tuple(float(v) for v in kw[axis])
        return cls(**kw)

    def grid(self) -> list[tuple[float, float, float, float]]:
        """All (rho, p_circ, p_bullet, q0) points, in fixed index order."""
        return list(itertools.product(self.rho, self.p_circ,
                                      self.p_bullet, self.q0))

    def to_dict(self) -> dict:
        return {"rho": list(self.rho), "p_circ": list(self.p_circ),
                "p_bullet": list(self.p_bullet), "q0": list(self.q0),
                "n": self.n, "replicas": self.replicas,
                "confidence": self.confidence, "master_seed": self.master_seed,
                "out": self.out}


@dataclass(frozen=True)
class SweepRow:
    index: int
    rho: float
    p_circ: float
    p_bullet: float
    q0: float
    v_hat: float
    ci_lo: float
    ci_hi: float
    phase: str
    replicas: int
    n: int

    def to_dict(self) -> dict:
        return {"index": self.index, "rho": self.rho, "p_circ": self.p_circ,
                "p_bullet": self.p_bullet, "q0": self.q0, "v_hat": self.v_hat,
                "ci_lo": self.ci_lo, "ci_hi": self.ci_hi, "phase": self.phase,
                "replicas": self.replicas, "n": self.n}


def classify_phase(ci_lo: float, ci_hi: float) -> str:
    """Figure-style label from the interval sign: positive, negative, else
    inconclusive."""
    if ci_lo > 0.0:
        return "positive"
    if ci_hi < 0.0:
        return "negative"
    return "inconclusive"


def _row_line(row: SweepRow) -> str:
    return json.dumps(row.to_dict(), sort_keys=True, separators=(",", ":"))


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list[SweepRow]
    manifest: dict = field(default_factory=dict)

    def determinism_hash(self) -> str:
        """sha256 of the canonical row lines; stable across worker counts."""
        payload = "\n".join(_row_line(r) for r in self.rows)
        return hashlib.sha256(payload.encode()).hexdigest()

    def jsonl(self) -> str:
        return "".join(_row_line(r) + "\n" for r in self.rows)

    def csv(self) -> str:
        lines = ["rho,p_circ,p_bullet,q0,v_hat,ci_lo,ci_hi,phase,replicas"]
        for r in self.rows:
            lines.append(f"{r.rho},{r.p_circ},{r.p_bullet},{r.q0},"
                         f"{r.v_hat},{r.ci_lo},{r.ci_hi},{r.phase},{r.replicas}")
        return "\n".join(lines) + "\n"

    def save(self, base: str, *, csv: bool = False) -> list[str]:
        """Write <base>.jsonl and <base>.manifest.json (and optionally
        <base>.csv); returns the paths written."""
        paths = [base + ".jsonl", base + ".manifest.json"]
        with open(paths[0], "w") as fh:
            fh.write(self.jsonl())
        with open(paths[1], "w") as fh:
            json.dump(self.manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        if csv:
            paths.append(base + ".csv")
            with open(paths[2], "w") as fh:
                fh.write(self.csv())
        return paths


def point_seed(master_seed: int, indices: tuple[int, int, int, int]) -> int:
    """Master seed for one grid point, keyed by its axis indices."""
    return rnd.derive_seed(master_seed, rnd.SWEEP, *indices)


def _run_point(config: SweepConfig, index: int,
               indices: tuple[int, int, int, int]) -> tuple[SweepRow, float]:
    rho = config.rho[indices[0]]
    p_circ = config.p_circ[indices[1]]
    p_bullet = config.p_bullet[indices[2]]
    q0 = config.q0[indices[3]]
    params = ModelParams(rho, p_circ, p_bullet, q0,
                         seed=point_seed(config.master_seed, indices))
    t0 = time.perf_counter()
    sp = estimate_speed(params, config.n, config.replicas, config.confidence)
    wall = time.perf_counter() - t0
    row = SweepRow(index, rho, p_circ, p_bullet, q0, sp.v_hat,
                   float(sp.ci.lo), float(sp.ci.hi),
                   classify_phase(sp.ci.lo, sp.ci.hi), config.replicas,
                   config.n)
    return row, wall


def run_sweep(config: SweepConfig, workers: int | None = None) -> SweepResult:
    """Estimate the speed at every grid point; rows ordered by grid index.

    ``workers`` > 1 fans points out to processes; the rows (and their
    determinism hash) must not depend on it.
    """
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    index_grid = list(itertools.product(*(range(len(getattr(config, a)))
                                          for a in _AXES)))
    args = [(config, i, idx) for i, idx in enumerate(index_grid)]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_point_star, args))
    else:
        outcomes = [_run_point(*a) for a in args]
    rows = [row for row, _ in outcomes]
    result = SweepResult(config, rows)
    result.manifest = {
        "artifact_version": __version__,
        "config": config.to_dict(),
        "rows": len(rows),
        "rows_sha256": result.determinism_hash(),
        "timing": {  # volatile: excluded from the determinism hash
            "created_utc": started,
            "total_s": time.perf_counter() - t0,
            "per_row_s": [wall for _, wall in outcomes],
        },
    }
    return result


def _run_point_star(args):
    return _run_point(*args)
