"""Contingent claims and the success-ratio diagnostic."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class ClaimSpec:
    kind: Literal["european_call", "barrier_up_out_call", "zero"]
    strike: float = 100.0
    barrier: float | None = None

    def __post_init__(self):
        if self.kind not in ("european_call", "barrier_up_out_call", "zero"):
            raise ConfigError(f"unknown claim kind {self.kind!r}")
        if self.kind != "zero" and not self.strike > 0:
            raise ConfigError(f"strike must be positive, got {self.strike}")
        if self.kind == "barrier_up_out_call":
            if self.barrier is None or not self.strike < self.barrier:
                raise ConfigError(f"barrier claim needs K < U, got K={self.strike}, U={self.barrier}")

    @property
    def path_dependent(self) -> bool:
        return self.kind == "barrier_up_out_call"


def payoff(claim: ClaimSpec, paths) -> np.ndarray | float:
    """Payoff of ``claim`` on one path ``(X_0..X_T)`` or on a batch of paths.

    Accepts a 1-d sequence, an ``(n, T + 1)`` array, or an ``(n, T + 1, 1)``
    array (the :class:`PathBatch` layout). The barrier knocks out as soon as
    any ``X_t >= U`` for ``t`` in ``0..T``.
    """
    x = np.asarray(paths, dtype=float)
    single = x.ndim == 1
    if x.ndim == 3:
        x = x[..., 0]
    x = np.atleast_2d(x)
    if claim.kind == "zero":
        out = np.zeros(x.shape[0])
    else:
        out = np.maximum(x[:, -1] - claim.strike, 0.0)
        if claim.kind == "barrier_up_out_call":
            out = np.where(np.all(x < claim.barrier, axis=1), out, 0.0)
    return float(out[0]) if single else out


def success_ratio(v_T, h):
    """``1`` on the success set ``{v_T >= h}``, ``v_T / h`` elsewhere."""
    v = np.asarray(v_T, dtype=float)
    hh = np.asarray(h, dtype=float)
    if np.any(v < 0):
        raise ValueError("terminal value must be non-negative for an admissible strategy")
    if np.any(hh < 0):
        raise ValueError("claim value must be non-negative")
    ok = v >= hh
    ratio = np.where(ok, 1.0, v / np.where(ok, 1.0, hh))
    return float(ratio) if ratio.ndim == 0 else ratio
