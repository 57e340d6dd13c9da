"""Shared wave-profile containers: sampled profiles with shape class, decay
fits and crossing lists, parameter-plane boundary curves, and their CSV/JSON
serialization.  CSV floats use 17 significant digits so re-runs are
byte-identical."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import PreconditionError
from .numerics import Grid

__all__ = [
    "MONOTONE",
    "NON_MONOTONE",
    "OSCILLATING",
    "Profile",
    "RegionCurve",
    "classify_shape",
    "significant_crossings",
    "fit_decay",
    "fmt_float",
    "write_csv",
]

MONOTONE = "monotone"
NON_MONOTONE = "non-monotone-non-oscillating"
OSCILLATING = "oscillating"

OVERSHOOT_EPS = 1e-6  # relative excursion above 1 that counts as genuine


def fmt_float(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(float(x), ".17g")


def write_csv(path: Path | str, header: Sequence[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_float(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def significant_crossings(ts, values, crossings, level: float = 1.0,
                          eps: float = OVERSHOOT_EPS) -> list[float]:
    """Filter crossing times: between consecutive crossings (and after the
    last) the excursion away from `level` must exceed eps, otherwise the pair
    is integrator noise around the level."""
    if len(crossings) == 0:
        return []
    ts = np.asarray(ts)
    values = np.asarray(values)
    kept = []
    bounds = list(crossings) + [ts[-1]]
    for i, tc in enumerate(crossings):
        seg = (ts > tc) & (ts <= bounds[i + 1])
        if not np.any(seg):
            continue
        if np.max(np.abs(values[seg] - level)) > eps:
            kept.append(float(tc))
    return kept


def classify_shape(ts, values, crossings, level: float = 1.0,
                   eps: float = OVERSHOOT_EPS) -> str:
    """Shape taxonomy of a connection from 0 to the level-1 state.

    monotone: never exceeds the level beyond noise and no significant
    crossing pair; non-monotone-non-oscillating: a genuine excursion above
    the level with at most one significant crossing; oscillating: two or
    more significant crossings.
    """
    sig = significant_crossings(ts, values, crossings, level, eps)
    sup = float(np.max(values))
    if len(sig) >= 2:
        return OSCILLATING
    if sup > level * (1.0 + eps):
        return NON_MONOTONE
    return MONOTONE


def fit_decay(ts, dist, lo: float, hi: float, min_decades: float = 2.0):
    """Least-squares slope of log(dist) over the final stretch where dist
    lies in [lo, hi] and decreases monotonically toward the end.

    Returns (slope, ok).  ok is False when the window spans fewer than
    `min_decades` decades or has fewer than 8 samples.
    """
    ts = np.asarray(ts, dtype=float)
    dist = np.asarray(dist, dtype=float)
    # skip the trailing noise-floor zone, then walk backward over the
    # monotone stretch (small upward jitter allowed)
    live = np.nonzero(dist >= lo)[0]
    if len(live) == 0:
        return 0.0, False
    i_end = int(live[-1])
    i = i_end
    while i > 0 and dist[i - 1] >= dist[i] * (1.0 - 1e-3):
        i -= 1
    sel = np.arange(i, i_end + 1)
    sel = sel[(dist[sel] >= lo) & (dist[sel] <= hi) & (dist[sel] > 0)]
    if len(sel) < 8:
        return 0.0, False
    span = math.log10(dist[sel].max() / dist[sel].min())
    t = ts[sel]
    y = np.log(dist[sel])
    slope = float(np.polyfit(t, y, 1)[0])
    return slope, span >= min_decades


def _growth_fit(ts, values, amplitude: float):
    """Decay rate toward 0 at the left end, fitted on the rising stretch."""
    v = np.asarray(values)
    sel = (v > 5.0 * amplitude) & (v < 5e-3)
    if np.count_nonzero(sel) < 8:
        return None
    t = np.asarray(ts)[sel]
    y = np.log(v[sel])
    span = math.log10(v[sel].max() / v[sel].min())
    if span < 1.5:
        return None
    return float(np.polyfit(t, y, 1)[0])


@dataclass
class Profile:
    """A travelling-wave (or limit-kinetics) profile on a uniform grid."""

    grid: Grid
    values: np.ndarray
    shape: str
    sup: float
    decay_minus: float | None = None
    decay_plus: float | None = None
    crossings: tuple[float, ...] = ()
    h: float | None = None  # lag window length in profile time units
    flags: tuple[str, ...] = ()

    @property
    def ts(self) -> np.ndarray:
        return self.grid.nodes()

    def __call__(self, t):
        return np.interp(t, self.ts, self.values)

    def shifted(self, dt: float) -> "Profile":
        g = Grid(self.grid.t0 + dt, self.grid.dt, self.grid.n)
        return replace(self, grid=g,
                       crossings=tuple(c + dt for c in self.crossings))

    def align_half(self) -> "Profile":
        """Shift time so the first up-crossing of 1/2 sits at t = 0."""
        ts, vs = self.ts, self.values
        idx = np.nonzero((vs[:-1] < 0.5) & (vs[1:] >= 0.5))[0]
        if len(idx) == 0:
            raise PreconditionError("profile never reaches 1/2; cannot align")
        i = int(idx[0])
        t_half = ts[i] + (0.5 - vs[i]) * self.grid.dt / (vs[i + 1] - vs[i])
        return self.shifted(-t_half)

    def sup_distance(self, other: "Profile") -> float:
        """Sup distance after pinning both profiles at value 1/2."""
        a = self.align_half()
        b = other.align_half()
        lo = max(a.ts[0], b.ts[0])
        hi = min(a.ts[-1], b.ts[-1])
        if hi <= lo:
            raise PreconditionError("profiles do not overlap after alignment")
        ts = np.linspace(lo, hi, 4001)
        return float(np.max(np.abs(a(ts) - b(ts))))

    def to_csv(self, path: Path | str) -> None:
        write_csv(path, ("t", "phi"), zip(self.ts, self.values))

    def sidecar(self) -> dict:
        return {
            "shape": self.shape,
            "sup": self.sup,
            "decay_minus": self.decay_minus,
            "decay_plus": self.decay_plus,
            "crossings": list(self.crossings),
            "h": self.h,
            "flags": list(self.flags),
        }

    def to_json_file(self, path: Path | str) -> None:
        Path(path).write_text(json.dumps(self.sidecar(), sort_keys=True, indent=2) + "\n")


@dataclass
class RegionCurve:
    """A sampled boundary curve (or bundle of curves) over a gamma grid."""

    gamma: np.ndarray
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def header(self) -> list[str]:
        return ["gamma"] + list(self.columns.keys())

    def rows(self):
        cols = [self.gamma] + list(self.columns.values())
        for i in range(len(self.gamma)):
            yield [col[i] for col in cols]

    def to_csv(self, path: Path | str) -> None:
        write_csv(path, self.header(), self.rows())


def build_profile(ts: np.ndarray, values: np.ndarray, *,
                  crossings=(), h=None, flags=(),
                  amplitude: float | None = None,
                  plus_target: float | None = 1.0,
                  plus_window: tuple[float, float] | None = None) -> Profile:
    """Assemble a Profile from uniform samples, fitting both decay exponents.

    `amplitude` is the launch size used for the left-tail fit window;
    `plus_window` the (lo, hi) distance band for the right-tail fit of
    |values - plus_target|.
    """
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    dt = float(ts[1] - ts[0])
    grid = Grid(float(ts[0]), dt, len(ts))

    decay_minus = None
    if amplitude is not None:
        decay_minus = _growth_fit(ts, values, amplitude)

    decay_plus = None
    if plus_target is not None:
        lo, hi = plus_window if plus_window is not None else (1e-8, 1e-3)
        slope, ok = fit_decay(ts, np.abs(values - plus_target), lo, hi)
        if ok:
            decay_plus = slope

    shape = classify_shape(ts, values, crossings)
    sig = tuple(significant_crossings(ts, values, crossings))
    return Profile(
        grid=grid,
        values=values,
        shape=shape,
        sup=float(np.max(values)),
        decay_minus=decay_minus,
        decay_plus=decay_plus,
        crossings=sig,
        h=h,
        flags=tuple(flags),
    )
