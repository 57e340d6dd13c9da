"""Shared numerical engine.

Explicit Dormand-Prince 5(4) stepping with cubic-Hermite dense output and
event location, delay integration by the method of steps, bracketing root
solving, scalar maximisation, and adaptive quadrature on finite or
semi-infinite domains.  Everything here is deterministic: fixed inputs give
bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import (
    BracketError,
    DivergenceError,
    FieldEvaluationError,
    PreconditionError,
    QuadratureError,
)

__all__ = [
    "Grid",
    "Event",
    "EventSpec",
    "Trajectory",
    "DdeTrajectory",
    "Lag",
    "integrate_ode",
    "integrate_dde",
    "find_root",
    "maximize_scalar",
    "quad_adaptive",
    "cubic_real_roots",
]

_EVENT_TIME_TOL = 1e-12  # absolute bisection tolerance for event times


@dataclass(frozen=True)
class Grid:
    """Uniform grid t0 + k*dt for k in [0, n)."""

    t0: float
    dt: float
    n: int

    def __post_init__(self):
        if not self.dt > 0:
            raise PreconditionError(f"grid step must be positive, got {self.dt}")
        if self.n < 2:
            raise PreconditionError(f"grid needs at least 2 nodes, got {self.n}")

    @property
    def t_end(self) -> float:
        return self.t0 + (self.n - 1) * self.dt

    def nodes(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)


@dataclass(frozen=True)
class Event:
    kind: str  # "level-crossing" | "derivative-sign-change"
    time: float
    direction: str  # "up" | "down"


@dataclass(frozen=True)
class EventSpec:
    """What to watch for during integration.

    kind "level-crossing" fires when component `index` crosses `level`;
    kind "derivative-sign-change" fires when the field component `index`
    changes sign (a local extremum of that component).  `direction` filters
    to "up" (- to +), "down", or "any".  A terminal event stops the
    integration at the refined event time.
    """

    kind: str
    index: int = 0
    level: float = 0.0
    direction: str = "any"
    terminal: bool = False
    fn: Callable[[float, np.ndarray], float] | None = None  # custom scalar g(t, y)

    def gauge(self, field_fn) -> Callable[[float, np.ndarray], float]:
        if self.fn is not None:
            return self.fn
        if self.kind == "level-crossing":
            idx, lvl = self.index, self.level
            return lambda t, y: y[idx] - lvl
        if self.kind == "derivative-sign-change":
            idx = self.index
            return lambda t, y: field_fn(t, y)[idx]
        raise PreconditionError(f"unknown event kind {self.kind!r}")


class Lag(NamedTuple):
    """Lagged state y(t - tau) and its derivative."""

    value: np.ndarray
    slope: np.ndarray


def _hermite(t, t0, t1, y0, y1, f0, f1):
    h = t1 - t0
    th = (t - t0) / h
    th2 = th * th
    th3 = th2 * th
    return (
        (2 * th3 - 3 * th2 + 1) * y0
        + (th3 - 2 * th2 + th) * h * f0
        + (-2 * th3 + 3 * th2) * y1
        + (th3 - th2) * h * f1
    )


def _hermite_deriv(t, t0, t1, y0, y1, f0, f1):
    h = t1 - t0
    th = (t - t0) / h
    th2 = th * th
    return (
        (6 * th2 - 6 * th) * (y0 - y1) / h
        + (3 * th2 - 4 * th + 1) * f0
        + (3 * th2 - 2 * th) * f1
    )


class Trajectory:
    """Dense output of one integration: exact at accepted nodes, cubic
    Hermite in between."""

    def __init__(self, ts: np.ndarray, ys: np.ndarray, fs: np.ndarray):
        self.ts = ts
        self.ys = ys
        self.fs = fs

    @property
    def t0(self) -> float:
        return float(self.ts[0])

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    def _segment(self, t: float) -> int:
        i = int(np.searchsorted(self.ts, t, side="right") - 1)
        return min(max(i, 0), len(self.ts) - 2)

    def __call__(self, t: float) -> np.ndarray:
        if t <= self.ts[0]:
            return self.ys[0].copy()
        if t >= self.ts[-1]:
            return self.ys[-1].copy()
        i = self._segment(t)
        if t == self.ts[i]:
            return self.ys[i].copy()
        return _hermite(t, self.ts[i], self.ts[i + 1], self.ys[i], self.ys[i + 1],
                        self.fs[i], self.fs[i + 1])

    def derivative(self, t: float) -> np.ndarray:
        i = self._segment(min(max(t, self.ts[0]), self.ts[-1]))
        return _hermite_deriv(min(max(t, self.ts[0]), self.ts[-1]),
                              self.ts[i], self.ts[i + 1], self.ys[i], self.ys[i + 1],
                              self.fs[i], self.fs[i + 1])

    def sample(self, ts: Sequence[float]) -> np.ndarray:
        return np.array([self(t) for t in ts])


# Dormand-Prince 5(4) tableau; the 5th-order result propagates (FSAL).
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_DP_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _check_tol(tol: float) -> None:
    if not (1e-13 < tol < 1e-2):
        raise PreconditionError(f"tol must lie in (1e-13, 1e-2), got {tol}")


def _eval_field(field_fn, t, y):
    f = np.asarray(field_fn(t, y), dtype=float)
    if not np.all(np.isfinite(f)):
        raise FieldEvaluationError(f"field returned non-finite value at t={t}")
    return f


def _refine_event(gauge, traj_eval, lo, hi, glo, ghi):
    """Bisect a sign change of gauge(t, y(t)) down to _EVENT_TIME_TOL."""
    for _ in range(200):
        if hi - lo <= _EVENT_TIME_TOL * max(1.0, abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        gm = gauge(mid, traj_eval(mid))
        if gm == 0.0:
            return mid
        if (glo < 0) != (gm < 0):
            hi, ghi = mid, gm
        else:
            lo, glo = mid, gm
    return 0.5 * (lo + hi)


def integrate_ode(
    field,
    state0,
    span,
    tol: float = 1e-8,
    events: Sequence[EventSpec] = (),
    max_step: float = math.inf,
    max_steps: int = 1_000_000,
):
    """Integrate y' = field(t, y) over span with adaptive 5(4) stepping.

    Returns (trajectory, events) where trajectory is dense output and events
    are the refined, time-sorted crossings requested by `events`.  A terminal
    event truncates the trajectory at the event time.
    """
    _check_tol(tol)
    t0, t1 = float(span[0]), float(span[1])
    if not t1 > t0:
        raise PreconditionError("span must be increasing")

    y = np.atleast_1d(np.asarray(state0, dtype=float)).copy()
    f = _eval_field(field, t0, y)

    rtol = tol
    atol = tol * 1e-3

    # initial step from the scaled size of y and f
    sc = atol + rtol * np.abs(y)
    d0 = float(np.sqrt(np.mean((y / sc) ** 2)))
    d1 = float(np.sqrt(np.mean((f / sc) ** 2)))
    h = 0.01 * d0 / d1 if (d0 > 1e-5 and d1 > 1e-5) else 1e-6
    h = min(h, t1 - t0, max_step)

    gauges = [ev.gauge(lambda tt, yy: _eval_field(field, tt, yy)) for ev in events]

    ts = [t0]
    ys = [y.copy()]
    fs = [f.copy()]
    found: list[tuple[float, Event, int]] = []
    g_prev = [g(t0, y) for g in gauges]

    t = t0
    stop = False
    steps = 0
    k = [np.zeros_like(y) for _ in range(7)]
    while t < t1 and not stop:
        steps += 1
        if steps > max_steps:
            raise DivergenceError("step budget exhausted", time=t, state=y.copy())
        h = min(h, t1 - t, max_step)
        if h < 16 * np.finfo(float).eps * max(1.0, abs(t)):
            raise DivergenceError("step size underflow", time=t, state=y.copy())

        k[0] = f
        for i in range(1, 6):
            yi = y + h * sum(a * k[j] for j, a in enumerate(_DP_A[i]))
            k[i] = _eval_field(field, t + _DP_C[i] * h, yi)
        y_new = y + h * sum(b * k[j] for j, b in enumerate(_DP_B))
        f_new = _eval_field(field, t + h, y_new)
        k[6] = f_new
        err_vec = h * sum(e * k[j] for j, e in enumerate(_DP_E))
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / sc) ** 2)))

        if err > 1.0:
            h *= max(0.2, 0.9 * err ** (-0.2))
            continue

        t_new = t + h
        # event scan on the accepted step
        traj_eval = lambda tt: _hermite(tt, t, t_new, y, y_new, f, f_new)
        first_terminal: float | None = None
        for idx, (ev, g) in enumerate(zip(events, gauges)):
            g0 = g_prev[idx]
            g1 = g(t_new, y_new)
            if g0 == 0.0 or (g0 < 0) == (g1 < 0):
                g_prev[idx] = g1
                continue
            direction = "up" if g0 < 0 else "down"
            g_prev[idx] = g1
            if ev.direction != "any" and ev.direction != direction:
                continue
            te = _refine_event(g, traj_eval, t, t_new, g0, g1)
            found.append((te, Event(ev.kind, te, direction), idx))
            if ev.terminal:
                first_terminal = te if first_terminal is None else min(first_terminal, te)

        if first_terminal is not None:
            # truncate the step at the earliest terminal event
            te = first_terminal
            y_new = traj_eval(te)
            f_new = _eval_field(field, te, y_new)
            t_new = te
            found = [rec for rec in found if rec[0] <= te + _EVENT_TIME_TOL]
            stop = True

        t, y, f = t_new, y_new, f_new
        ts.append(t)
        ys.append(y.copy())
        fs.append(f.copy())
        if not stop:
            h *= min(5.0, max(0.2, 0.9 * (err + 1e-16) ** (-0.2)))

    traj = Trajectory(np.array(ts), np.array(ys), np.array(fs))
    found.sort(key=lambda rec: rec[0])
    return traj, [rec[1] for rec in found]


class DdeTrajectory:
    """Piecewise dense output of a delay integration, including the history
    segment to the left of the start time."""

    def __init__(self, t_start, history, history_deriv, segments):
        self.t_start = t_start
        self.history = history
        self.history_deriv = history_deriv
        self.segments: list[Trajectory] = segments

    @property
    def t_end(self) -> float:
        return self.segments[-1].t_end if self.segments else self.t_start

    def _locate(self, t: float) -> Trajectory:
        for seg in self.segments:
            if t <= seg.t_end:
                return seg
        return self.segments[-1]

    def __call__(self, t: float) -> np.ndarray:
        if t <= self.t_start:
            return np.atleast_1d(np.asarray(self.history(t), dtype=float))
        return self._locate(t)(t)

    def derivative(self, t: float) -> np.ndarray:
        if t <= self.t_start:
            return np.atleast_1d(np.asarray(self.history_deriv(t), dtype=float))
        return self._locate(t).derivative(t)

    def sample(self, ts: Sequence[float]) -> np.ndarray:
        return np.array([self(t) for t in ts])


def integrate_dde(
    field,
    tau: float,
    history,
    span,
    tol: float = 1e-8,
    events: Sequence[EventSpec] = (),
    history_deriv=None,
    prior: DdeTrajectory | None = None,
    max_steps: int = 1_000_000,
):
    """Method-of-steps integration of y'(t) = field(t, y(t), lag) with a
    single constant lag tau.

    `field` receives `lag = Lag(value, slope)` holding y(t - tau) and its
    derivative read from the stored dense output (or the history for
    t - tau below the start).  Pass `prior` to continue a previous delay
    integration: its dense output then serves as history.

    Steps are aligned to the first few multiples of the lag, where the
    propagated kinks live.  Steps longer than the lag are allowed: the lag
    then reaches into the step being built and is resolved by fixed-point
    sweeps on the provisional Hermite interpolant (the sweep contracts at
    rate O(h * d(field)/d(lag))), so tiny lags do not force tiny steps.
    """
    if not tau > 0:
        raise PreconditionError(f"lag must be positive, got {tau}")
    _check_tol(tol)
    t0, t1 = float(span[0]), float(span[1])
    if not t1 > t0:
        raise PreconditionError("span must be increasing")

    if prior is not None:
        hist = prior
        hist_d = prior.derivative
    else:
        hist = lambda t: np.atleast_1d(np.asarray(history(t), dtype=float))
        if history_deriv is not None:
            hist_d = lambda t: np.atleast_1d(np.asarray(history_deriv(t), dtype=float))
        else:
            eps = 1e-6 * max(1.0, tau)
            hist_d = lambda t: (hist(t) - hist(t - eps)) / eps

    ts = [t0]
    y0 = hist(t0).astype(float).copy()
    ys = [y0]

    def _locate(s: float) -> int:
        # lag queries trail the live end by at most the lag: scan backward
        i = len(ts) - 2
        while i > 0 and ts[i] > s:
            i -= 1
        return i

    def read(s: float) -> np.ndarray:
        if s <= t0:
            return hist(s)
        if len(ts) == 1 or s >= ts[-1]:
            return ys[-1].copy()
        i = _locate(s)
        return _hermite(s, ts[i], ts[i + 1], ys[i], ys[i + 1], fs[i], fs[i + 1])

    def read_d(s: float) -> np.ndarray:
        if s <= t0:
            return hist_d(s)
        if len(ts) == 1 or s >= ts[-1]:
            return fs[-1].copy()
        i = _locate(s)
        return _hermite_deriv(s, ts[i], ts[i + 1], ys[i], ys[i + 1], fs[i], fs[i + 1])

    def committed_field(t: float, y: np.ndarray) -> np.ndarray:
        s = t - tau
        return np.asarray(field(t, y, Lag(read(s), read_d(s))), dtype=float)

    f0 = _eval_field(committed_field, t0, y0)
    fs = [f0]

    rtol = tol
    atol = tol * 1e-3

    # kinks propagate from the start of the very first delay run; after a few
    # lag multiples the solution is smooth enough for free stepping
    base = prior.t_start if prior is not None else t0
    k0 = max(0, math.ceil((t0 - base) / tau - 1e-9))
    breakpoints = [base + k * tau for k in range(k0, k0 + 8) if base + k * tau > t0 + 1e-14]

    gauges = [ev.gauge(committed_field) for ev in events]
    g_prev = [g(t0, y0) for g in gauges]
    found: list[tuple[float, Event, int]] = []

    t, y, f = t0, y0, f0
    h = min(0.1 * tau, t1 - t0)
    stop = False
    steps = 0
    while t < t1 and not stop:
        steps += 1
        if steps > max_steps:
            raise DivergenceError("step budget exhausted", time=t, state=y.copy())
        h = min(h, t1 - t)
        for bp in breakpoints:
            if t < bp - 1e-14 and t + h > bp:
                h = bp - t
                break
        if h < 16 * np.finfo(float).eps * max(1.0, abs(t)):
            raise DivergenceError("step size underflow", time=t, state=y.copy())

        t_new = t + h
        overlap = (t_new - tau) > t - 1e-14

        # provisional end state for the overlap sweeps: Euler predictor
        y_prov = y + h * f
        f_prov = f.copy()
        y_new = y_prov
        f_new = f_prov
        err = math.inf
        converged = not overlap
        sweeps = 8 if overlap else 1
        for sweep in range(sweeps):
            def step_field(tt: float, yy: np.ndarray) -> np.ndarray:
                s = tt - tau
                if s <= t + 1e-14:
                    lag = Lag(read(s), read_d(s))
                else:
                    lag = Lag(
                        _hermite(s, t, t_new, y, y_prov, f, f_prov),
                        _hermite_deriv(s, t, t_new, y, y_prov, f, f_prov),
                    )
                return np.asarray(field(tt, yy, lag), dtype=float)

            k = [f]
            for i in range(1, 6):
                yi = y + h * sum(a * k[j] for j, a in enumerate(_DP_A[i]))
                k.append(_eval_field(step_field, t + _DP_C[i] * h, yi))
            y_new = y + h * sum(b * k[j] for j, b in enumerate(_DP_B))
            f_new = _eval_field(step_field, t_new, y_new)
            k.append(f_new)
            err_vec = h * sum(e * k[j] for j, e in enumerate(_DP_E))
            sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.sqrt(np.mean((err_vec / sc) ** 2)))
            if overlap:
                drift = float(np.max(np.abs(y_new - y_prov) / sc))
                y_prov, f_prov = y_new, f_new
                if drift < 0.05:
                    converged = True
                    break
            else:
                converged = True

        if not converged or err > 1.0:
            h *= 0.5 if not converged else max(0.2, 0.9 * err ** (-0.2))
            continue

        ts.append(t_new)
        ys.append(y_new.copy())
        fs.append(f_new.copy())

        # event scan against the committed interpolant
        i_seg = len(ts) - 2
        seg_eval = lambda tt: _hermite(tt, ts[i_seg], ts[i_seg + 1], ys[i_seg],
                                       ys[i_seg + 1], fs[i_seg], fs[i_seg + 1])
        first_terminal: float | None = None
        for idx, (ev, g) in enumerate(zip(events, gauges)):
            g0 = g_prev[idx]
            g1 = g(t_new, y_new)
            if g0 == 0.0 or (g0 < 0) == (g1 < 0):
                g_prev[idx] = g1
                continue
            direction = "up" if g0 < 0 else "down"
            g_prev[idx] = g1
            if ev.direction != "any" and ev.direction != direction:
                continue
            te = _refine_event(g, seg_eval, t, t_new, g0, g1)
            found.append((te, Event(ev.kind, te, direction), idx))
            if ev.terminal:
                first_terminal = te if first_terminal is None else min(first_terminal, te)

        if first_terminal is not None:
            te = first_terminal
            y_te = seg_eval(te)
            ts[-1] = te
            ys[-1] = y_te.copy()
            fs[-1] = _eval_field(committed_field, te, y_te)
            found = [rec for rec in found if rec[0] <= te + _EVENT_TIME_TOL]
            stop = True

        t, y, f = ts[-1], ys[-1], fs[-1]
        if not stop:
            h *= min(5.0, max(0.2, 0.9 * (err + 1e-16) ** (-0.2)))

    traj = Trajectory(np.array(ts), np.array(ys), np.array(fs))
    composite = DdeTrajectory(t0, hist, hist_d, [traj])
    found.sort(key=lambda rec: rec[0])
    return composite, [rec[1] for rec in found]


def find_root(f, bracket, tol: float = 1e-12) -> float:
    """Bisection root of a continuous sign-changing f on bracket."""
    a, b = float(bracket[0]), float(bracket[1])
    if not b > a:
        raise PreconditionError("bracket must be increasing")
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa < 0) == (fb < 0):
        raise BracketError(f"no sign change on [{a}, {b}]: f={fa:.3g}, {fb:.3g}")
    for _ in range(400):
        if b - a <= tol:
            break
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fa < 0) != (fm < 0):
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def maximize_scalar(f, interval, tol: float = 1e-9, scan_points: int = 64):
    """Golden-section maximisation seeded by a uniform scan.

    Returns (argmax, max).  The returned max is never below any scanned
    value; argmax is within tol of a local maximiser of the refined bracket.
    """
    a, b = float(interval[0]), float(interval[1])
    if not b > a:
        raise PreconditionError("interval must be increasing")
    xs = np.linspace(a, b, scan_points)
    vals = [f(x) for x in xs]
    i_best = int(np.argmax(vals))
    best_x, best_v = float(xs[i_best]), vals[i_best]

    lo = xs[max(i_best - 1, 0)]
    hi = xs[min(i_best + 1, scan_points - 1)]
    x1 = hi - _INV_GOLDEN * (hi - lo)
    x2 = lo + _INV_GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(400):
        if hi - lo <= tol:
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_GOLDEN * (hi - lo)
            f2 = f(x2)
            if f2 > best_v:
                best_x, best_v = x2, f2
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_GOLDEN * (hi - lo)
            f1 = f(x1)
            if f1 > best_v:
                best_x, best_v = x1, f1
    return best_x, best_v


def _adaptive_simpson(f, a, b, tol_abs, budget):
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, fa, 0.5 * (a + b), fm, b, fb, whole, tol_abs, 50, budget)


def _simpson_rec(f, a, fa, m, fm, b, fb, whole, tol_abs, depth, budget):
    if depth <= 0:
        raise QuadratureError("refinement depth exhausted")
    budget[0] -= 2
    if budget[0] <= 0:
        raise QuadratureError("evaluation budget exhausted")
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol_abs:
        return left + right + delta / 15.0
    return (
        _simpson_rec(f, a, fa, lm, flm, m, fm, left, tol_abs / 2, depth - 1, budget)
        + _simpson_rec(f, m, fm, rm, frm, b, fb, right, tol_abs / 2, depth - 1, budget)
    )


def _tail_cutoff(f, anchor: float, sign: float, rel_floor: float) -> float:
    """Walk a geometric node ladder away from `anchor` until the integrand
    stays below rel_floor of its observed peak at two consecutive nodes."""
    probes = [anchor + sign * (2.0 ** k) * 2.0 ** -6 for k in range(0, 70)]
    mags = [abs(f(p)) for p in probes]
    peak = max(mags)
    if peak == 0.0:
        return probes[8]
    i_peak = int(np.argmax(mags))
    floor = rel_floor * peak
    for i in range(i_peak + 1, len(mags) - 1):
        if mags[i] < floor and mags[i + 1] < floor:
            return probes[i + 1]
    raise QuadratureError("integrand tail does not fall below truncation floor")


def quad_adaptive(f, domain, tol: float = 1e-10) -> float:
    """Adaptive Simpson quadrature with |error| <= tol*(1 + |value|).

    Semi-infinite ends are truncated where the integrand drops below
    tol*1e-3 of its peak along a geometric node ladder (exponential tails
    assumed).
    """
    a, b = float(domain[0]), float(domain[1])
    if math.isinf(a) and math.isinf(b):
        return quad_adaptive(f, (a, 0.0), tol) + quad_adaptive(f, (0.0, b), tol)
    if math.isinf(b):
        b = _tail_cutoff(f, a, +1.0, tol * 1e-3)
    elif math.isinf(a):
        a = _tail_cutoff(f, b, -1.0, tol * 1e-3)
    if not b > a:
        raise PreconditionError("empty quadrature domain")

    # rough magnitude from a coarse scan fixes the absolute budget
    xs = np.linspace(a, b, 17)
    rough = float(np.trapezoid([f(x) for x in xs], xs))
    tol_abs = tol * (1.0 + abs(rough))

    budget = [400_000]
    panels = np.linspace(a, b, 9)
    total = 0.0
    for lo, hi in zip(panels[:-1], panels[1:]):
        total += _adaptive_simpson(f, lo, hi, tol_abs / 8.0, budget)
    return total


def cubic_real_roots(c3: float, c2: float, c1: float, c0: float) -> list[float]:
    """Real roots of c3 x^3 + c2 x^2 + c1 x + c0, ascending.

    Closed form (trigonometric/Cardano); degenerates gracefully to the
    quadratic and linear cases.
    """
    if abs(c3) < 1e-300:
        if abs(c2) < 1e-300:
            if abs(c1) < 1e-300:
                return []
            return [-c0 / c1]
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc < 0:
            return []
        r = math.sqrt(disc)
        return sorted([(-c1 - r) / (2 * c2), (-c1 + r) / (2 * c2)])

    a = c2 / c3
    b = c1 / c3
    c = c0 / c3
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    shift = -a / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0:
        s = math.sqrt(disc)
        u = math.copysign(abs(-q / 2.0 + s) ** (1.0 / 3.0), -q / 2.0 + s)
        v = math.copysign(abs(-q / 2.0 - s) ** (1.0 / 3.0), -q / 2.0 - s)
        return [u + v + shift]
    if p == 0.0:  # triple root
        return [shift]
    m = 2.0 * math.sqrt(-p / 3.0)
    arg = max(-1.0, min(1.0, 3.0 * q / (p * m)))
    theta = math.acos(arg) / 3.0
    return sorted(m * math.cos(theta - 2.0 * math.pi * k / 3.0) + shift for k in range(3))
