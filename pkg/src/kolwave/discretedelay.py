"""Discrete-delay food-limited model: the infinite-speed limit profile, its
finite-speed (slow-manifold) deformation, the closed-form overshoot lower
bound and its parameter region, analytic envelope checks around an anchor
level, and slow-oscillation classification.

The limit kinetics is the scalar delay equation

    phi'(t) = phi(t) * (1 - phi(t - tau)) / (1 + gamma * phi(t - tau)),

whose connection from 0 to 1 is unique up to translation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DivergenceError,
    FieldEvaluationError,
    PreconditionError,
    StiffShootingError,
    UnsupportedError,
)
from .models import GrowthModel
from .numerics import EventSpec, find_root, integrate_dde, maximize_scalar
from .profiles import (
    MONOTONE,
    NON_MONOTONE,
    OSCILLATING,
    OVERSHOOT_EPS,
    Profile,
    RegionCurve,
    build_profile,
    significant_crossings,
)

__all__ = [
    "limit_profile",
    "finite_speed_profile",
    "overshoot_bound",
    "overshoot_region",
    "EnvelopeReport",
    "envelope_margins",
    "OscillationReport",
    "classify_oscillation",
    "crossings_from_samples",
]


def crossings_from_samples(ts, values, level: float = 1.0) -> list[float]:
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    out = []
    for i in range(len(ts) - 1):
        v0, v1 = values[i] - level, values[i + 1] - level
        if v0 == 0.0:
            out.append(float(ts[i]))
        elif (v0 < 0) != (v1 < 0):
            out.append(float(ts[i] - v0 * (ts[i + 1] - ts[i]) / (v1 - v0)))
    return out


def _history_rate(tau: float) -> float:
    """Positive root of r = exp(-r*tau); the launch-history exponent."""
    return find_root(lambda r: r - math.exp(-r * tau), (1e-12, 1.0 + 1e-9), 1e-14)


def _integrate_kinetics(field, tau, history, history_deriv, span_length, tol,
                        cap_eps, level=1.0):
    """Chunked method-of-steps run until the solution settles within cap_eps
    of `level` over a whole chunk, or the span is exhausted."""
    chunk = max(5.0 * tau, 10.0)
    events = [
        EventSpec("level-crossing", index=0, level=level),
        EventSpec("derivative-sign-change", index=0),
    ]
    t_lo = 0.0
    composite = None
    crossings: list[float] = []
    extrema: list[float] = []
    captured = False
    while t_lo < span_length and not captured:
        t_hi = min(t_lo + chunk, span_length)
        composite, evs = integrate_dde(
            field, tau, history, (t_lo, t_hi), tol, events,
            history_deriv=history_deriv, prior=composite,
        )
        for ev in evs:
            if ev.kind == "level-crossing":
                crossings.append(ev.time)
            else:
                extrema.append(ev.time)
        probe = np.linspace(t_lo, composite.t_end, 257)
        if max(abs(float(composite(t)[0]) - level) for t in probe) < cap_eps:
            captured = True
        t_lo = composite.t_end
    return composite, crossings, extrema, captured


def _sample_profile(composite, t_end, tau, crossings, h, flags, amplitude,
                    cap_eps):
    dt = max(t_end / 20000.0, min(tau / 64.0, 0.05))
    n = int(t_end / dt) + 1
    ts = np.linspace(0.0, t_end, n)
    values = np.array([float(composite(t)[0]) for t in ts])
    return build_profile(
        ts, values, crossings=crossings, h=h, flags=flags,
        amplitude=amplitude,
        plus_window=(max(30.0 * cap_eps, 1e-8), 1e-3),
    )


def limit_profile(gamma: float, tau: float, span_length: float = 400.0,
                  tol: float = 1e-10, amplitude: float = 1e-6) -> Profile:
    """Connection from 0 to 1 of the limit kinetics, launched from a small
    exponential history and integrated until capture at 1.

    The profile carries fitted decay exponents at both ends, refined
    level-1 crossing times, and the lag length h = tau for slow-oscillation
    spacing checks.  A run that exhausts the span is flagged
    "unresolved-tail".
    """
    if gamma < 0 or not tau > 0:
        raise PreconditionError("need gamma >= 0 and tau > 0")
    growth = GrowthModel.food_limited(gamma)
    rate = _history_rate(tau)
    cap_eps = max(10.0 * tol, 1e-9)

    def history(t):
        return np.array([amplitude * math.exp(rate * t)])

    def history_deriv(t):
        return np.array([rate * amplitude * math.exp(rate * t)])

    def field(t, y, lag):
        return np.array([y[0] * growth.g(lag.value[0])])

    composite, crossings, _, captured = _integrate_kinetics(
        field, tau, history, history_deriv, span_length, tol, cap_eps)
    flags = () if captured else ("unresolved-tail",)
    return _sample_profile(composite, composite.t_end, tau, crossings, tau,
                           flags, amplitude, cap_eps)


def finite_speed_profile(gamma: float, tau: float, eps: float,
                         span_length: float = 400.0, tol: float = 1e-10,
                         amplitude: float = 1e-6, eps_max: float = 0.2) -> Profile:
    """Finite-speed wave profile of the discrete-delay model, eps = 1/c^2,
    by shooting on the slow manifold of the second-order delayed equation.

    Each derivative evaluation solves the first-order-in-eps slaving
    relation v*(1 - eps*G) = phi*G + eps*phi*G'*v_lag, which matches the
    exact profile equation through O(eps^2); the lagged slope v_lag is read
    from the stored dense output.  At eps = 0 this is the limit kinetics.
    """
    if eps == 0.0:
        return limit_profile(gamma, tau, span_length, tol, amplitude)
    if not (0.0 < eps <= eps_max):
        raise PreconditionError(f"eps must lie in (0, {eps_max}]")
    if gamma < 0 or not tau > 0:
        raise PreconditionError("need gamma >= 0 and tau > 0")
    growth = GrowthModel.food_limited(gamma)
    lam = (1.0 - math.sqrt(1.0 - 4.0 * eps)) / (2.0 * eps)
    cap_eps = max(10.0 * tol, 1e-9)

    def history(t):
        return np.array([amplitude * math.exp(lam * t)])

    def history_deriv(t):
        return np.array([lam * amplitude * math.exp(lam * t)])

    def field(t, y, lag):
        g = growth.g(lag.value[0])
        gp = growth.g_prime(lag.value[0])
        denom = 1.0 - eps * g
        if denom < 0.5:
            raise FieldEvaluationError("slow-manifold slaving lost dominance")
        return np.array([(y[0] * g + eps * y[0] * gp * lag.slope[0]) / denom])

    try:
        composite, crossings, _, captured = _integrate_kinetics(
            field, tau, history, history_deriv, span_length, tol, cap_eps)
    except (DivergenceError, FieldEvaluationError) as exc:
        raise StiffShootingError(
            f"slow-manifold shooting failed at eps={eps}; "
            f"try smaller eps or tighter tol ({exc})") from exc
    flags = () if captured else ("unresolved-tail",)
    return _sample_profile(composite, composite.t_end, tau, crossings, tau,
                           flags, amplitude, cap_eps)


def overshoot_bound(gamma: float, tau: float) -> float:
    """Closed-form lower bound for the maximum of the limit profile:

        max over a in [0, 1] of
        a * exp(tau + (1-a)*tau/(1+gamma*a))
          * ((1+a*gamma)/(1+a*gamma*e^tau))^(1+1/gamma).

    A value above 1 certifies a non-monotone connection.  Exactly 1 at
    tau = 0.  The gamma = 0 limit is not defined and is rejected.
    """
    if gamma <= 0:
        raise UnsupportedError("overshoot bound needs gamma > 0")
    if tau < 0:
        raise PreconditionError("tau must be non-negative")
    e_tau = math.exp(tau)
    expo = 1.0 + 1.0 / gamma

    def maximand(a: float) -> float:
        if a <= 0.0:
            return 0.0
        logv = (
            math.log(a)
            + tau
            + (1.0 - a) * tau / (1.0 + gamma * a)
            + expo * (math.log1p(gamma * a) - math.log1p(gamma * a * e_tau))
        )
        return math.exp(logv)

    _, best = maximize_scalar(maximand, (0.0, 1.0), 1e-12, scan_points=512)
    return best


def overshoot_region(gammas, tol: float = 1e-3) -> RegionCurve:
    """For each gamma, the smallest tau with overshoot bound above 1 (NaN
    when no such tau exists below the real-spectrum edge), together with
    the edge tau_upper = (1+gamma)/e."""
    gammas = np.asarray(list(gammas), dtype=float)
    lower = np.full(len(gammas), math.nan)
    upper = (1.0 + gammas) / math.e
    for i, g in enumerate(gammas):
        hi = upper[i] * (1.0 - 1e-9)
        taus = np.linspace(hi / 64.0, hi, 64)
        prev = 0.0
        for t in taus:
            if overshoot_bound(float(g), float(t)) > 1.0:
                lo_b, hi_b = prev, float(t)
                while hi_b - lo_b > tol:
                    mid = 0.5 * (lo_b + hi_b)
                    if mid <= 0.0 or overshoot_bound(float(g), mid) > 1.0:
                        hi_b = mid
                    else:
                        lo_b = mid
                lower[i] = 0.5 * (lo_b + hi_b)
                break
            prev = float(t)
    return RegionCurve(gamma=gammas, columns={"tau_lower": lower, "tau_upper": upper})


@dataclass(frozen=True)
class EnvelopeReport:
    anchor_time: float
    margin_lower_pre: float   # profile above the pre-anchor lower envelope
    margin_upper_pre: float   # profile below the pre-anchor upper envelope
    margin_lower_post: float  # profile above the post-anchor lower envelope
    passed: bool


def envelope_margins(gamma: float, tau: float, a: float, profile: Profile,
                     tol: float = 1e-6) -> EnvelopeReport:
    """Check the analytic envelopes around the anchor point where the rising
    profile equals `a` (anchor shifted to local time -tau):

      on [-tau, 0]:  a*exp((1-a)(t+tau)/(1+gamma*a)) <= u <= a*exp(t+tau)
      on [0, tau]:   u >= a*e^t*((1+a*gamma)/(1+a*gamma*e^t))^(1+1/gamma)
                          * exp((1-a)*tau/(1+gamma*a))

    Margins are evaluated at the profile's own sample nodes (plus the
    interpolated anchor), so interpolation error cannot masquerade as an
    envelope violation.  The post-anchor lower envelope at t = tau is the
    overshoot-bound maximand at this `a`.
    """
    if not 0.0 < a < 1.0:
        raise PreconditionError("anchor level must lie in (0, 1)")
    ts, vs = profile.ts, profile.values
    above = np.nonzero(vs >= a)[0]
    if len(above) == 0:
        raise PreconditionError("profile never reaches the anchor level")
    i = int(above[0])
    if i == 0:
        raise PreconditionError("profile starts above the anchor level")
    if np.any(np.diff(vs[: i + 1]) < -1e-12):
        raise PreconditionError("profile is not monotone before the anchor")
    t_anchor = ts[i - 1] + (a - vs[i - 1]) * profile.grid.dt / (vs[i] - vs[i - 1])
    if t_anchor + 2.0 * tau > ts[-1]:
        raise PreconditionError("profile too short past the anchor")

    denom = 1.0 + gamma * a
    expo = 1.0 + 1.0 / gamma
    boost = math.exp((1.0 - a) * tau / denom)

    def lower_pre(th):
        return a * np.exp((1.0 - a) * (th + tau) / denom)

    def upper_pre(th):
        return a * np.exp(th + tau)

    def lower_post(th):
        return (a * np.exp(th)
                * ((1.0 + a * gamma) / (1.0 + a * gamma * np.exp(th))) ** expo
                * boost)

    node_sel = (ts > t_anchor) & (ts <= t_anchor + 2.0 * tau)
    th_all = np.concatenate(([-tau], ts[node_sel] - t_anchor - tau))
    u_all = np.concatenate(([a], vs[node_sel]))

    pre = th_all <= 0.0
    post = th_all >= 0.0
    m_low_pre = float(np.min(u_all[pre] - lower_pre(th_all[pre])))
    m_up_pre = float(np.min(upper_pre(th_all[pre]) - u_all[pre]))
    m_low_post = float(np.min(u_all[post] - lower_post(th_all[post])))
    passed = min(m_low_pre, m_up_pre, m_low_post) >= -tol
    return EnvelopeReport(
        anchor_time=float(t_anchor),
        margin_lower_pre=m_low_pre,
        margin_upper_pre=m_up_pre,
        margin_lower_post=m_low_post,
        passed=passed,
    )


@dataclass(frozen=True)
class OscillationReport:
    shape: str
    eventually_monotone: bool
    inconclusive: bool
    crossings: tuple[float, ...]
    spacing_ok: bool | None = None          # Q_{j+2} - Q_j >= h for all j
    single_extremum_ok: bool | None = None  # one critical point per crossing gap

    @property
    def certified_slow(self) -> bool:
        return bool(self.shape == OSCILLATING and self.spacing_ok
                    and self.single_extremum_ok)


def _extrema_times(ts, values, level, eps):
    """Sample-level extrema whose deviation from `level` exceeds eps/2
    (prunes integrator wiggle right at the crossings)."""
    d = np.diff(values)
    out = []
    for i in range(len(d) - 1):
        if (d[i] > 0) != (d[i + 1] > 0):
            if abs(values[i + 1] - level) > 0.5 * eps:
                out.append(float(ts[i + 1]))
    return out


def classify_oscillation(profile: Profile, h: float, level: float = 1.0,
                         eps: float = OVERSHOOT_EPS) -> OscillationReport:
    """Shape of a profile around the positive state with slow-oscillation
    certificate: two or more genuine level crossings make it oscillating,
    certified slow when every window of length h contains at most two
    crossings (Q_{j+2} - Q_j >= h) and exactly one critical point separates
    consecutive crossings."""
    ts, vs = profile.ts, profile.values
    cross = list(profile.crossings) or crossings_from_samples(ts, vs, level)
    sig = significant_crossings(ts, vs, cross, level, eps)
    inconclusive = "unresolved-tail" in profile.flags

    tail_start = sig[-1] if sig else ts[0]
    tail = vs[ts >= tail_start]
    dist = np.abs(tail - level)
    drops = np.diff(dist) <= max(1e-12, eps * 1e-3)
    eventually_monotone = bool(len(dist) > 4 and np.all(drops[len(drops) // 2:]))

    if len(sig) >= 2:
        spacing_ok = all(sig[j + 2] - sig[j] >= h - 1e-9 for j in range(len(sig) - 2))
        single_ok = True
        for q0, q1 in zip(sig[:-1], sig[1:]):
            inner = (ts > q0) & (ts < q1)
            n_ext = len(_extrema_times(ts[inner], vs[inner], level, eps))
            if n_ext != 1:
                single_ok = False
                break
        return OscillationReport(
            shape=OSCILLATING, eventually_monotone=eventually_monotone,
            inconclusive=inconclusive, crossings=tuple(sig),
            spacing_ok=spacing_ok, single_extremum_ok=single_ok,
        )

    sup = float(np.max(vs))
    shape = NON_MONOTONE if sup > level * (1.0 + eps) else MONOTONE
    return OscillationReport(
        shape=shape, eventually_monotone=eventually_monotone,
        inconclusive=inconclusive, crossings=tuple(sig),
    )
