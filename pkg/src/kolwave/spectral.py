"""Root solvers and structural classifiers for the characteristic equations.

Covers the quadratic at the zero state (KPP rates lambda(c) <= mu(c)), the
transcendental linearization about the positive state for a general kernel,
the quartic of the two-component weak-kernel wave system, the delayed
characteristic of the discrete-delay profile equation, and the closed-form
critical delays separating real from complex spectra.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import KolwaveError, PreconditionError, SubcriticalSpeedError
from .models import WaveParams
from .numerics import find_root

__all__ = [
    "Root",
    "RootReport",
    "kpp_roots",
    "roots_at_one",
    "weak_char_roots",
    "delay_char_roots",
    "real_root_boundary",
    "CriticalDelays",
]

_DOUBLE_ROOT_FTOL = 1e-9


@dataclass(frozen=True)
class Root:
    re: float
    im: float = 0.0
    mult: int = 1

    @property
    def is_real(self) -> bool:
        return self.im == 0.0


@dataclass
class RootReport:
    """Roots of one characteristic equation plus structural classification."""

    roots: list[Root]
    classification: str | None = None  # "node" | "focus" | "boundary" | None
    truncated_window: tuple[float, float] | None = None

    def __post_init__(self):
        self.roots = sorted(self.roots, key=lambda r: (-r.re, -abs(r.im)))

    @property
    def real_negative_count(self) -> int:
        return sum(r.mult for r in self.roots if r.is_real and r.re < 0)

    @property
    def real_positive_count(self) -> int:
        return sum(r.mult for r in self.roots if r.is_real and r.re > 0)

    @property
    def has_complex_positive_real_part(self) -> bool:
        return any(r.im != 0.0 and r.re > 0 for r in self.roots)

    @property
    def dominant_real(self) -> float | None:
        reals = [r.re for r in self.roots if r.is_real]
        return max(reals) if reals else None

    def real_roots(self, sign: int = 0) -> list[Root]:
        out = [r for r in self.roots if r.is_real]
        if sign < 0:
            out = [r for r in out if r.re < 0]
        elif sign > 0:
            out = [r for r in out if r.re > 0]
        return out

    def to_json(self) -> dict:
        return {
            "roots": [{"re": r.re, "im": r.im, "mult": r.mult} for r in self.roots],
            "class": self.classification,
            "real_negative_count": self.real_negative_count,
            "real_positive_count": self.real_positive_count,
            "has_complex_positive_real_part": self.has_complex_positive_real_part,
            "dominant_real": self.dominant_real,
        }


def kpp_roots(c: float, g0: float) -> tuple[float, float]:
    """Decay/growth rates at the zero state: the two positive roots of
    z^2 - c z + G(0) = 0, returned as (lambda, mu) with lambda <= mu."""
    if g0 <= 0:
        raise PreconditionError("growth at zero must be positive")
    disc = c * c - 4.0 * g0
    if disc < 0:
        raise SubcriticalSpeedError(
            f"speed {c} below linear threshold {2.0 * math.sqrt(g0):.6g}"
        )
    r = math.sqrt(disc)
    return 0.5 * (c - r), 0.5 * (c + r)


def _scan_real_roots(
    f: Callable[[float], float],
    fprime: Callable[[float], float],
    lo: float,
    hi: float,
    n_scan: int = 512,
    local_scale: Callable[[float], float] | None = None,
) -> list[Root]:
    """Sign-grid scan plus bisection; tangencies (no sign change, |f| dipping
    to ~0 at a critical point) are reported as double roots.

    `local_scale(z)` should return the magnitude of the individual terms of f
    at z; the tangency test |f| < tol * scale must not use a global scale,
    which exponential terms inflate at the far end of the window.
    """
    zs = np.linspace(lo, hi, n_scan)
    vals = np.array([f(z) for z in zs])

    simple: list[float] = []
    for i in range(n_scan - 1):
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0.0:
            simple.append(float(zs[i]))
        elif (v0 < 0) != (v1 < 0):
            simple.append(find_root(f, (zs[i], zs[i + 1]), 1e-14))
    if vals[-1] == 0.0:
        simple.append(float(zs[-1]))

    doubles: list[float] = []
    dvals = np.array([fprime(z) for z in zs])
    for i in range(n_scan - 1):
        if (dvals[i] < 0) != (dvals[i + 1] < 0):
            zc = find_root(fprime, (zs[i], zs[i + 1]), 1e-14)
            scale = max(1.0, local_scale(zc)) if local_scale is not None else 1.0
            if abs(f(zc)) < _DOUBLE_ROOT_FTOL * scale:
                # skip if it merely sits between two already-resolved simple roots
                near = [r for r in simple if abs(r - zc) < (hi - lo) / n_scan]
                if not near:
                    doubles.append(zc)

    roots = [Root(re=r) for r in simple] + [Root(re=r, mult=2) for r in doubles]
    return roots


def roots_at_one(
    params: WaveParams,
    window: tuple[float, float] | None = None,
    n_scan: int = 512,
) -> RootReport:
    """Real roots of the linearization about the positive state,
    z^2 - c z + G'(1) * M(z), with M the kernel's exponential moment.

    The search window defaults to [-20/L, 0) with L the kernel's lag scale,
    clipped to the moment's finiteness interval (clipping is reported via
    `truncated_window`).  At most four negative zeros can exist; more is an
    internal error.
    """
    c = params.c
    gp1 = params.growth.gp1
    kern = params.kernel

    lag_scale = max(kern.tau * c, 1.0) if kern.kind in ("discrete-delay", "weak-generic") else 1.0
    lo_req, hi_req = window if window is not None else (-20.0 / max(lag_scale, 1e-12), 0.0)

    lo_fin, _ = kern.finite_moment_interval(c)
    truncated = None
    lo = lo_req
    if lo <= lo_fin:
        lo = lo_fin + 1e-9 * max(1.0, abs(lo_fin)) + 1e-12
        truncated = (lo, hi_req)
    hi = hi_req - 1e-12

    def f(z: float) -> float:
        return z * z - c * z + gp1 * kern.laplace(z, c)

    def fp(z: float) -> float:
        return 2.0 * z - c + gp1 * kern.laplace_deriv(z, c)

    def terms(z: float) -> float:
        return z * z + abs(c * z) + abs(gp1 * kern.laplace(z, c))

    roots = _scan_real_roots(f, fp, lo, hi, n_scan, local_scale=terms)
    negatives = sum(r.mult for r in roots if r.re < 0)
    if negatives > 4:
        raise KolwaveError(f"found {negatives} negative roots; at most 4 possible")
    return RootReport(roots=roots, truncated_window=truncated)


def weak_char_roots(gamma: float, tau: float, eps: float) -> RootReport:
    """All roots of the weak-kernel wave quartic
    (eps z^2 - z)^2 - (eps z^2 - z)/tau + 1/(tau(1+gamma)) = 0.

    Solved exactly through the intermediate quadratic in w = eps z^2 - z.
    Classification: 'node' for two simple real roots with negative part
    (tau < (1+gamma)/4), 'focus' past that delay, 'boundary' on the curve.
    """
    if not (gamma > 0 and tau > 0):
        raise PreconditionError("gamma and tau must be positive")
    if eps < 0:
        raise PreconditionError("eps must be non-negative")

    disc_w = 1.0 / (tau * tau) - 4.0 / (tau * (1.0 + gamma))
    scale = 1.0 / (tau * tau)
    if abs(disc_w) <= 1e-12 * scale:
        classification = "boundary"
    elif disc_w > 0:
        classification = "node"
    else:
        classification = "focus"

    sq = cmath.sqrt(complex(disc_w, 0.0))
    ws = [(1.0 / tau + sq) / 2.0, (1.0 / tau - sq) / 2.0]

    roots: list[Root] = []
    for w in ws:
        if eps == 0.0:
            z = -w  # the quadratic in z degenerates; one branch escapes to infinity
            roots.append(_as_root(z))
        else:
            s = cmath.sqrt(1.0 + 4.0 * eps * w)
            for z in ((1.0 + s) / (2.0 * eps), (1.0 - s) / (2.0 * eps)):
                roots.append(_as_root(z))

    merged = _merge_conjugate_noise(roots)
    return RootReport(roots=merged, classification=classification)


def _as_root(z: complex) -> Root:
    im = z.imag if abs(z.imag) > 1e-12 * max(1.0, abs(z.real)) else 0.0
    return Root(re=z.real, im=im)


def _merge_conjugate_noise(roots: list[Root]) -> list[Root]:
    """Collapse numerically identical roots into multiplicities."""
    out: list[Root] = []
    for r in roots:
        for i, o in enumerate(out):
            tol = 1e-12 * max(1.0, abs(r.re), abs(r.im))
            if abs(o.re - r.re) <= tol and abs(o.im - r.im) <= tol:
                out[i] = Root(o.re, o.im, o.mult + r.mult)
                break
        else:
            out.append(r)
    return out


def delay_char_roots(gamma: float, tau: float, eps: float,
                     window: tuple[float, float] | None = None) -> RootReport:
    """Real roots in [-20/tau, 0) of the delayed characteristic
    eps z^2 - z - exp(-z tau)/(1+gamma) = 0.

    For eps = 0 and tau < (1+gamma)/e there are exactly two simple negative
    roots z2 < -1/tau < z1; they merge into a double root at -1/tau on the
    boundary delay and vanish beyond it.
    """
    if gamma < 0 or not tau > 0 or eps < 0:
        raise PreconditionError("need gamma >= 0, tau > 0, eps >= 0")
    lo, hi = window if window is not None else (-20.0 / tau, -1e-12)
    denom = 1.0 + gamma

    def f(z: float) -> float:
        return eps * z * z - z - math.exp(-z * tau) / denom

    def fp(z: float) -> float:
        return 2.0 * eps * z - 1.0 + tau * math.exp(-z * tau) / denom

    def terms(z: float) -> float:
        return eps * z * z + abs(z) + math.exp(-z * tau) / denom

    roots = _scan_real_roots(f, fp, lo, hi, local_scale=terms)
    classification = "boundary" if any(r.mult == 2 for r in roots) else None
    return RootReport(roots=roots, classification=classification)


class CriticalDelays(NamedTuple):
    discrete: float  # real spectrum at the positive state up to (1+gamma)/e
    weak: float      # node-to-focus switch of the weak-kernel system at (1+gamma)/4


def real_root_boundary(gamma: float) -> CriticalDelays:
    """Critical delays below which the linearization about the positive state
    keeps real negative roots, for the two delay models."""
    if gamma < 0:
        raise PreconditionError("gamma must be non-negative")
    return CriticalDelays(discrete=(1.0 + gamma) / math.e, weak=(1.0 + gamma) / 4.0)
