"""Batch command-line front end.

Subcommands cover single-point analysis (roots, overshoot, test-function),
profile computation (heteroclinic, weak-profile, limit-profile,
finite-profile, iterate, check-asymptotics) and parameter-plane sweeps
(region).  Every run writes CSV/JSON outputs plus a single-polyline SVG and
a manifest next to them.  Outputs are byte-reproducible: floats render with
17 significant digits and the SVG carries no timestamp.

Exit codes: 0 success, 2 precondition/usage error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import discretedelay, planarflow, semiwavefront, spectral
from .errors import KolwaveError, PreconditionError, UnsupportedError
from .models import (
    GrowthModel,
    Kernel,
    WaveParams,
    params_from_json,
    params_to_json,
)
from .profiles import Profile, fmt_float, write_csv

DEFAULT_TOL_ENV = "KW_SEED_TOL"


@dataclass
class RunManifest:
    command: str
    params: dict
    outputs: list = field(default_factory=list)
    versions: dict = field(default_factory=lambda: {"kolwave": __version__, "schema": "1"})
    wall_time: float = 0.0

    def write(self, out_dir: Path) -> None:
        path = out_dir / f"{self.command}.manifest.json"
        path.write_text(json.dumps(asdict(self), sort_keys=True, indent=2) + "\n")


def _svg_map(vals, lo, hi, size, margin):
    span = hi - lo if hi > lo else 1.0
    return margin + (np.asarray(vals) - lo) * (size - 2 * margin) / span


def write_svg(path: Path, curves, level: float | None = None,
              width: int = 800, height: int = 400) -> None:
    """Minimal deterministic SVG: one polyline per named curve plus an
    optional horizontal rule at `level`."""
    margin = 20.0
    all_t = np.concatenate([np.asarray(ts) for _, ts, _ in curves])
    all_v = np.concatenate([np.asarray(vs) for _, _, vs in curves])
    if level is not None:
        all_v = np.concatenate([all_v, [level]])
    finite = np.isfinite(all_v)
    t_lo, t_hi = float(np.min(all_t)), float(np.max(all_t))
    v_lo, v_hi = float(np.min(all_v[finite])), float(np.max(all_v[finite]))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if level is not None:
        y = height - _svg_map([level], v_lo, v_hi, height, margin)[0]
        parts.append(
            f'<line x1="{margin:.2f}" y1="{y:.2f}" x2="{width - margin:.2f}" y2="{y:.2f}" '
            f'stroke="#999999" stroke-dasharray="6,4" stroke-width="1"/>'
        )
    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
    for i, (name, ts, vs) in enumerate(curves):
        ts = np.asarray(ts, dtype=float)
        vs = np.asarray(vs, dtype=float)
        ok = np.isfinite(vs)
        xs = _svg_map(ts[ok], t_lo, t_hi, width, margin)
        ys = height - _svg_map(vs[ok], v_lo, v_hi, height, margin)
        pts = " ".join(f"{x:.3f},{y:.3f}" for x, y in zip(xs, ys))
        color = palette[i % len(palette)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                     f'points="{pts}"><title>{name}</title></polyline>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def _write_json(path: Path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _profile_outputs(out: Path, stem: str, profile: Profile, manifest: RunManifest,
                     extra: dict | None = None) -> None:
    csv_path = out / f"{stem}.csv"
    profile.to_csv(csv_path)
    doc = profile.sidecar()
    if extra:
        doc.update(extra)
    json_path = out / f"{stem}.json"
    _write_json(json_path, doc)
    svg_path = out / f"{stem}.svg"
    write_svg(svg_path, [("phi", profile.ts, profile.values)], level=1.0)
    manifest.outputs += [csv_path.name, json_path.name, svg_path.name]


def _default_tol(fallback: float) -> float:
    env = os.environ.get(DEFAULT_TOL_ENV)
    if env is None:
        return fallback
    try:
        return float(env)
    except ValueError as exc:
        raise PreconditionError(f"{DEFAULT_TOL_ENV} is not a number: {env!r}") from exc


def _build_params(args) -> WaveParams:
    if getattr(args, "json", None):
        try:
            doc = json.loads(Path(args.json).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise PreconditionError(f"cannot read model JSON: {exc}") from exc
        return params_from_json(doc)
    if getattr(args, "preset", None) == "kpp":
        return WaveParams(GrowthModel.kpp(), Kernel.dirac(), args.c)

    model = getattr(args, "model", "food")
    if model == "food":
        growth = GrowthModel.food_limited(args.gamma)
    elif model == "quad":
        growth = GrowthModel.quadratic(args.a, args.b)
    elif model == "kpp":
        growth = GrowthModel.kpp()
    else:
        raise PreconditionError(f"unknown growth model {model!r}")

    kspec = getattr(args, "kernel", "dirac")
    if kspec == "dirac":
        kernel = Kernel.dirac()
    elif kspec == "discrete":
        kernel = Kernel.discrete(args.tau)
    elif kspec == "weak":
        kernel = Kernel.weak(args.tau)
    elif kspec.startswith("table:"):
        try:
            doc = json.loads(Path(kspec[6:]).read_text())
            kernel = Kernel.tabulated(doc["s"], doc["density"])
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise PreconditionError(f"cannot read kernel table: {exc}") from exc
    else:
        raise PreconditionError(f"unknown kernel {kspec!r}")
    return WaveParams(growth, kernel, args.c)


# ----------------------------------------------------------------- commands


def cmd_roots(args, out: Path, manifest: RunManifest) -> int:
    eps = args.c ** -2
    if args.kernel == "discrete":
        rep = spectral.delay_char_roots(args.gamma, args.tau, eps)
    elif args.kernel == "weak":
        rep = spectral.weak_char_roots(args.gamma, args.tau, eps)
    else:
        raise PreconditionError("roots needs --kernel discrete or weak")
    edges = spectral.real_root_boundary(args.gamma)
    doc = rep.to_json()
    doc["critical_delays"] = {"discrete": edges.discrete, "weak": edges.weak}
    _write_json(out / "roots.json", doc)
    write_csv(out / "roots.csv", ("re", "im", "mult"),
              [(r.re, r.im, r.mult) for r in rep.roots])
    manifest.outputs += ["roots.json", "roots.csv"]
    print(f"{len(rep.roots)} roots, {rep.real_negative_count} real negative, "
          f"class={rep.classification}")
    return 0


def cmd_heteroclinic(args, out: Path, manifest: RunManifest) -> int:
    tol = _default_tol(args.tol)
    if args.eps > 0:
        res = planarflow.finite_speed_profile(args.gamma, args.tau, args.eps,
                                              args.amplitude, tol)
    else:
        res = planarflow.heteroclinic(args.gamma, args.tau, args.amplitude, tol)
    extra = {
        "phi_max": res.phi_max,
        "entry_direction": [float(v) for v in res.entry_direction],
        "captured": res.captured,
        "shape": res.shape,
    }
    _profile_outputs(out, "phi", res.profile, manifest, extra)
    psi_csv = out / "psi.csv"
    res.psi_profile.to_csv(psi_csv)
    manifest.outputs.append(psi_csv.name)
    print(f"shape={res.shape} phi_max={res.phi_max:.6f}")
    return 0


def cmd_limit_profile(args, out: Path, manifest: RunManifest) -> int:
    tol = _default_tol(args.tol)
    if args.eps > 0:
        prof = discretedelay.finite_speed_profile(args.gamma, args.tau, args.eps,
                                                  args.span, tol)
    else:
        prof = discretedelay.limit_profile(args.gamma, args.tau, args.span, tol)
    _profile_outputs(out, "phi", prof, manifest)
    print(f"shape={prof.shape} sup={prof.sup:.6f}")
    return 0


def cmd_overshoot(args, out: Path, manifest: RunManifest) -> int:
    val = discretedelay.overshoot_bound(args.gamma, args.tau)
    _write_json(out / "overshoot.json",
                {"gamma": args.gamma, "tau": args.tau, "value": val})
    manifest.outputs.append("overshoot.json")
    print(f"overshoot bound = {fmt_float(val)}")
    return 0


def cmd_test_function(args, out: Path, manifest: RunManifest) -> int:
    rep = planarflow.test_function_check(args.gamma, args.tau,
                                         planarflow.TestFunction(args.a))
    doc = {"gamma": args.gamma, "tau": args.tau, "a": args.a,
           "holds": rep.holds, "failed": list(rep.failed), "fail_x": rep.fail_x}
    _write_json(out / "test-function.json", doc)
    manifest.outputs.append("test-function.json")
    print("holds" if rep.holds else f"fails: {', '.join(rep.failed)}")
    return 0


def _parse_range(spec: str) -> np.ndarray:
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError as exc:
        raise PreconditionError(f"range must be START:STOP:STEP, got {spec!r}") from exc
    if step <= 0 or stop < start:
        raise PreconditionError("range needs step > 0 and stop >= start")
    n = int((stop - start) / step + 1e-9) + 1
    return start + step * np.arange(n)


def cmd_region(args, out: Path, manifest: RunManifest) -> int:
    gammas = _parse_range(args.gamma)
    if args.kind == "overshoot":
        curve = discretedelay.overshoot_region(gammas, tol=min(args.tol, 1e-2))
    else:
        kind = "tau_sharp" if args.kind == "tau-sharp" else "tau_star"
        curve = planarflow.boundary_region(gammas, tol=args.tol, kinds=(kind,),
                                           jobs=args.jobs)
    csv_path = out / f"region-{args.kind}.csv"
    curve.to_csv(csv_path)
    svg_path = out / f"region-{args.kind}.svg"
    curves = [(name, curve.gamma, vals) for name, vals in curve.columns.items()]
    write_svg(svg_path, curves)
    manifest.outputs += [csv_path.name, svg_path.name]
    print(f"{len(gammas)} grid points -> {csv_path.name}")
    return 0


def _iteration_config(args, params):
    if getattr(args, "config", None):
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise PreconditionError(f"cannot read iteration config: {exc}") from exc
        return semiwavefront.config_from_json(doc)
    tol = _default_tol(args.tol)
    return semiwavefront.default_config(params, dt=args.dt, tol=tol)[0]


def cmd_iterate(args, out: Path, manifest: RunManifest) -> int:
    params = _build_params(args)
    config = _iteration_config(args, params)
    res = semiwavefront.iterate_front(config, params)
    extra = {
        "iterations": res.iterations,
        "converged": res.converged,
        "residual": res.residual,
        "bound": {"U": res.bound.U, "branch": res.bound.branch},
        "b": config.b,
        "beta": config.beta,
    }
    _profile_outputs(out, "front", res.profile, manifest, extra)
    print(f"converged={res.converged} iters={res.iterations} "
          f"residual={res.residual:.3g} sup={res.profile.sup:.6f}")
    return 0


def cmd_check_asymptotics(args, out: Path, manifest: RunManifest) -> int:
    params = _build_params(args)
    config = _iteration_config(args, params)
    res = semiwavefront.iterate_front(config, params)
    rep = semiwavefront.asymptotic_check(res.profile, params)
    doc = {
        "model": params_to_json(params),
        "rate_minus_expected": rep.rate_minus_expected,
        "rate_minus_fit": rep.rate_minus_fit,
        "rel_err_minus": rep.rel_err_minus,
        "rate_plus_fit": rep.rate_plus_fit,
        "matched_root": rep.matched_root,
        "rel_err_plus": rep.rel_err_plus,
        "flags": list(rep.flags),
    }
    _write_json(out / "asymptotics.json", doc)
    manifest.outputs.append("asymptotics.json")
    print(f"rel_err_minus={rep.rel_err_minus} rel_err_plus={rep.rel_err_plus} "
          f"flags={list(rep.flags)}")
    return 0


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", default="food", choices=("food", "quad", "kpp"))
    p.add_argument("--kernel", default="dirac",
                   help="dirac | discrete | weak | table:FILE")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--c", type=float, default=2.5)
    p.add_argument("--preset", choices=("kpp",))
    p.add_argument("--json", help="model JSON file; overrides the flags")
    p.add_argument("--config", help="iteration-config JSON file; overrides --dt/--tol")
    p.add_argument("--dt", type=float, default=0.02)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kolwave",
        description="travelling-wavefront toolkit for the nonlocal logistic "
                    "reaction-diffusion model",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, tol):
        p.add_argument("--out", default="out")
        p.add_argument("--tol", type=float, default=tol)
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("roots", help="characteristic roots at the positive state")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--kernel", default="discrete", choices=("discrete", "weak"))
    p.add_argument("--c", type=float, default=1e6)
    common(p, 1e-10)
    p.set_defaults(fn=cmd_roots)

    p = sub.add_parser("heteroclinic", help="planar kinetics connection")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--amplitude", type=float, default=1e-6)
    common(p, 1e-7)
    p.set_defaults(fn=cmd_heteroclinic)

    p = sub.add_parser("weak-profile", help="finite-speed weak-kernel wave profile")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--amplitude", type=float, default=1e-6)
    common(p, 1e-7)
    p.set_defaults(fn=cmd_heteroclinic)

    p = sub.add_parser("limit-profile", help="infinite-speed delayed kinetics profile")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--span", type=float, default=400.0)
    p.add_argument("--eps", type=float, default=0.0)
    common(p, 1e-10)
    p.set_defaults(fn=cmd_limit_profile)

    p = sub.add_parser("finite-profile", help="finite-speed delayed wave profile")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--span", type=float, default=400.0)
    common(p, 1e-10)
    p.set_defaults(fn=cmd_limit_profile)

    p = sub.add_parser("overshoot", help="closed-form overshoot lower bound")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    common(p, 1e-10)
    p.set_defaults(fn=cmd_overshoot)

    p = sub.add_parser("test-function", help="cubic comparison-arc certificate")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--a", type=float, required=True)
    common(p, 1e-10)
    p.set_defaults(fn=cmd_test_function)

    p = sub.add_parser("region", help="parameter-plane boundary sweep")
    p.add_argument("kind", choices=("tau-sharp", "tau-star", "overshoot"))
    p.add_argument("--gamma", required=True, help="START:STOP:STEP")
    common(p, 0.05)
    p.set_defaults(fn=cmd_region)

    p = sub.add_parser("iterate", help="front construction by operator iteration")
    _add_model_flags(p)
    common(p, 1e-9)
    p.set_defaults(fn=cmd_iterate)

    p = sub.add_parser("check-asymptotics", help="tail exponents vs characteristic rates")
    _add_model_flags(p)
    common(p, 1e-9)
    p.set_defaults(fn=cmd_check_asymptotics)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(command=args.command,
                           params={k: v for k, v in sorted(vars(args).items())
                                   if k not in ("fn",)})
    t0 = time.perf_counter()
    code = 0
    try:
        code = args.fn(args, out, manifest)
    except (PreconditionError, UnsupportedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 2
    except KolwaveError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        code = 3
    finally:
        manifest.wall_time = time.perf_counter() - t0
        manifest.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
