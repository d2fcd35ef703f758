"""Command-line front end.

Every subcommand validates its whole configuration before computing (exit 1
on a bad configuration), writes its payload to stdout or ``--output`` and
logs to stderr. With ``--check`` the reported maximum error is compared with
``--tol`` (or the subcommand default): exit 2 when it is exceeded. Runtime
failures (I/O, non-finite values) exit 3.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from typing import Callable, Optional

import numpy as np

from . import differential as diff
from . import energy, identities, mesh, surface
from .errors import ScherkError
from .surface import BranchPolicy, GrainAngle, Point, Window

log = logging.getLogger("scherk")

EXIT_OK, EXIT_CONFIG, EXIT_TOL, EXIT_RUNTIME = 0, 1, 2, 3

#: default ``--check`` tolerances
DEFAULT_TOL = {
    "residual": 1e-8,
    "ramanujan": 1e-5,
    "sumofsums": 1e-12,
    "theorem1": 1e-3,
    "theorem2": 1e-9,
    "logsin": 1e-12,
    "sineproduct": 1e-12,
    "bi": 1e-10,
    "gamma": 5e-3,
    "shift": 1e-9,
}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# argument helpers


def _range(text: str) -> list[float]:
    """``a:b:n`` -> ``n`` evenly spaced values from a to b."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must be a:b:n, got {text!r}")
    if n < 1 or (n > 1 and not b > a):
        raise argparse.ArgumentTypeError(f"range needs n >= 1 and a < b, got {text!r}")
    return np.linspace(a, b, n).tolist() if n > 1 else [a]


def _grid(text: str) -> tuple[int, int]:
    """``N`` or ``NXxNY``."""
    try:
        parts = [int(p) for p in text.lower().split("x")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be N or NXxNY, got {text!r}")
    if len(parts) == 1:
        parts *= 2
    if len(parts) != 2 or min(parts) < 2:
        raise argparse.ArgumentTypeError(f"grid must be N or NXxNY with N >= 2, got {text!r}")
    return parts[0], parts[1]


def _window(text: str) -> Window:
    try:
        return Window.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _sheets(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"sheets must be comma-separated integers, got {text!r}")


def _finite(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _common(p: argparse.ArgumentParser, check: bool = True):
    p.add_argument("-o", "--output", help="write the payload here instead of stdout")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--seed", type=int, default=identities.DEFAULT_SEED)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    if check:
        p.add_argument("--check", action="store_true", help="exit 2 if the max error exceeds --tol")
        p.add_argument("--tol", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="scherk", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="height (and derivatives) at a point, JSON")
    p.add_argument("--surface", choices=("scherk", "helicoid"), default="scherk")
    p.add_argument("--alpha", type=_finite, default=0.5 * math.pi)
    p.add_argument("--x", type=_finite, required=True)
    p.add_argument("--y", type=_finite, required=True)
    p.add_argument("--sheet", type=int, default=0)
    _common(p, check=False)

    p = sub.add_parser("residual", help="minimal-surface residual survey, CSV")
    p.add_argument("--surface", choices=("scherk", "helicoid"), default="scherk")
    p.add_argument("--alpha", type=_finite, default=1.0)
    p.add_argument("--window", type=_window, help="xmin:xmax:ymin:ymax (default [-4,4]x[0,ell])")
    p.add_argument("--grid", type=_grid, default=(81, 81))
    p.add_argument("--exclusion", type=float, default=surface.NEAR_CORE_RADIUS)
    p.add_argument("--fd", action="store_true", help="use finite differences instead of closed forms")
    _common(p)

    p = sub.add_parser("identity", help="seeded identity checks, JSON")
    p.add_argument("kind", choices=("ramanujan", "sumofsums", "theorem1", "theorem2", "logsin",
                                    "sineproduct"))
    p.add_argument("--alpha", type=_finite, default=1.0)
    p.add_argument("--beta", type=_finite, default=math.pi / 3)
    p.add_argument("--n", type=_positive_int, default=2)
    p.add_argument("--samples", type=_positive_int, default=100)
    p.add_argument("--pairs", type=_positive_int, default=None,
                   help="symmetric pairs (ramanujan: 200000, theorem1: 2000)")
    _common(p)

    p = sub.add_parser("bi", help="Born-Infeld traveling-wave residuals, JSON")
    p.add_argument("--samples", type=_positive_int, default=50)
    p.add_argument("--span", type=float, default=3.0)
    _common(p)

    p = sub.add_parser("energy", help="area-excess scans, CSV")
    p.add_argument("--mode", choices=("gamma", "shift"), required=True)
    p.add_argument("--alpha", type=_finite, default=1.0)
    p.add_argument("--range", type=_range, default=None,
                   help="a:b:n (default 0.8:1.2:5 for gamma, -0.5:0.5:21 for shift)")
    p.add_argument("--L", type=float, default=8.0)
    p.add_argument("--grid", type=int, default=129, help="odd Simpson node count per axis")
    p.add_argument("--refine-tol", type=float, default=1e-4)
    _common(p)

    p = sub.add_parser("mesh", help="multi-sheet OBJ mesh")
    p.add_argument("--surface", choices=("scherk", "helicoid"), default="scherk")
    p.add_argument("--alpha", type=_finite, default=0.5 * math.pi)
    p.add_argument("--window", type=_window, help="default [-4,4]x[-ell,ell]")
    p.add_argument("--grid", type=_grid, default=(65, 65))
    p.add_argument("--sheets", type=_sheets, default=(0,))
    p.add_argument("--jump-threshold", type=float, default=None)
    _common(p, check=False)

    p = sub.add_parser("figure1", help="stacked three-sheet preset, OBJ")
    _common(p, check=False)
    return ap


# ---------------------------------------------------------------------------
# subcommands: each returns a runner producing (payload, metric, tol_key)

Runner = Callable[[], tuple]


def _plain(obj):
    """Drop signed zeros so equal values serialise identically."""
    if isinstance(obj, float):
        return obj + 0.0
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _json(obj) -> bytes:
    return (json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n").encode("ascii")


def _prep_eval(a) -> Runner:
    p = Point(a.x, a.y)
    b = BranchPolicy(a.sheet)
    if a.surface == "scherk":
        g = GrainAngle(a.alpha)
        s = surface.scherk_height(p, g, b)
        out = {"surface": "scherk", "alpha": g.alpha, "ell": g.ell,
               "gradient": list(surface.scherk_gradient(p, g)),
               "hessian": list(surface.scherk_hessian(p, g))}
    else:
        s = surface.helicoid_height(p, b)
        out = {"surface": "helicoid",
               "gradient": [float(v) for v in surface.helicoid_grad(p.x, p.y)],
               "hessian": [float(v) for v in surface.helicoid_hess(p.x, p.y)]}
    out.update(x=p.x, y=p.y, z=s.z, sheet=b.sheet, branch=b.mode, near_core=s.near_core)
    return lambda: (_json(out), None, None)


def _prep_residual(a) -> Runner:
    if a.surface == "scherk":
        g = GrainAngle(a.alpha)
        h = diff.scherk_function(g)
        window = a.window or Window(-4.0, 4.0, 0.0, g.ell)
    else:
        g = None
        h = diff.helicoid_function()
        window = a.window or Window(0.5, 4.0, 0.5, 4.0)
    if a.fd:
        h = diff.HeightFunction(h.value, None, None, h.core_distance, h.name, h.core_ys)

    def run():
        r = diff.residual_survey(h, window, a.grid, g, a.exclusion)
        log.info("residual %s: max %.3e rms %.3e (%d excluded, %s)", h.name, r.max_abs, r.rms,
                 r.n_excluded, r.method)
        return mesh.csv_text(r).encode("ascii"), r.max_abs, "residual"
    return run


def _prep_identity(a) -> Runner:
    kind, seed, n_s = a.kind, a.seed, a.samples
    if kind == "ramanujan":
        pairs = a.pairs or 200000

        def run():
            errs, bounds = [], []
            for q in identities.identity_sample_points(n_s, seed):
                rep = identities.ramanujan_partial_sum(q, pairs)
                errs.append(abs(rep.value - identities.ramanujan_lhs(q)))
                bounds.append(rep.tail_bound)
            sound = all(e <= b for e, b in zip(errs, bounds))
            out = {"identity": kind, "pairs": pairs, "samples": n_s, "max_error": max(errs),
                   "max_tail_bound": max(bounds), "bound_sound": sound}
            return _json(out), max(errs) if sound else math.inf, kind
        return run
    if kind == "theorem1":
        g = GrainAngle(a.alpha)
        pairs = a.pairs or 2000

        def run():
            errs = [identities.theorem1_difference_check(p, r, g, pairs)
                    for p, r in identities.theorem1_sample_pairs(g, n_s, seed)]
            out = {"identity": kind, "alpha": g.alpha, "pairs": pairs, "samples": n_s,
                   "max_error": max(errs)}
            return _json(out), max(errs), kind
        return run
    if kind == "theorem2":
        spec = identities.DecompositionSpec(a.n, a.beta)

        def run():
            out = identities.theorem2_batch(spec, n_s, seed)
            out["identity"] = kind
            out["max_error"] = max(out["max_gradient_error"], out["max_mod_constant_error"],
                                   out["max_central_exact_error"])
            return _json(out), out["max_error"], kind
        return run
    if kind == "sumofsums":
        n = a.n

        def run():
            errs = [identities.sum_of_sums_check(q, n) for q in identities.identity_sample_points(n_s, seed)]
            return _json({"identity": kind, "n": n, "samples": n_s, "max_error": max(errs)}), max(errs), kind
        return run
    n = a.n

    def run():
        pts = identities.complex_sample_points(n_s, seed)
        if kind == "logsin":
            errs = [identities.imag_log_sin_check(c) for c in pts]
            out = {"identity": kind}
        else:
            errs = [identities.sine_product_check(c, n) for c in pts]
            out = {"identity": kind, "n": n}
        out.update(samples=n_s, max_error=max(errs))
        return _json(out), max(errs), kind
    return run


def _prep_bi(a) -> Runner:
    def run():
        res = diff.born_infeld_batch(a.samples, a.seed, a.span)
        worst = max(res.values())
        return _json({"samples": a.samples, "residuals": res, "max_error": worst}), worst, "bi"
    return run


def _prep_energy(a) -> Runner:
    g = GrainAngle(a.alpha)
    if a.mode == "gamma":
        values = a.range or [0.8, 0.9, 1.0, 1.1, 1.2]
        q = energy.QuadratureSpec.periodic(g, a.L, a.grid)

        def run():
            scan = energy.gamma_energy_scan(g, values, q, a.threads, a.refine_tol)
            log.info("dE/dgamma(1) = %.6e, argmin ~ %.8f", scan.derivative_at_reference,
                     scan.stationary_estimate)
            return mesh.csv_text(scan).encode("ascii"), abs(scan.stationary_estimate - 1.0), "gamma"
    else:
        values = a.range or np.linspace(-0.5, 0.5, 21).tolist()
        spec = identities.DecompositionSpec(2, 0.5 * g.alpha)
        q = energy.shift_quadrature(spec, a.L, a.grid)
        # validate symmetry up front (a configuration property)
        if not np.allclose(values, [-v for v in values[::-1]], rtol=0, atol=1e-12):
            raise ValueError("shift values must be symmetric about 0")

        def run():
            scan = energy.shift_energy_scan(spec, values, q, a.threads, a.refine_tol)
            e = np.asarray(scan.energies)
            asym = float(np.max(np.abs(e - e[::-1])))
            log.info("max |E(d) - E(-d)| = %.3e, dE/ddelta(0) = %.3e", asym, scan.derivative_at_reference)
            return mesh.csv_text(scan).encode("ascii"), asym, "shift"
    return run


def _prep_mesh(a) -> Runner:
    if a.surface == "scherk":
        g = GrainAngle(a.alpha)
        h, quantum = diff.scherk_function(g), g.jump
        window = a.window or Window(-4.0, 4.0, -g.ell, g.ell)
    else:
        h, quantum = diff.helicoid_function(), math.pi
        window = a.window or Window(-4.0, 4.0, -4.0, 4.0)
    nx, ny = a.grid

    def run():
        fields = [mesh.sample_grid(h, window, nx, ny, BranchPolicy(k), quantum, threads=a.threads)
                  for k in a.sheets]
        m = mesh.triangulate(fields, a.jump_threshold, name=f"{h.name} sheets={a.sheets}")
        log.info("mesh: %d vertices, %d triangles, %d cells dropped", m.n_vertices, m.n_triangles, m.dropped)
        return mesh.obj_text(m).encode("ascii"), None, None
    return run


def _prep_figure1(a) -> Runner:
    def run():
        return mesh.obj_text(mesh.figure1_mesh(a.threads)).encode("ascii"), None, None
    return run


PREPARE = {
    "eval": _prep_eval,
    "residual": _prep_residual,
    "identity": _prep_identity,
    "bi": _prep_bi,
    "energy": _prep_energy,
    "mesh": _prep_mesh,
    "figure1": _prep_figure1,
}


def _write(payload: bytes, output: Optional[str]):
    if output:
        with open(output, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
                            level=logging.INFO if args.verbose else logging.WARNING, force=True)
        tol = getattr(args, "tol", None)
        if tol is not None and not tol >= 0:
            raise ConfigError("--tol must be non-negative")
        runner = PREPARE[args.command](args)
    except (ConfigError, ScherkError, ValueError) as exc:
        print(f"scherk: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        payload, metric, key = runner()
        _write(payload, args.output)
    except (ScherkError, OSError, ArithmeticError) as exc:
        print(f"scherk: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    if getattr(args, "check", False) and metric is not None:
        limit = DEFAULT_TOL[key] if tol is None else tol
        ok = metric <= limit
        print(f"check {key}: max error {metric:.3e} {'<=' if ok else '>'} tol {limit:.3e}",
              file=sys.stderr)
        return EXIT_OK if ok else EXIT_TOL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
