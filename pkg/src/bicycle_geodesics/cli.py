"""Command-line frontend.

Every subcommand writes plain data (CSV or JSON) and never plots.  Exit
codes: 0 success, 1 numerical failure, 2 bad arguments, 3 a ``check``
invariant was violated.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import closedform, elliptic
from .dynamics import IntegrationOptions, integrate, invariant_report, peak_initial_state
from .errors import GeodesicError
from .params import GeodesicParams
from .rodshape import back_frame_events, frenet_series, structure_residuals
from .screw import angle_distance, wrap_angle
from .shooting import FramePlacement, ShootingOptions, shoot
from .transforms import (conjecture_check, extract_monodromy, flip_states, half_monodromy,
                         kappa_shift_residual, torsion_shift_rescale)

log = logging.getLogger("bicycle_geodesics")

TRACK_HEADER = ("t", "fx", "fy", "fz", "bx", "by", "bz", "kappa", "tau")
SUITES = ("elliptic", "invariants", "closedform", "transforms")
EXIT_NUMERIC = 1
EXIT_ARGS = 2
EXIT_CHECK = 3
SINGULAR_TOL = 1e-6


class _ArgError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    a: float
    b: float
    t_max: float
    dt_out: float
    rel_tol: float
    abs_tol: float
    output_path: str | None
    format: str

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        return cls(ns.command, ns.a, ns.b, ns.t_max, ns.dt_out, ns.rel_tol, ns.abs_tol, ns.out, ns.format)

    def integration(self, dt_out: float | None = None) -> IntegrationOptions:
        return IntegrationOptions(rel_tol=self.rel_tol, abs_tol=self.abs_tol, dt_out=dt_out or self.dt_out)


# -- argument parsing ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _ArgError(f"{self.prog}: error: {message}")


def _positive(text: str) -> float:
    x = _finite(text)
    if x <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return x


def _finite(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return x


def _nonneg(text: str) -> float:
    x = _finite(text)
    if x < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text!r}")
    return x


def _float_list(text: str) -> list[float]:
    try:
        return [_finite(s) for s in text.split(",") if s.strip()]
    except argparse.ArgumentTypeError as e:
        raise argparse.ArgumentTypeError(f"bad list {text!r}: {e}") from None


def _placement(text: str) -> FramePlacement:
    vals = _float_list(text)
    if len(vals) != 6:
        raise argparse.ArgumentTypeError("placement needs six numbers x,y,z,vx,vy,vz")
    v = np.array(vals[3:])
    if np.linalg.norm(v) == 0:
        raise argparse.ArgumentTypeError("placement direction is zero")
    return FramePlacement.normalized(vals[:3], v)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", type=_nonneg, default=0.5, help="geodesic parameter a >= 0")
    common.add_argument("--b", type=_finite, default=1.0, help="geodesic parameter b")
    common.add_argument("--t-max", type=_positive, default=10.0)
    common.add_argument("--dt-out", type=_positive, default=0.01)
    common.add_argument("--rel-tol", type=_positive, default=1e-10)
    common.add_argument("--abs-tol", type=_positive, default=1e-12)
    common.add_argument("--out", default=None, help="output file (default: standard output)")
    common.add_argument("--format", choices=("csv", "json"), default=None)

    parser = _Parser(prog="bicycle-geodesics", description="Bicycle geodesics in R^3.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("simulate", parents=[common], help="integrate the geodesic equations, write a track")
    sub.add_parser("closed-form", parents=[common], help="evaluate the elliptic-function track")
    sub.add_parser("monodromy", parents=[common], help="closed-form and numeric monodromy report")
    sub.add_parser("correspond", parents=[common], help="bicycle correspondence report")
    sh = sub.add_parser("shoot", parents=[common], help="connect two frame placements")
    sh.add_argument("--seed", type=int, default=0, help="restart seed")
    sh.add_argument("--start", type=_placement, default=None, help="x,y,z,vx,vy,vz")
    sh.add_argument("--target", type=_placement, default=None, help="x,y,z,vx,vy,vz")
    ck = sub.add_parser("check", parents=[common], help="run invariant suites")
    ck.add_argument("--suite", choices=("all",) + SUITES, default="all")
    sw = sub.add_parser("sweep", parents=[common], help="summary table over an (a, b) grid")
    sw.add_argument("--grid-a", type=_float_list, default=[0.3, 0.7, 1.0, 1.5])
    sw.add_argument("--grid-b", type=_float_list, default=[0.0, 0.5, 1.0, 2.0])
    return parser


# -- output helpers ---------------------------------------------------------------------


def _g(x: float) -> str:
    return "%.17g" % x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_g(float(x)) for x in row) + "\n")
    return buf.getvalue()


def _emit(text: str, path: str | None, out):
    if path is None:
        out.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _track_text(table: np.ndarray, fmt: str, extra: dict | None = None) -> str:
    if fmt == "json":
        doc = dict(extra or {})
        doc["columns"] = list(TRACK_HEADER)
        doc["rows"] = table
        return dumps(doc)
    return csv_text(TRACK_HEADER, table)


def _times(t_max: float, dt: float) -> np.ndarray:
    n = int(math.floor(t_max / dt * (1 + 1e-12))) + 1
    return np.arange(n) * dt


# -- subcommands ---------------------------------------------------------------------------


def _numeric_track(cfg: RunConfig, params: GeodesicParams):
    path = integrate(peak_initial_state(cfg.a, cfg.b), cfg.t_max, cfg.integration())
    series = frenet_series(path, params)
    return path, np.column_stack([path.t, path.x, path.y, series.kappa, series.tau])


def cmd_simulate(cfg: RunConfig, ns, out) -> int:
    params = GeodesicParams.from_ab(cfg.a, cfg.b)
    _, table = _numeric_track(cfg, params)
    _emit(_track_text(table, cfg.format or "csv", {"params": {"a": cfg.a, "b": cfg.b}}), cfg.output_path, out)
    return 0


def closed_form_table(params: GeodesicParams, t: np.ndarray) -> np.ndarray:
    front = closedform.front_track_array(t, params)
    back = np.array([closedform.back_track_cartesian(float(s), params) for s in t])
    kappa = np.atleast_1d(closedform.kappa_closed(t, params))
    tau = np.broadcast_to(np.atleast_1d(closedform.tau_closed(t, params)), t.shape)
    return np.column_stack([t, front, back, kappa, tau])


def cmd_closed_form(cfg: RunConfig, ns, out) -> int:
    params = GeodesicParams.from_ab(cfg.a, cfg.b)
    table = closed_form_table(params, _times(cfg.t_max, cfg.dt_out))
    _emit(_track_text(table, cfg.format or "csv", {"params": {"a": cfg.a, "b": cfg.b}}), cfg.output_path, out)
    return 0


def monodromy_report(cfg: RunConfig) -> dict:
    params = GeodesicParams.from_ab(cfg.a, cfg.b)
    dtheta, dz = closedform.monodromy_angles(params)
    T = params.period_T
    path = integrate(peak_initial_state(cfg.a, cfg.b), 2 * T + cfg.dt_out, cfg.integration())
    M = extract_monodromy(path, params)
    conj = {"angle_I": None, "matches": None}
    if params.b != 0.0:
        rep = conjecture_check(path, params)
        conj = {"angle_I": rep.angle_I, "matches": rep.matches}
    return {
        "params": {"a": cfg.a, "b": cfg.b},
        "period": T,
        "closed": {"dtheta": wrap_angle(dtheta), "dz": dz},
        "numeric": {
            "dtheta": M.delta_theta,
            "dz": M.delta_z,
            "axis_point": M.axis_point,
            "axis_dir": M.axis_dir,
            "residual": M.residual,
        },
        "conjecture": conj,
    }


def cmd_monodromy(cfg: RunConfig, ns, out) -> int:
    _emit(dumps(monodromy_report(cfg)), cfg.output_path, out)
    return 0


def cmd_correspond(cfg: RunConfig, ns, out) -> int:
    params = GeodesicParams.from_ab(cfg.a, cfg.b)
    T = params.period_T
    span = max(cfg.t_max, 2 * T + cfg.dt_out) if math.isfinite(T) else cfg.t_max
    path = integrate(peak_initial_state(cfg.a, cfg.b), span, cfg.integration())
    M = extract_monodromy(path, params)
    report = {
        "params": {"a": cfg.a, "b": cfg.b},
        "period": T,
        "M": {"dtheta": M.delta_theta, "dz": M.delta_z, "axis_point": M.axis_point, "axis_dir": M.axis_dir,
              "residual": M.residual},
        "kappa_shift_residual": kappa_shift_residual(path, params),
    }
    if params.b != 0.0:
        I = half_monodromy(path, params, M)
        rep = conjecture_check(path, params)
        report["I"] = {"dtheta": I.delta_theta, "dz": I.delta_z, "axis_point": I.axis_point,
                       "axis_dir": I.axis_dir, "residual": I.residual}
        report["dz_half_residual"] = abs(I.delta_z - M.delta_z / 2)
        report["conjecture"] = {"angle_I": rep.angle_I, "matches": rep.matches, "expected": rep.expected,
                                "deviation": rep.deviation}
    if cfg.output_path is not None:
        flipped = flip_states(path.states())
        header = ("t", "fx", "fy", "fz", "bx", "by", "bz", "gx", "gy", "gz")
        table = np.column_stack([path.t, path.x, path.y, flipped[:, 0:3]])
        if (cfg.format or "csv") == "json":
            text = dumps({"columns": list(header), "rows": table})
        else:
            text = csv_text(header, table)
        _emit(text, cfg.output_path, out)
    out.write(dumps(report))
    return 0


def cmd_shoot(cfg: RunConfig, ns, out) -> int:
    start, target = ns.start, ns.target
    if (start is None) != (target is None):
        raise _ArgError("shoot: give both --start and --target, or neither")
    if start is None:
        # forward-generate a target from the (a, b) geodesic through the peak seed
        s0 = peak_initial_state(cfg.a, cfg.b)
        path = integrate(s0, cfg.t_max, cfg.integration(dt_out=cfg.t_max))
        end = path.states_at([cfg.t_max])[0]
        start = FramePlacement(s0.x, s0.v)
        target = FramePlacement.normalized(end[0:3], end[3:6])
    sols = shoot(start, target, ShootingOptions(seed=ns.seed))
    doc = {
        "start": {"x": start.x, "v": start.v},
        "target": {"x": target.x, "v": target.v},
        "solutions": [
            {"p": s.p, "duration": s.duration, "residual": s.residual, "iterations": s.iterations,
             "converged": s.converged, "xdot0": s.xdot0}
            for s in sols
        ],
    }
    _emit(dumps(doc), cfg.output_path, out)
    return 0


# -- check suites -----------------------------------------------------------------------


def _suite_elliptic() -> list[tuple[str, float, float]]:
    out = []
    worst_leg = worst_id = 0.0
    for m in np.linspace(0.05, 0.95, 7):
        mod = elliptic.Modulus.from_m(float(m))
        modc = elliptic.Modulus.from_m(1.0 - float(m))
        K, E = elliptic.complete_k(mod), elliptic.complete_e(mod)
        Kc, Ec = elliptic.complete_k(modc), elliptic.complete_e(modc)
        worst_leg = max(worst_leg, abs(E * Kc + Ec * K - K * Kc - math.pi / 2))
        for u in np.linspace(-3.0, 3.0, 9):
            sn, cn, dn = elliptic.jacobi_sn_cn_dn(float(u), mod)
            worst_id = max(worst_id, abs(sn * sn + cn * cn - 1), abs(dn * dn + m * sn * sn - 1))
    out.append(("legendre relation", worst_leg, 1e-12))
    out.append(("sn/cn/dn identities", worst_id, 1e-12))
    return out


_CHECK_GRID = ((0.5, 1.0), (1.0, 1.0), (1.5, 0.0), (0.3, 2.0))


def _suite_invariants(cfg: RunConfig) -> list[tuple[str, float, float]]:
    out = []
    for a, b in _CHECK_GRID:
        params = GeodesicParams.from_ab(a, b)
        path = integrate(peak_initial_state(a, b), 2 * params.period_T, cfg.integration())
        out.append((f"invariant drift ({a:g},{b:g})", invariant_report(path).max_drift(), 1e-9))
        res = structure_residuals(path, params=params)
        tors = res.torsion[np.isfinite(res.torsion)]
        out.append((f"torsion relation ({a:g},{b:g})", float(np.max(np.abs(tors))) if tors.size else 0.0, 1e-8))
        worst = max((r for _, _, r in back_frame_events(path, params)), default=0.0)
        out.append((f"back frame at kappa max ({a:g},{b:g})", worst, 1e-7))
    return out


def _suite_closedform(cfg: RunConfig) -> list[tuple[str, float, float]]:
    out = []
    for a, b in _CHECK_GRID:
        params = GeodesicParams.from_ab(a, b)
        T = params.period_T
        path = integrate(peak_initial_state(a, b), 2 * T + cfg.dt_out, cfg.integration())
        ksq = np.einsum("ij,ij->i", path.r, path.r) - b * b
        err = float(np.max(np.abs(ksq - closedform.kappa_sq_closed(path.t, params))))
        out.append((f"kappa^2 closed vs numeric ({a:g},{b:g})", err, 1e-7))
        M = extract_monodromy(path, params)
        dtheta, dz = closedform.monodromy_angles(params)
        out.append((f"monodromy angle ({a:g},{b:g})", angle_distance(M.delta_theta, dtheta), 1e-6))
        out.append((f"monodromy shift ({a:g},{b:g})", abs(M.delta_z - dz), 1e-6))
    return out


def _suite_transforms(cfg: RunConfig) -> list[tuple[str, float, float]]:
    out = []
    for a, b in _CHECK_GRID:
        params = GeodesicParams.from_ab(a, b)
        path = integrate(peak_initial_state(a, b), 2 * params.period_T + cfg.dt_out, cfg.integration())
        out.append((f"flipped kappa shift ({a:g},{b:g})", kappa_shift_residual(path, params), 1e-6))
        if b != 0.0:
            rep = conjecture_check(path, params)
            out.append((f"conjecture angle ({a:g},{b:g})", rep.deviation, 1e-4))
    for a, b in ((2.0, 1.0), (0.5, 0.5), (3.0, 2.0)):
        ts = torsion_shift_rescale(GeodesicParams.from_ab(a, b))
        out.append((f"torsion shift ({a:g},{b:g})", max(ts.kappa_residual, ts.tau_residual), 1e-8))
    return out


def cmd_check(cfg: RunConfig, ns, out) -> int:
    suites = SUITES if ns.suite == "all" else (ns.suite,)
    results = []
    for name in suites:
        if name == "elliptic":
            results += _suite_elliptic()
        else:
            results += globals()[f"_suite_{name}"](cfg)
    failed = 0
    lines = []
    for label, value, tol in results:
        ok = value <= tol
        failed += not ok
        lines.append(f"{'PASS' if ok else 'FAIL'} {label}: {value:.3e} (tol {tol:g})")
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    _emit("\n".join(lines) + "\n", cfg.output_path, out)
    if failed:
        print(f"check: {failed} invariant violation(s)", file=sys.stderr)
        return EXIT_CHECK
    return 0


# -- sweep ---------------------------------------------------------------------------------------

SWEEP_HEADER = ("a", "b", "period", "dtheta", "dz", "kappa_sq_err", "drift", "monodromy_err")


def is_singular(a: float, b: float) -> str | None:
    if abs(a - 1.0) <= SINGULAR_TOL and abs(b) <= SINGULAR_TOL:
        return "soliton (a=1, b=0)"
    if abs(a * a + b * b - a) <= SINGULAR_TOL:
        return "track meets the axis (a^2+b^2=a)"
    return None


def sweep_point(a: float, b: float, cfg: RunConfig) -> tuple[float, ...]:
    params = GeodesicParams.from_ab(a, b)
    nan = math.nan
    if params.p_norm == 0.0:
        path = integrate(peak_initial_state(a, b), 2 * math.pi, cfg.integration())
        return (a, b, 2 * math.pi, nan, nan, nan, invariant_report(path).max_drift(), nan)
    dtheta, dz = closedform.monodromy_angles(params)
    T = params.period_T
    path = integrate(peak_initial_state(a, b), 2 * T + cfg.dt_out, cfg.integration())
    ksq = np.einsum("ij,ij->i", path.r, path.r) - b * b
    kerr = float(np.max(np.abs(ksq - closedform.kappa_sq_closed(path.t, params))))
    drift = invariant_report(path).max_drift()
    if a == 0.0:
        merr = nan
    else:
        M = extract_monodromy(path, params)
        merr = max(angle_distance(M.delta_theta, dtheta), abs(M.delta_z - dz))
    return (a, b, T, dtheta, dz, kerr, drift, merr)


def cmd_sweep(cfg: RunConfig, ns, out) -> int:
    points = []
    for a in ns.grid_a:
        for b in ns.grid_b:
            why = is_singular(a, b)
            if why:
                log.warning("sweep: excluding (%g, %g): %s", a, b, why)
                continue
            if a < 0:
                raise _ArgError(f"sweep: a must be nonnegative, got {a:g}")
            points.append((a, b))
    with ThreadPoolExecutor() as pool:
        rows = list(pool.map(lambda ab: sweep_point(ab[0], ab[1], cfg), points))
    if (cfg.format or "csv") == "json":
        text = dumps({"columns": list(SWEEP_HEADER), "rows": rows})
    else:
        text = csv_text(SWEEP_HEADER, rows)
    _emit(text, cfg.output_path, out)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "closed-form": cmd_closed_form,
    "monodromy": cmd_monodromy,
    "correspond": cmd_correspond,
    "shoot": cmd_shoot,
    "check": cmd_check,
    "sweep": cmd_sweep,
}


def run(argv=None, out=None) -> int:
    """Run the CLI; returns the process exit code."""
    out = out or sys.stdout
    if not logging.getLogger().handlers:
        logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(message)s")
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        cfg = RunConfig.from_args(ns)
        return COMMANDS[ns.command](cfg, ns, out)
    except _ArgError as e:
        print(str(e), file=sys.stderr)
        return EXIT_ARGS
    except GeodesicError as e:
        print(f"{getattr(ns, 'command', 'error')}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())
