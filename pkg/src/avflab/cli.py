"""Command line front end: ``avflab run | list-problems | sweep | compare``."""
import argparse
import csv
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__, kernels
from .config import ConfigError, load
from .diagnostics import energy_drift, global_error, monotonicity_verdict
from .integrators import integrate, reference_solution
from .solve import SolverError
from .zoo import PROBLEMS, _snake, build_problem, initial_condition

EXIT_OK = 0
EXIT_SOLVER = 3
EXIT_CONFIG = 2

ENERGY_COLUMNS = ("step", "t", "monitor", "H_bar", "H_bar_dx", "drift_abs", "drift_rel")


def _f(x):
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_kv(path, items):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for k, v in items:
            fh.write(f"{k} = {v}\n")


@dataclass
class RunResult:
    cfg: object
    out_dir: Path
    trajectory: object = None
    status: str = "ok"
    error: str = ""
    verdicts: dict = field(default_factory=dict)
    max_drift_rel: dict = field(default_factory=dict)

    @property
    def exit_code(self):
        return EXIT_OK if self.status == "ok" else EXIT_SOLVER


def energy_rows(traj):
    rows = []
    drifts = {m: energy_drift(traj, m) for m in traj.energies}
    for i, (n, t) in enumerate(zip(traj.steps, traj.times)):
        for m, series in traj.energies.items():
            d = drifts[m]
            rows.append((int(n), _f(t), m, _f(series[i]), _f(series[i] * traj.dx_volumes[m]),
                         _f(d.absolute[i]), _f(d.relative[i])))
    return rows


def svg_line_chart(series, title="", xlabel="", ylabel="", width=640, height=400):
    """Minimal SVG polyline chart; ``series`` maps a label to ``(x, y)`` arrays."""
    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")
    ml, mr, mt, mb = 80, 20, 30, 50
    xs = np.concatenate([np.asarray(x, float) for x, _ in series.values()]) if series else np.zeros(1)
    ys = np.concatenate([np.asarray(y, float) for _, y in series.values()]) if series else np.zeros(1)
    ys = ys[np.isfinite(ys)] if np.any(np.isfinite(ys)) else np.zeros(1)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 1.0, y1 + 1.0
    pw, ph = width - ml - mr, height - mt - mb

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#000"/>',
           f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="14">{title}</text>',
           f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle" font-size="12">{xlabel}</text>',
           f'<text x="14" y="{height / 2}" text-anchor="middle" font-size="12" '
           f'transform="rotate(-90 14 {height / 2})">{ylabel}</text>',
           f'<text x="{ml - 4}" y="{mt + 10}" text-anchor="end" font-size="10">{y1:.3g}</text>',
           f'<text x="{ml - 4}" y="{mt + ph}" text-anchor="end" font-size="10">{y0:.3g}</text>',
           f'<text x="{ml}" y="{mt + ph + 14}" text-anchor="middle" font-size="10">{x0:.3g}</text>',
           f'<text x="{ml + pw}" y="{mt + ph + 14}" text-anchor="middle" font-size="10">{x1:.3g}</text>']
    for k, (label, (x, y)) in enumerate(series.items()):
        c = colors[k % len(colors)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y) if np.isfinite(b))
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{ml + 8}" y="{mt + 16 + 14 * k}" font-size="11" fill="{c}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _versions():
    return [("version.avflab", __version__), ("version.python", platform.python_version()),
            ("version.numpy", np.__version__), ("version.scipy", scipy.__version__),
            ("kernel_backend", kernels.BACKEND)]


def run_experiment(cfg, out_dir=None):
    """Integrate one configured experiment and write its output files.

    Solver failures are caught: the partial trajectory is written and the
    result carries ``status = "nonconvergence"``.
    """
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    spec = cfg.problem_spec()
    system = build_problem(spec)
    u0 = initial_condition(spec, system)
    out.mkdir(parents=True, exist_ok=True)
    res = RunResult(cfg, out)
    try:
        traj = integrate(system, u0, cfg.scheme, cfg.dt, cfg.steps, cfg.solver, record_every=cfg.record_every)
    except SolverError as exc:
        traj = getattr(exc, "partial", None)
        res.status = "nonconvergence"
        step = getattr(exc, "failed_step", "")
        res.error = f"step {step}: {exc}".replace("\n", " ")
    res.trajectory = traj
    if traj is not None:
        _emit(res, system)
    _write_manifest(res)
    return res


def _emit(res, system):
    traj, cfg, out = res.trajectory, res.cfg, res.out_dir
    for m in system.monitors:
        res.max_drift_rel[m.name] = energy_drift(traj, m.name).max_rel
        if not system.conservative:
            res.verdicts[m.name] = monotonicity_verdict(traj.energies[m.name], slack=1e-10)
    if cfg.emit_csv:
        _write_csv(out / "energy.csv", ENERGY_COLUMNS, energy_rows(traj))
        _write_csv(out / "solver.csv", ("step", "iterations", "residual"),
                   [(n, s.iterations, _f(s.residual)) for n, s in enumerate(traj.solver_stats, 1)])
    np.savez(out / "states.npz", steps=traj.steps, times=traj.times, states=traj.states)
    if cfg.emit_svg:
        series = {m: (traj.times, energy_drift(traj, m).relative) for m in traj.energies}
        svg = svg_line_chart(series, f"{system.name} ({cfg.scheme})", "t", "relative energy drift")
        (out / "energy.svg").write_text(svg, encoding="utf-8")


def _write_manifest(res):
    items = list(res.cfg.to_items()) + _versions()
    items.append(("status", res.status))
    if res.error:
        items.append(("error", res.error))
    if res.trajectory is not None:
        items.append(("recorded_steps", len(res.trajectory.steps)))
        items.append(("last_step", int(res.trajectory.steps[-1])))
    for m, v in res.max_drift_rel.items():
        items.append((f"monitor.{m}.max_abs_drift_rel", _f(v)))
    for m, v in res.verdicts.items():
        items.append((f"monitor.{m}.monotonicity", "pass" if v.passed else "fail"))
        if not v.passed:
            items.append((f"monitor.{m}.monotonicity_first_increase_step", v.index + 1))
            items.append((f"monitor.{m}.monotonicity_increment", _f(v.magnitude)))
    _write_kv(res.out_dir / "manifest.txt", items)


def _parallel(fn, jobs, workers):
    # results come back in submission order whatever the completion order
    with ThreadPoolExecutor(max_workers=max(1, min(workers, len(jobs)))) as pool:
        return list(pool.map(fn, jobs))


def run_sweep(cfg, dts, out_dir=None, workers=4):
    """Run ``cfg`` at every step size in ``dts`` over the same horizon and
    compare each final state with the reference solution."""
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    t_end = cfg.dt * cfg.steps
    members = []
    for i, dt in enumerate(dts):
        n = int(round(t_end / dt))
        if n < 1 or not np.isclose(n * dt, t_end, rtol=1e-10):
            raise ConfigError(f"horizon {t_end!r} is not a multiple of dt={dt!r}")
        members.append((replace(cfg, dt=float(dt), steps=n, record_every=n), out / f"dt_{i}"))
    spec = cfg.problem_spec()
    system = build_problem(spec)
    u0 = initial_condition(spec, system)
    ref = reference_solution(system, u0, [0.0, t_end], tol=max(cfg.solver.tol, 1e-14)).final_state
    out.mkdir(parents=True, exist_ok=True)
    results = _parallel(lambda job: run_experiment(*job), members, workers)
    rows, errs = [], []
    for (c, d), r in zip(members, results):
        if r.status == "ok":
            e = float(np.sqrt(system.driver.dx_volume * np.sum((r.trajectory.final_state - ref) ** 2)))
        else:
            e = float("nan")
        errs.append(e)
        rows.append((_f(c.dt), c.steps, _f(e), r.status, d.name))
    _write_csv(out / "sweep.csv", ("dt", "steps", "error", "status", "dir"), rows)
    order = float("nan")
    ok = [(d, e) for d, e in zip(dts, errs) if np.isfinite(e) and e > 0]
    if len(ok) >= 2:
        order = float(np.polyfit(np.log([d for d, _ in ok]), np.log([e for _, e in ok]), 1)[0])
    _write_kv(out / "manifest.txt", list(cfg.to_items()) + _versions()
              + [("sweep.dts", ",".join(_f(d) for d in dts)), ("sweep.t_end", _f(t_end)),
                 ("sweep.observed_order", _f(order))])
    return order, errs, results


def run_compare(cfg, schemes, out_dir=None, workers=4):
    """Run ``cfg`` once per scheme and tabulate drift and global error
    against the reference solution on the recorded grid."""
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    members = [(replace(cfg, scheme=s), out / s) for s in schemes]
    for c, _ in members:
        c.validate()
    out.mkdir(parents=True, exist_ok=True)
    results = _parallel(lambda job: run_experiment(*job), members, workers)
    spec = cfg.problem_spec()
    system = build_problem(spec)
    u0 = initial_condition(spec, system)
    ok = [r for r in results if r.status == "ok"]
    ref = None
    if ok:
        ref = reference_solution(system, u0, ok[0].trajectory.times, tol=max(cfg.solver.tol, 1e-14))
    rows = []
    for s, r in zip(schemes, results):
        traj = r.trajectory
        if traj is None:
            continue
        err = global_error(traj, ref) if (ref is not None and r.status == "ok") else np.full(len(traj.times), np.nan)
        drifts = {m: energy_drift(traj, m) for m in traj.energies}
        for i, (n, t) in enumerate(zip(traj.steps, traj.times)):
            for m, d in drifts.items():
                rows.append((s, int(n), _f(t), m, _f(d.absolute[i]), _f(d.relative[i]), _f(err[i])))
    _write_csv(out / "compare.csv", ("scheme", "step", "t", "monitor", "drift_abs", "drift_rel", "global_error"),
               rows)
    items = list(cfg.to_items()) + _versions() + [("compare.schemes", ",".join(schemes))]
    for s, r in zip(schemes, results):
        items.append((f"compare.{s}.status", r.status))
        for m, v in r.max_drift_rel.items():
            items.append((f"compare.{s}.{m}.max_abs_drift_rel", _f(v)))
    _write_kv(out / "manifest.txt", items)
    return results


def _list_problems():
    lines = [f"{'name':<20} {'preset stem':<22} {'N':>5} {'dt':>10} {'steps':>6}  kind          summary"]
    for name, info in PROBLEMS.items():
        kind = "conservative" if info.conservative else "dissipative"
        lines.append(f"{name:<20} {_snake(name):<22} {info.N:>5} {info.dt:>10.6g} {info.steps:>6}  "
                     f"{kind:<13} {info.summary}")
    return "\n".join(lines)


def build_parser():
    p = argparse.ArgumentParser(prog="avflab", description="AVF method experiments")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="config file or preset name")
        sp.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
        sp.add_argument("--out", dest="out_dir", help="output directory (overrides out_dir)")

    common(sub.add_parser("run", help="run one experiment"))
    sub.add_parser("list-problems", help="list the problem zoo and presets")
    sw = sub.add_parser("sweep", help="step-size sweep with observed order")
    sw.add_argument("--dts", required=True, help="comma-separated step sizes")
    sw.add_argument("--workers", type=int, default=4)
    common(sw)
    cp = sub.add_parser("compare", help="run several schemes on one problem")
    cp.add_argument("--schemes", required=True, help="comma-separated schemes")
    cp.add_argument("--workers", type=int, default=4)
    common(cp)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "list-problems":
        print(_list_problems())
        return EXIT_OK
    overrides = list(args.overrides)
    if args.out_dir:
        overrides.append(f"out_dir={args.out_dir}")
    try:
        cfg = load(args.config, overrides)
        if args.command == "run":
            res = run_experiment(cfg)
            print(f"{res.status}: wrote {res.out_dir}")
            for m, v in res.max_drift_rel.items():
                print(f"  {m}: max |drift_rel| = {v:.3e}")
            for m, v in res.verdicts.items():
                print(f"  {m}: monotone {'pass' if v.passed else 'fail'}")
            if res.error:
                print(f"  {res.error}", file=sys.stderr)
            return res.exit_code
        if args.command == "sweep":
            dts = [float(s) for s in args.dts.split(",") if s.strip()]
            order, errs, results = run_sweep(cfg, dts, workers=args.workers)
            for d, e in zip(dts, errs):
                print(f"  dt={d:<10g} error={e:.6e}")
            print(f"observed order {order:.4f}")
            return max(r.exit_code for r in results)
        if args.command == "compare":
            schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
            results = run_compare(cfg, schemes, workers=args.workers)
            for s, r in zip(schemes, results):
                drift = ", ".join(f"{m}={v:.3e}" for m, v in r.max_drift_rel.items())
                print(f"  {s:<15} {r.status:<15} {drift}")
            return max(r.exit_code for r in results)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    return EXIT_OK  # pragma: no cover
