"""Command-line front end: named experiments, CSV/SVG artifacts, verification.

Every output file starts with a header line recording the package version,
the seed and a hash of the effective configuration, so artifacts are
traceable and golden-file comparisons are meaningful.  All stochastic
commands require ``--seed`` and are bit-reproducible under it.

Exit codes: 0 success, 1 check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, device, logic, qec, readout, verify
from .braid import BRAID_TARGET, BraidDemo, pflip_experiment
from .algebra import phase_distance
from .svgplot import svg_line_chart


def _config_hash(options: dict) -> str:
    blob = json.dumps(options, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _header(seed, options: dict) -> str:
    return f"# fluxqc {__version__} seed={seed} config={_config_hash(options)}"


def _write_csv(path: Path, header: str, columns, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(row)
    path.write_text(header + "\n" + buf.getvalue(), encoding="utf-8")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_circuit(args) -> device.CircuitParams:
    if getattr(args, "params", None):
        return device.load_params(args.params)
    return device.default_circuit_params()


def _pflip_rows(args, unitary, model):
    rows = []
    for n in range(1, args.cycles + 1):
        res = pflip_experiment(n, args.shots, rng_seed=args.seed + n,
                               braid_unitary=unitary, photon_model=model)
        rows.append([n, res.flips, res.shots, repr(res.estimate),
                     repr(res.ci_low), repr(res.ci_high)])
    return rows


def cmd_braid_demo(args) -> int:
    out = _outdir(args)
    header = _header(args.seed, vars(args))
    params = _load_circuit(args)
    demo = BraidDemo.build(params=params, coupling_ratio=args.ratio)
    path = demo.cycle_path()
    delta_max = float(np.linalg.norm(path(0.0), 2))
    hol = demo.holonomy(n_points=args.points,
                        compare_total_time=1000.0 / delta_max)
    distance = phase_distance(hol.qubit_unitary, BRAID_TARGET)
    u = hol.qubit_unitary
    _write_csv(out / "holonomy.csv", header,
               ["u00", "u01", "u10", "u11", "leakage", "diabatic_error",
                "distance_to_target"],
               [[repr(u[0, 0]), repr(u[0, 1]), repr(u[1, 0]), repr(u[1, 1]),
                 repr(hol.leakage), repr(hol.diabatic_error), repr(distance)]])
    model = readout.PhotonCountModel(lambda_plus=params.lambda_plus,
                                     lambda_minus=params.lambda_minus)
    _write_csv(out / "pflip.csv", header,
               ["n", "flips", "shots", "estimate", "ci_low", "ci_high"],
               _pflip_rows(args, u, model))
    ok = distance <= 1e-3 and (hol.diabatic_error or 0.0) <= 1e-4
    print(f"holonomy distance to target: {distance:.3e} "
          f"(leakage {hol.leakage:.2e}, route gap {hol.diabatic_error:.2e})")
    return 0 if ok else 1


def cmd_pflip(args) -> int:
    out = _outdir(args)
    header = _header(args.seed, vars(args))
    params = _load_circuit(args)
    demo = BraidDemo.build(params=params, coupling_ratio=args.ratio)
    unitary = demo.holonomy(n_points=args.points).qubit_unitary
    model = readout.PhotonCountModel(lambda_plus=params.lambda_plus,
                                     lambda_minus=params.lambda_minus)
    rows = _pflip_rows(args, unitary, model)
    _write_csv(out / "pflip.csv", header,
               ["n", "flips", "shots", "estimate", "ci_low", "ci_high"], rows)
    for row in rows:
        print(f"n={row[0]}: p_flip = {float(row[3]):.4f}")
    return 0


def cmd_readout(args) -> int:
    out = _outdir(args)
    header = _header(args.seed, vars(args))
    params = _load_circuit(args)
    x_max = params.x_max
    spectrum = device.transmon_levels(
        params.transmon.josephson_zero * math.cos(x_max),
        params.transmon.charging)
    d_plus, d_minus = device.pi_delta_pm(device.delta_pm_base(spectrum), x_max)
    rp = readout.ReadoutParams(cavity_freq=args.omega_cavity,
                               qubit_freq=args.omega_cavity + args.detuning,
                               coupling=args.g, delta_plus=d_plus,
                               delta_minus=d_minus, cavity_decay=args.kappa)
    model = readout.PhotonCountModel(lambda_plus=params.lambda_plus,
                                     lambda_minus=params.lambda_minus,
                                     measurement_time=args.t_m)
    err = readout.measurement_error(model)
    _write_csv(out / "readout.csv", header,
               ["omega_eff_plus", "omega_eff_minus", "shift_formula",
                "delta_plus", "delta_minus", "eps_om_exact", "eps_om_asymptotic"],
               [[repr(readout.dispersive_frequency(rp, +1)),
                 repr(readout.dispersive_frequency(rp, -1)),
                 repr(readout.frequency_shift(rp)),
                 repr(d_plus), repr(d_minus),
                 repr(err.exact), repr(err.asymptotic)]])
    if args.shots:
        rng = np.random.default_rng(args.seed)
        rows = []
        for _ in range(args.shots):
            parity = +1 if rng.random() < 0.5 else -1
            outcome, n_ph = readout.simulate_readout(parity, model, rng)
            rows.append([parity, n_ph, outcome, repr(model.lambda_plus),
                         repr(model.lambda_minus), repr(model.measurement_time)])
        _write_csv(out / "samples.csv", header,
                   ["parity", "n_ph", "outcome", "lambda_plus", "lambda_minus",
                    "t_m"], rows)
    print(f"frequency shift {readout.frequency_shift(rp):.4e} GHz, "
          f"eps_om = {err.exact:.3e}")
    return 0


def cmd_cnot_verify(args) -> int:
    out = _outdir(args)
    header = _header(args.seed, vars(args))
    ok = verify._cnot_branches_ok()
    rng = np.random.default_rng(args.seed)
    reg = logic.LogicalRegister(3, logic.product_state(
        [0, 1], [1, 0], np.array([1, 1]) / math.sqrt(2)))
    record = logic.cnot(reg, 0, 1, 2, rng)
    (out / "cnot_records.csv").write_text(
        header + "\n" + record.to_csv(), encoding="utf-8")
    print(f"cnot branch verification: {'pass' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_cluster(args) -> int:
    out = _outdir(args)
    header = _header(args.seed, vars(args))
    n = args.rows * args.cols
    reg = logic.LogicalRegister(n)
    rng = np.random.default_rng(args.seed)
    record = logic.prepare_cluster_state(reg, args.rows, args.cols, rng)
    rows = []
    ok = True
    for site in range(n):
        val = reg.expectation(logic.cluster_stabilizer(reg, args.rows,
                                                       args.cols, site))
        rows.append([site, repr(val)])
        ok = ok and abs(val - 1.0) <= 1e-10
    _write_csv(out / "cluster_stabilizers.csv", header,
               ["site", "expectation"], rows)
    (out / "cluster_records.csv").write_text(
        header + "\n" + record.to_csv(), encoding="utf-8")
    print(f"{args.rows}x{args.cols} cluster stabilizers all +1: {ok}")
    return 0 if ok else 1


def _memory_point(task):
    ratio_g, ratio_m, arch = task
    res = qec.memory_threshold(ratio_g, ratio_m, ratio_m, arch)
    return [arch, repr(ratio_g), repr(ratio_m), repr(ratio_m),
            repr(res.threshold), res.n_star]


def _computation_point(task):
    m_period, ratio, arch = task
    res = qec.computation_threshold(ratio, ratio, ratio, m_period, arch)
    return [arch, m_period, repr(ratio), repr(res.threshold)]


def cmd_thresholds(args) -> int:
    out = _outdir(args)
    header = _header(args.seed, vars(args))
    archs = ("ramm", "reference") if args.arch == "both" else (args.arch,)
    ratios = [float(r) for r in args.ratios.split(",") if r]
    if args.grid < 2 or not ratios:
        print("empty sweep grid", file=sys.stderr)
        return 2

    if args.mode == "memory":
        grid = np.logspace(-1, 1, args.grid)
        tasks = [(float(g), rm, arch) for rm in ratios for g in grid
                 for arch in archs]
        rows = _map_tasks(_memory_point, tasks, args.jobs)
        _write_csv(out / "memory_thresholds.csv", header,
                   ["arch", "eps_ratio_g", "eps_ratio_dm", "eps_ratio_om",
                    "threshold", "n_star"], rows)
        if args.arch == "both":
            series = []
            for rm in ratios:
                pts = {}
                for row in rows:
                    if float(row[2]) == rm:
                        pts.setdefault(row[0], {})[float(row[1])] = float(row[4])
                xs = sorted(pts["ramm"])
                ys = [pts["ramm"][x] / pts["reference"][x] for x in xs]
                series.append((f"om=dm={rm:g}", xs, ys))
            (out / "memory_ratio.svg").write_text(
                svg_line_chart(series, "Memory threshold ratio",
                               "gate / storage error ratio",
                               "ramm / reference threshold", logx=True),
                encoding="utf-8")
            _write_csv(out / "memory_ratio.csv", header,
                       ["eps_ratio_om", "eps_ratio_g", "ratio"],
                       [[repr(float(label.split("=")[-1])), repr(x), repr(y)]
                        for label, xs, ys in series for x, y in zip(xs, ys)])
    else:
        periods = list(range(11, 11 + 3 * args.grid, 3))
        tasks = [(m, r, arch) for r in ratios for m in periods for arch in archs]
        rows = _map_tasks(_computation_point, tasks, args.jobs)
        _write_csv(out / "computation_thresholds.csv", header,
                   ["arch", "m_period", "eps_ratio", "threshold"], rows)
        if args.arch == "both":
            series = []
            for r in ratios:
                pts = {}
                for row in rows:
                    if float(row[2]) == r:
                        pts.setdefault(row[0], {})[int(row[1])] = float(row[3])
                xs = sorted(pts["ramm"])
                ys = [pts["ramm"][x] / pts["reference"][x] for x in xs]
                series.append((f"eps/st={r:g}", xs, ys))
            (out / "computation_ratio.svg").write_text(
                svg_line_chart(series, "Computation threshold ratio",
                               "steps per two-qubit gate M",
                               "ramm / reference threshold"),
                encoding="utf-8")
    print(f"wrote threshold sweep ({args.mode}, {len(rows)} rows)")
    return 0


def _map_tasks(fn, tasks, jobs):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def cmd_regime_check(args) -> int:
    out = _outdir(args)
    header = _header(args.seed, vars(args))
    params = device.reference_regime_params()
    if args.kbt is not None:
        from dataclasses import replace
        params = replace(params, k_b_t=args.kbt)
    report = device.validate_regime(params)
    _write_csv(out / "regime.csv", header,
               ["inequality", "lhs", "rhs", "satisfied"],
               [[name, repr(lhs), repr(rhs), int(ok)]
                for name, lhs, rhs, ok in report.checks])
    for name, lhs, rhs, ok in report.checks:
        print(f"{'ok  ' if ok else 'FAIL'} {name}: {lhs:.4g} vs {rhs:.4g}")
    return 0 if report.all_satisfied else 1


def cmd_coupling_sweep(args) -> int:
    out = _outdir(args)
    header = _header(args.seed, vars(args))
    import warnings
    ratios = np.logspace(math.log10(args.lo), math.log10(args.hi), args.grid)
    rows = []
    for r in ratios:
        isl = device.IslandParams(josephson_zero=float(r), charging=1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            asym = device.coulomb_coupling_asymptotic(isl)
        exact = device.coulomb_coupling_exact(isl)
        rows.append([repr(float(r)), repr(exact), repr(asym),
                     repr(abs(asym - exact) / exact)])
    _write_csv(out / "coupling.csv", header,
               ["ej_over_ec", "exact", "asymptotic", "rel_error"], rows)
    (out / "coupling.svg").write_text(
        svg_line_chart([("exact", [float(r[0]) for r in rows],
                         [float(r[1]) for r in rows]),
                        ("asymptotic", [float(r[0]) for r in rows],
                         [float(r[2]) for r in rows])],
                       "Coulomb coupling vs E_J/E_C", "E_J / E_C",
                       "U (units of E_C)", logy=True),
        encoding="utf-8")
    print(f"coupling sweep over E_J/E_C in [{args.lo:g}, {args.hi:g}]")
    return 0


def cmd_verify(args) -> int:
    if args.mutate == "delta-sign":
        with verify.mutate_delta_sign():
            results = verify.run_checks(args.filter, seed=args.seed)
    else:
        results = verify.run_checks(args.filter, seed=args.seed)
    if not results:
        print(f"no checks match filter {args.filter!r}", file=sys.stderr)
        return 2
    for res in results:
        print(f"[{'PASS' if res.passed else 'FAIL'}] {res.name}: {res.detail}")
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxqc",
        description="Flux-controlled Majorana quantum computation laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_required=True):
        p.add_argument("--out", default="fluxqc-out", help="output directory")
        p.add_argument("--seed", type=int, required=seed_required,
                       help="RNG seed (stochastic commands demand one)")
        p.add_argument("--params", default=None,
                       help="JSON circuit parameter file")
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("braid-demo", help="holonomy + flip-statistics artifact")
    common(p)
    p.add_argument("--ratio", type=float, default=1e-4)
    p.add_argument("--points", type=int, default=2400)
    p.add_argument("--cycles", type=int, default=8)
    p.add_argument("--shots", type=int, default=10 ** 4)
    p.set_defaults(fn=cmd_braid_demo)

    p = sub.add_parser("pflip", help="flip probability table")
    common(p)
    p.add_argument("--ratio", type=float, default=1e-4)
    p.add_argument("--points", type=int, default=2400)
    p.add_argument("--cycles", type=int, default=8)
    p.add_argument("--shots", type=int, default=10 ** 4)
    p.set_defaults(fn=cmd_pflip)

    p = sub.add_parser("readout", help="dispersive readout summary and samples")
    common(p)
    p.add_argument("--omega-cavity", type=float, default=90.0)
    p.add_argument("--detuning", type=float, default=5.0)
    p.add_argument("--g", type=float, default=0.1)
    p.add_argument("--kappa", type=float, default=0.01)
    p.add_argument("--t-m", type=float, default=100.0)
    p.add_argument("--shots", type=int, default=0)
    p.set_defaults(fn=cmd_readout)

    p = sub.add_parser("cnot-verify", help="branch-exhaustive CNOT verification")
    common(p)
    p.set_defaults(fn=cmd_cnot_verify)

    p = sub.add_parser("cluster", help="prepare and verify a 2D cluster state")
    common(p)
    p.add_argument("--rows", type=int, default=3)
    p.add_argument("--cols", type=int, default=3)
    p.set_defaults(fn=cmd_cluster)

    p = sub.add_parser("thresholds", help="error-threshold sweeps and figures")
    common(p, seed_required=False)
    p.set_defaults(seed=0)
    p.add_argument("--mode", choices=("memory", "computation"),
                   default="memory")
    p.add_argument("--grid", type=int, default=9)
    p.add_argument("--ratios", default="1,2,5,10",
                   help="comma list of eps_om/eps_st (= eps_dm/eps_st) values")
    p.add_argument("--arch", choices=("both", "ramm", "reference"),
                   default="both")
    p.set_defaults(fn=cmd_thresholds)

    p = sub.add_parser("regime-check", help="operating-regime inequalities")
    common(p, seed_required=False)
    p.set_defaults(seed=0)
    p.add_argument("--kbt", type=float, default=None,
                   help="override the thermal energy (GHz)")
    p.set_defaults(fn=cmd_regime_check)

    p = sub.add_parser("coupling-sweep", help="exact vs asymptotic Coulomb coupling")
    common(p, seed_required=False)
    p.set_defaults(seed=0)
    p.add_argument("--lo", type=float, default=2.0)
    p.add_argument("--hi", type=float, default=100.0)
    p.add_argument("--grid", type=int, default=25)
    p.set_defaults(fn=cmd_coupling_sweep)

    p = sub.add_parser("verify", help="run the acceptance checks")
    common(p, seed_required=False)
    p.set_defaults(seed=0)
    p.add_argument("--filter", default="", help="substring filter on check names")
    p.add_argument("--mutate", choices=("none", "delta-sign"), default="none",
                   help="inject a deliberate fault (testing the tests)")
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
