"""End-to-end correctness checks shared by the CLI and the acceptance suite.

Each check runs one pinned-tolerance scenario and reports pass/fail with a
one-line diagnostic.  Seeds are fixed so results are reproducible; a
deliberate fault can be injected (``mutate_delta_sign``) to demonstrate the
checks have teeth.
"""

from __future__ import annotations

import contextlib
import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import device, logic, qec, readout
from .algebra import build_majorana_set, parity_sector, phase_distance
from .braid import BRAID_TARGET, BraidDemo, pflip_experiment
from .device import FluxConfig, IslandParams


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


@contextlib.contextmanager
def mutate_delta_sign():
    """Flip the sign of the third pi-circuit coupling: a deliberate fault."""
    original = device.pi_couplings

    def broken(flux, u):
        cs = original(flux, u)
        delta = (cs.delta[0], cs.delta[1], -cs.delta[2])
        return device.CouplingSet(u=cs.u, delta=delta, labels=cs.labels)

    device.pi_couplings = broken
    try:
        yield
    finally:
        device.pi_couplings = original


def check_braid_holonomy(seed: int = 0) -> CheckResult:
    """Criterion 1: the braid cycle reproduces the target unitary, error ~ off/on ratio."""
    t0 = time.time()
    errors = {}
    for ratio in (1e-4, 1e-6):
        demo = BraidDemo.build(coupling_ratio=ratio)
        hol = demo.holonomy(n_points=2400)
        errors[ratio] = phase_distance(hol.qubit_unitary, BRAID_TARGET)
    elapsed = time.time() - t0
    ok = errors[1e-4] <= 1e-3 and errors[1e-6] < errors[1e-4] and elapsed < 10.0
    return CheckResult(
        "braid-holonomy", ok,
        f"err(1e-4)={errors[1e-4]:.2e} err(1e-6)={errors[1e-6]:.2e} "
        f"t={elapsed:.1f}s", elapsed)


def check_oracle_crosscheck(seed: int = 0) -> CheckResult:
    """Criterion 2: Wilson line vs integrated evolution; microscopic vs effective model."""
    t0 = time.time()
    demo = BraidDemo.build(coupling_ratio=1e-4)
    path = demo.cycle_path()
    delta_max = float(np.linalg.norm(path(0.0), 2))
    hol = demo.holonomy(n_points=2400, compare_total_time=1000.0 / delta_max,
                        n_slices=4000)
    route_gap = hol.diabatic_error

    mset10 = build_majorana_set(10)
    mset6 = build_majorana_set(6)
    rng = np.random.default_rng(seed + 11)
    u = 0.5 + rng.random(3)
    x = rng.uniform(-1.2, 1.2, size=4)
    x[0] = 0.0
    flux = FluxConfig(phases=tuple(x))
    spectra_err = {}
    for ratio in (100.0, 1000.0):
        e_m = ratio * u.max()
        w_micro = np.linalg.eigvalsh(
            device.microscopic_pi_hamiltonian(u, e_m, flux, mset10))
        w_eff = np.linalg.eigvalsh(device.effective_braiding_hamiltonian(
            device.pi_couplings(flux, u), mset6))
        low = w_micro[:8] - w_micro[:8].mean()
        eff = np.sort(w_eff) - w_eff.mean()
        spectra_err[ratio] = float(np.abs(low - eff).max()) / u.max()
    elapsed = time.time() - t0
    ok = (route_gap <= 1e-4
          and spectra_err[100.0] <= 1.0 * (1.0 / 100.0)
          and spectra_err[1000.0] < spectra_err[100.0])
    return CheckResult(
        "oracle-crosscheck", ok,
        f"wilson-vs-evolution={route_gap:.2e} micro/eff err: "
        f"{spectra_err[100.0]:.2e} @100 -> {spectra_err[1000.0]:.2e} @1000",
        elapsed)


PFLIP_TABLE = (0.5, 1.0, 0.5, 0.0)


def check_pflip(seed: int = 0, shots: int = 10 ** 4) -> CheckResult:
    """Criterion 3: flip statistics over n = 1..8 reproduce the periodic table."""
    t0 = time.time()
    demo = BraidDemo.build(coupling_ratio=1e-4)
    unitary = demo.holonomy(n_points=2400).qubit_unitary
    worst = ("", 0.0)
    ok = True
    for n in range(1, 9):
        expected = PFLIP_TABLE[(n - 1) % 4]
        res = pflip_experiment(n, shots, rng_seed=seed + n,
                               braid_unitary=unitary)
        sigma = math.sqrt(expected * (1 - expected) / shots)
        dev = abs(res.estimate - expected)
        if dev > 3.0 * sigma:
            ok = False
        if dev > worst[1]:
            worst = (f"n={n}", dev)
    elapsed = time.time() - t0
    ok = ok and elapsed < 60.0
    return CheckResult("pflip-statistics", ok,
                       f"worst |est-table| = {worst[1]:.3g} at {worst[0]}, "
                       f"t={elapsed:.1f}s", elapsed)


def _gaussian_overlap_quad(lam_p: float, lam_m: float) -> float:
    x = math.sqrt(lam_p * lam_m)
    left = quad(lambda n: math.exp(-(n - lam_p) ** 2 / (2 * lam_p))
                / math.sqrt(2 * math.pi * lam_p), -np.inf, x)[0]
    right = quad(lambda n: math.exp(-(n - lam_m) ** 2 / (2 * lam_m))
                 / math.sqrt(2 * math.pi * lam_m), x, np.inf)[0]
    return 0.5 * (left + right)


def check_readout(seed: int = 0) -> CheckResult:
    """Criterion 4: dispersive formulas vs exact levels; outcome-error forms and sampling.

    The first-order cavity pull is compared per parity against the exact
    transition frequency (tolerance 2 percent of the pull); the closed-form
    shift must match the difference of the first-order pulls identically.
    The residual of the shift against the fully exact level difference is
    3 g^2/dw^2 by expansion of the dressed square root, and is reported.
    """
    t0 = time.time()
    params = readout.ReadoutParams(cavity_freq=90.0, qubit_freq=91.0,
                                   coupling=0.1, delta_plus=0.05,
                                   delta_minus=0.04)
    shift_ok = True
    exact_pulls = {}
    for parity in (+1, -1):
        exact_freq = readout.jc_eigenvalues(params, 0, parity)[1] \
            - readout.jc_vacuum_energy(params, parity)
        pull_exact = exact_freq - params.cavity_freq
        pull_formula = readout.dispersive_frequency(params, parity) \
            - params.cavity_freq
        exact_pulls[parity] = pull_exact
        if abs(pull_formula - pull_exact) > 0.02 * abs(pull_exact):
            shift_ok = False
    shift_formula = readout.frequency_shift(params)
    first_order_shift = (readout.dispersive_frequency(params, +1)
                         - readout.dispersive_frequency(params, -1))
    if abs(shift_formula - first_order_shift) > 1e-12:
        shift_ok = False
    shift_residual = abs(shift_formula
                         - (exact_pulls[+1] - exact_pulls[-1])) / abs(shift_formula)

    form_ok = True
    for xbar in (1.5, 2.0, 2.5, 3.0):
        lam_m = 50.0
        lam_p = (math.sqrt(lam_m) + math.sqrt(2.0) * xbar) ** 2
        model = readout.PhotonCountModel(lambda_plus=lam_p, lambda_minus=lam_m)
        err = readout.measurement_error(model)
        numeric = _gaussian_overlap_quad(lam_p, lam_m)
        # the numeric overlap integral sits within 15% of the closed form
        if abs(err.asymptotic - numeric) > 0.15 * err.asymptotic:
            form_ok = False
        if abs(err.exact - numeric) > 1e-9:
            form_ok = False

    model = readout.PhotonCountModel(lambda_plus=100.0, lambda_minus=49.0)
    exact = readout.measurement_error(model).exact
    rng = np.random.default_rng(seed + 404)
    draws = 10 ** 6
    half = draws // 2
    n_plus = rng.poisson(model.lambda_plus, size=half)
    n_minus = rng.poisson(model.lambda_minus, size=draws - half)
    wrong = int((n_plus <= model.threshold).sum()) + \
        int((n_minus > model.threshold).sum())
    estimate = wrong / draws
    sigma = math.sqrt(exact * (1 - exact) / draws)
    mc_ok = abs(estimate - exact) <= 3.0 * sigma
    elapsed = time.time() - t0
    return CheckResult(
        "readout", shift_ok and form_ok and mc_ok,
        f"pull err<=2% ok={shift_ok} (exact-shift residual {shift_residual:.1%} "
        f"= 3g^2/dw^2) mc |est-exact|={abs(estimate-exact):.2e} "
        f"(3s={3*sigma:.2e})", elapsed)


def _cnot_branches_ok() -> bool:
    basis = {"0": np.array([1, 0], complex), "1": np.array([0, 1], complex)}
    for c_bit in "01":
        for t_bit in "01":
            expected_target = "1" if (c_bit == "1") != (t_bit == "1") else "0"
            target_state = logic.product_state(basis[c_bit],
                                               basis[expected_target],
                                               basis["0"])
            for p1 in (+1, -1):
                for p2 in (+1, -1):
                    for p3 in (+1, -1):
                        reg = logic.LogicalRegister(3, logic.product_state(
                            basis[c_bit], basis[t_bit],
                            np.array([1, 1], complex) / math.sqrt(2)))
                        try:
                            logic.cnot(reg, 0, 1, 2, forced=(p1, p2, p3))
                        except logic.ReplayError:
                            return False  # ancilla |+> makes all branches live
                        overlap = abs(np.vdot(target_state, reg.state))
                        if abs(overlap - 1.0) > 1e-10:
                            return False
    return True


def _bk_worst_discrepancy() -> float:
    mset = build_majorana_set(6)
    worst = 0.0
    for p1 in (+1, -1):
        for p2 in (+1, -1):
            disc = logic.bravyi_kitaev_expansion_check(mset, p1, p2)
            if not math.isnan(disc):
                worst = max(worst, disc)
    return worst


def check_gates(seed: int = 0) -> CheckResult:
    """Criterion 5: CNOT branches, the six-Majorana expansion, teleport, T, cluster."""
    t0 = time.time()
    cnot_ok = _cnot_branches_ok()

    bk_worst = _bk_worst_discrepancy()
    bk_ok = bk_worst <= 1e-10

    rng = np.random.default_rng(seed + 77)
    tele_ok = True
    for _ in range(20):
        amp = rng.normal(size=2) + 1j * rng.normal(size=2)
        amp /= np.linalg.norm(amp)
        reg = logic.LogicalRegister(3, logic.product_state(
            amp, [1, 0], [1, 0]))
        logic.teleport(reg, 0, 1, 2, rng)
        rho = reg.state.reshape(4, 2)
        out = rho.T @ rho.conj()      # reduced state of the output qubit
        fidelity = float(np.real(amp.conj() @ out @ amp))
        if abs(fidelity - 1.0) > 1e-10:
            tele_ok = False

    t_ok = True
    t_gate = np.diag([1.0, np.exp(1j * math.pi / 4)])
    for p1 in (+1, -1):
        for p2 in (+1, -1):
            amp = rng.normal(size=2) + 1j * rng.normal(size=2)
            amp /= np.linalg.norm(amp)
            reg = logic.LogicalRegister(2, logic.product_state(
                amp, logic.magic_state()))
            logic.t_gate_injection(reg, 0, 1, forced=(p1, p2))
            want = logic.product_state(t_gate @ amp, [1, 0])
            if abs(abs(np.vdot(want, reg.state)) - 1.0) > 1e-10:
                t_ok = False

    reg = logic.LogicalRegister(9)
    logic.prepare_cluster_state(reg, 3, 3, np.random.default_rng(seed + 5))
    cluster_dev = max(abs(reg.expectation(
        logic.cluster_stabilizer(reg, 3, 3, site)) - 1.0) for site in range(9))
    cluster_ok = cluster_dev <= 1e-10
    elapsed = time.time() - t0
    ok = cnot_ok and bk_ok and tele_ok and t_ok and cluster_ok
    return CheckResult(
        "gates", ok,
        f"cnot={cnot_ok} bk-worst={bk_worst:.1e} teleport={tele_ok} "
        f"t-gate={t_ok} cluster-dev={cluster_dev:.1e}", elapsed)


def check_thresholds(seed: int = 0) -> CheckResult:
    """Criterion 6: landmark threshold ratios, curve ordering, Monte Carlo agreement."""
    t0 = time.time()
    r1 = qec.memory_threshold(1, 1, 1, "ramm").threshold \
        / qec.memory_threshold(1, 1, 1, "reference").threshold
    r10 = qec.memory_threshold(10, 10, 10, "ramm").threshold \
        / qec.memory_threshold(10, 10, 10, "reference").threshold
    landmarks_ok = 6.0 <= r1 <= 14.0 and r10 >= 4.0

    grid = np.logspace(-1, 1, 7)
    curves = []
    for rom in (1.0, 2.0, 5.0, 10.0):
        curves.append([qec.memory_threshold(g, rom, rom, "ramm").threshold
                       / qec.memory_threshold(g, rom, rom, "reference").threshold
                       for g in grid])
    ordering_ok = all(
        all(hi > lo for hi, lo in zip(curves[i], curves[i + 1]))
        for i in range(len(curves) - 1))

    rng = np.random.default_rng(seed + 99)
    mc_ok = True
    worst_pull = 0.0
    for _ in range(20):
        rates = qec.ErrorRates(storage=float(rng.uniform(2e-4, 1.5e-3)),
                               gate=float(rng.uniform(2e-4, 1.5e-3)),
                               data_measure=float(rng.uniform(2e-4, 1.5e-3)),
                               outcome=float(rng.uniform(2e-4, 1.5e-3)))
        arch = "ramm" if rng.random() < 0.5 else "reference"
        comp = qec.COMPONENT_MAKERS[arch](rates)
        n_wait = int(rng.integers(1, 40))
        analytic = qec.memory_failure(comp, n_wait)
        mc = qec.monte_carlo_failure(comp, n_wait, 10 ** 6, rng)
        sigma = max((mc.ci_high - mc.ci_low) / 6.0, 1e-12)
        pull = abs(mc.estimate - analytic) / sigma
        worst_pull = max(worst_pull, pull)
        if pull > 3.0:
            mc_ok = False
    elapsed = time.time() - t0
    ok = landmarks_ok and ordering_ok and mc_ok and elapsed < 300.0
    return CheckResult(
        "thresholds", ok,
        f"ratio(1)={r1:.1f} ratio(10)={r10:.1f} ordered={ordering_ok} "
        f"mc worst pull={worst_pull:.2f}s.d. t={elapsed:.0f}s", elapsed)


def check_coulomb(seed: int = 0) -> CheckResult:
    """Criterion 7: asymptotic vs exact coupling, 5% at ratio 50, error growing below 10."""
    t0 = time.time()

    def relerr(ratio):
        isl = IslandParams(josephson_zero=float(ratio), charging=1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            asym = device.coulomb_coupling_asymptotic(isl)
        exact = device.coulomb_coupling_exact(isl)
        return abs(asym - exact) / exact, exact

    err50, _ = relerr(50.0)
    errs_below = [relerr(r)[0] for r in (10.0, 8.0, 6.0, 4.0, 2.0)]
    growing = all(b > a for a, b in zip(errs_below, errs_below[1:]))
    u2 = relerr(2.0)[1]
    u10 = relerr(10.0)[1]
    much_larger = u2 > 10.0 * u10
    elapsed = time.time() - t0
    ok = err50 <= 0.05 and growing and much_larger
    return CheckResult(
        "coulomb-coupling", ok,
        f"relerr@50={err50:.2%}, growing below 10: {growing}, "
        f"U(2)/U(10)={u2/u10:.0f}", elapsed)


def check_regime(seed: int = 0) -> CheckResult:
    """Criterion 8: the reference point passes; a hot bath flags only the thermal check."""
    t0 = time.time()
    params = device.reference_regime_params()
    report = device.validate_regime(params)
    baseline_ok = report.all_satisfied

    from dataclasses import replace
    hot = replace(params, k_b_t=2.0 * params.delta_max)
    flagged = device.validate_regime(hot).failed()
    thermal_ok = flagged == ("majorana_above_thermal",)

    ratio_point = device.transmon_levels(10.0, 1.0)
    d_plus, _ = device.delta_pm_base(ratio_point)
    scale_ok = 0.5e-2 <= d_plus / 10.0 <= 2e-2
    elapsed = time.time() - t0
    return CheckResult(
        "regime", baseline_ok and thermal_ok and scale_ok,
        f"reference ok={baseline_ok} hot flags={flagged} "
        f"delta+/E_J0={d_plus/10.0:.3f}", elapsed)


def check_determinism(seed: int = 0) -> CheckResult:
    """Criterion 9: identical seeds give identical stochastic outputs."""
    t0 = time.time()
    demo = BraidDemo.build(coupling_ratio=1e-4)
    unitary = demo.holonomy(n_points=1200).qubit_unitary
    a = pflip_experiment(3, 2000, rng_seed=seed + 1, braid_unitary=unitary)
    b = pflip_experiment(3, 2000, rng_seed=seed + 1, braid_unitary=unitary)
    ok = a == b
    return CheckResult("determinism", ok,
                       f"rerun identical: {ok}", time.time() - t0)


ALL_CHECKS = (
    check_braid_holonomy,
    check_oracle_crosscheck,
    check_pflip,
    check_readout,
    check_gates,
    check_thresholds,
    check_coulomb,
    check_regime,
    check_determinism,
)


def check_name(fn) -> str:
    return fn.__name__.replace("check_", "").replace("_", "-")


def run_checks(name_filter: str = "", seed: int = 0):
    return [fn(seed) for fn in ALL_CHECKS if name_filter in check_name(fn)]
