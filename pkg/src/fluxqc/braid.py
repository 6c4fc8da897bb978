"""Flux schedules, adiabatic evolution, braiding holonomies and schedule compilation.

The braiding cycle follows the six-step coupling dance of the minimal circuit:
starting from the ancilla coupling alone (Delta_2 on), one coupling ramps per
step in the order +Delta_1, -Delta_2, +Delta_3, -Delta_1, +Delta_2, -Delta_3.
Flux signs are fixed to (+, -, +) for (x_1, x_2, x_3), which keeps every
junction cosine positive along the whole cycle so no coupling changes sign.
With the operator conventions of :mod:`fluxqc.algebra` this traversal produces
the braid matrix ``[[1, -i], [-i, 1]]/sqrt(2)`` on the qubit basis; traversing
the steps in reverse yields its inverse.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from . import device
from .algebra import (MajoranaSet, ParitySector, build_majorana_set,
                      parity_sector, sector_restrict, phase_distance)
from .device import CircuitParams, FluxConfig, FLUX_LIMIT
from .errors import (CompileError, ConsistencyError, ConvergenceError,
                     TopologyError)

PI_FLUX_SIGNS = (0.0, 1.0, -1.0, 1.0)          # resting sign pattern for x_0..x_3
BRAID_RAMPS = ((1, +1), (2, -1), (3, +1), (1, -1), (2, +1), (3, -1))


@dataclass(frozen=True)
class ScheduleStep:
    label: str
    start: np.ndarray
    end: np.ndarray
    duration: float


@dataclass(frozen=True)
class FluxSchedule:
    """Piecewise-linear time course of the junction fluxes."""

    steps: tuple

    def __post_init__(self):
        self.validate()

    @property
    def n_flux(self) -> int:
        return len(self.steps[0].start) if self.steps else 0

    @property
    def total_duration(self) -> float:
        return sum(s.duration for s in self.steps)

    @property
    def labels(self) -> tuple:
        return tuple(s.label for s in self.steps)

    def validate(self, samples_per_step: int = 9) -> None:
        for step in self.steps:
            if len(step.start) != len(step.end):
                raise ConsistencyError("step endpoints have different flux counts")
            if step.duration <= 0:
                raise ConsistencyError(f"step {step.label!r} has nonpositive duration")
        for prev, cur in zip(self.steps, self.steps[1:]):
            if not np.array_equal(prev.end, cur.start):
                raise ConsistencyError(
                    f"schedule discontinuous between {prev.label!r} and {cur.label!r}")
        frac = np.linspace(0.0, 1.0, samples_per_step)
        for step in self.steps:
            configs = np.outer(1 - frac, step.start) + np.outer(frac, step.end)
            if np.abs(configs).max() >= FLUX_LIMIT:
                raise ConsistencyError(f"step {step.label!r} leaves |x| < pi/2")
            if step.label.startswith("braid") and np.abs(configs[:, 0]).max() > 1e-12:
                raise ConsistencyError("x_0 must stay at zero during braiding steps")

    def config_at(self, t: float) -> np.ndarray:
        """Flux vector at absolute time ``t`` (clamped to the schedule span)."""
        if t <= 0:
            return np.array(self.steps[0].start, dtype=float)
        for step in self.steps:
            if t <= step.duration:
                f = t / step.duration
                return (1 - f) * np.asarray(step.start, float) \
                    + f * np.asarray(step.end, float)
            t -= step.duration
        return np.array(self.steps[-1].end, dtype=float)

    def select(self, prefix: str) -> "FluxSchedule":
        """Sub-schedule of the steps whose label starts with ``prefix``."""
        kept = tuple(s for s in self.steps if s.label.startswith(prefix))
        if not kept:
            raise ValueError(f"no steps labeled {prefix!r}")
        return FluxSchedule(steps=kept)

    def reversed(self) -> "FluxSchedule":
        rev = tuple(ScheduleStep(s.label, np.array(s.end), np.array(s.start),
                                 s.duration) for s in self.steps[::-1])
        return FluxSchedule(steps=rev)

    # line-oriented text format: one step per line,
    # `label t_start t_end x0 x1 x2 ...`, closed by a sentinel `end` line.
    def to_text(self) -> str:
        lines = []
        t = 0.0
        for step in self.steps:
            xs = " ".join(repr(float(v)) for v in step.start)
            lines.append(f"{step.label} {t!r} {t + step.duration!r} {xs}")
            t += step.duration
        xs = " ".join(repr(float(v)) for v in self.steps[-1].end)
        lines.append(f"end {t!r} {t!r} {xs}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "FluxSchedule":
        rows = []
        for line in text.splitlines():
            if not line.strip():
                continue
            label, t0, t1, *xs = line.split()
            rows.append((label, float(t0), float(t1),
                         np.array([float(v) for v in xs])))
        if len(rows) < 2 or rows[-1][0] != "end":
            raise ValueError("schedule text must close with an 'end' line")
        steps = []
        for (label, t0, t1, x), (_, nt0, _, nx) in zip(rows, rows[1:]):
            steps.append(ScheduleStep(label, x, nx, nt0 - t0))
        return FluxSchedule(steps=tuple(steps))


def standard_braid_schedule(x_max: float, step_duration: float) -> FluxSchedule:
    """The ten-step schedule: initialization 0-2, braiding 3-8, measurement 9.

    Initialization turns the ancilla coupling on, then the third coupling on
    and off again (off before the ancilla coupling, selecting the ancilla
    ground state).  Measurement zeroes the qubit fluxes and raises x_0.
    """
    if not 0 < x_max < FLUX_LIMIT:
        raise ValueError("x_max must lie in (0, pi/2)")
    if step_duration <= 0:
        raise ValueError("step_duration must be positive")
    signs = np.array(PI_FLUX_SIGNS)
    on = lambda k: signs[k] * x_max

    steps = []
    cfg = np.zeros(4)

    def ramp(label, updates):
        nonlocal cfg
        new = cfg.copy()
        for k, v in updates.items():
            new[k] = v
        steps.append(ScheduleStep(label, cfg, new, step_duration))
        cfg = new

    ramp("init-0", {2: on(2)})
    ramp("init-1", {3: on(3)})
    ramp("init-2", {3: 0.0})
    for i, (k, sgn) in enumerate(BRAID_RAMPS):
        ramp(f"braid-{3 + i}", {k: on(k) if sgn > 0 else 0.0})
    ramp("measure-9", {2: 0.0, 0: x_max})
    return FluxSchedule(steps=tuple(steps))


def xmax_for_coupling_ratio(island: device.IslandParams, ratio: float) -> float:
    """Flux endpoint such that U(x=0)/U(x=x_max) equals the requested off/on ratio."""
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie in (0, 1)")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        u_off = device.coulomb_coupling_asymptotic(island)

        def objective(x):
            return device.coulomb_coupling_asymptotic(island.at_flux(x)) * ratio - u_off

        # stay inside E_J(x)/E_C >= 1 where the coupling formula is defined
        x_hi = math.acos(min(island.charging / island.josephson_zero, 1.0)) - 1e-9
        if objective(x_hi) < 0:
            raise ValueError(
                f"off/on ratio {ratio:g} is not reachable with E_J/E_C = "
                f"{island.josephson_zero / island.charging:g}")
        return brentq(objective, 1e-6, x_hi, xtol=1e-14)


# --- Hamiltonian paths -------------------------------------------------------

def pi_hamiltonian_path(schedule: FluxSchedule, params: CircuitParams,
                        majoranas: MajoranaSet,
                        sector: ParitySector | None = None):
    """Map a pi-circuit schedule to the effective Hamiltonian along it.

    Returns ``h(s)`` for ``s`` in [0, 1] spanning the schedule (time-weighted);
    the result is restricted to ``sector`` when one is given.  Island couplings
    follow the asymptotic phase-slip formula at the instantaneous junction flux.
    """
    total = schedule.total_duration
    isometry = sector.isometry if sector is not None else None

    def h_of_s(s: float) -> np.ndarray:
        x = schedule.config_at(float(s) * total)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            u = [device.coulomb_coupling_asymptotic(isl.at_flux(xk))
                 for isl, xk in zip(params.islands, x[1:4])]
        flux = FluxConfig(phases=tuple(x[:4]))
        h = device.effective_braiding_hamiltonian(
            device.pi_couplings(flux, u), majoranas)
        if isometry is not None:
            h = isometry.conj().T @ h @ isometry
        return h

    return h_of_s


# --- time evolution and holonomy ---------------------------------------------

def adiabatic_evolve(hamiltonian_path, total_time: float, n_slices: int,
                     initial: np.ndarray, convergence_check: bool = False,
                     check_tol: float = 1e-8) -> np.ndarray:
    """Sliced time-ordered propagator applied to a state (or stacked columns).

    Each slice uses the Hamiltonian at its midpoint.  With
    ``convergence_check`` the evolution is repeated at twice the resolution
    and must agree to ``check_tol``.
    """
    if n_slices < 1:
        raise ValueError("need at least one slice")

    def run(n):
        dt = total_time / n
        mids = (np.arange(n) + 0.5) / n
        hs = np.stack([hamiltonian_path(s) for s in mids])
        w, v = np.linalg.eigh(hs)
        psi = np.atleast_2d(np.asarray(initial, dtype=complex).T).T
        for k in range(n):
            psi = v[k] @ (np.exp(-1j * w[k] * dt)[:, None] * (v[k].conj().T @ psi))
        return psi if np.asarray(initial).ndim == 2 else psi[:, 0]

    psi = run(n_slices)
    if convergence_check:
        fine = run(2 * n_slices)
        dev = np.linalg.norm(fine - psi)
        if dev > check_tol:
            raise ConvergenceError(
                f"evolution not converged: doubling slices moved the state by "
                f"{dev:.3e} > {check_tol:g}; increase n_slices")
        psi = fine
    return psi


@dataclass(frozen=True)
class HolonomyResult:
    """Holonomy on the ground subspace, with bookkeeping of its quality."""

    qubit_unitary: np.ndarray
    leakage: float
    diabatic_error: float | None = None


def _unitarize(m: np.ndarray) -> tuple:
    u, s, vh = np.linalg.svd(m)
    return u @ vh, float(1.0 - s.min() ** 2)


def _ground_frame(h: np.ndarray, tol: float | None):
    w, v = np.linalg.eigh(h)
    if tol is None:
        tol = 1e-6 * max(w[-1] - w[0], 1e-30)
    members = w <= w[0] + tol
    return v[:, members]


def wilson_line(hamiltonian_path, n_points: int, frame: np.ndarray | None = None,
                degeneracy_tol: float | None = None,
                frame_tol: float = 0.1) -> HolonomyResult:
    """Holonomy of the ground subspace as a normalized product of frame overlaps.

    ``hamiltonian_path(s)`` is sampled at ``n_points + 1`` values of ``s`` in
    [0, 1]; for a closed cycle the end frame is identified with the start
    frame, so the result acts on the ground subspace at the path start.  The
    returned ``leakage`` is the unitarity deficit of the raw overlap product
    (it shrinks as the discretization is refined).  A caller-supplied
    ``frame`` (orthonormal columns) fixes the basis of the returned matrix; it
    may sit a residual-coupling correction away from the exact ground
    subspace, which shows up in the leakage, but a misalignment beyond
    ``frame_tol`` is an error.
    """
    h0 = hamiltonian_path(0.0)
    start = _ground_frame(h0, degeneracy_tol)
    dim = start.shape[1]
    if frame is not None:
        frame = np.asarray(frame, dtype=complex)
        if frame.shape != start.shape:
            raise ConsistencyError(
                f"frame shape {frame.shape} does not match ground space "
                f"dimension {start.shape}")
        proj = start @ (start.conj().T @ frame)
        if np.linalg.norm(proj - frame) > frame_tol:
            raise ConsistencyError("frame does not span the initial ground subspace")
        start = frame
    w = np.eye(dim, dtype=complex)
    prev = start
    for k in range(1, n_points + 1):
        if k == n_points:
            cur = start
        else:
            cur = _ground_frame(hamiltonian_path(k / n_points), degeneracy_tol)
            if cur.shape[1] != dim:
                raise TopologyError(
                    f"ground degeneracy changed from {dim} to {cur.shape[1]} "
                    f"at s = {k / n_points:.4f}")
        w = (cur.conj().T @ prev) @ w
        prev = cur
    unitary, leakage = _unitarize(w)
    return HolonomyResult(qubit_unitary=unitary, leakage=leakage)


def holonomy_from_evolution(hamiltonian_path, total_time: float, n_slices: int,
                            frame: np.ndarray) -> HolonomyResult:
    """Holonomy extracted from real time evolution of the ground frame.

    The evolved frame is projected back onto the initial ground subspace and
    unitarized; the global dynamical phase is irrelevant because comparisons
    are made modulo a phase.  ``leakage`` here is the population lost from
    the ground subspace, i.e. the genuine diabatic error of the schedule.
    """
    psi = adiabatic_evolve(hamiltonian_path, total_time, n_slices,
                           np.asarray(frame, dtype=complex))
    overlap = np.asarray(frame, dtype=complex).conj().T @ psi
    unitary, leakage = _unitarize(overlap)
    return HolonomyResult(qubit_unitary=unitary, leakage=leakage)


BRAID_TARGET = np.array([[1.0, -1.0j], [-1.0j, 1.0]]) / math.sqrt(2.0)


def braid_qubit_frame(majoranas: MajoranaSet, sector: ParitySector) -> np.ndarray:
    """Sector coordinates of the qubit basis |10>|0>, |01>|0> (modes AB, CD, EF)."""
    e0 = sector.restricted_unit_vector(majoranas.basis_index((1, 0, 0)))
    e1 = sector.restricted_unit_vector(majoranas.basis_index((0, 1, 0)))
    return np.stack([e0, e1], axis=1)


@dataclass(frozen=True)
class BraidDemo:
    """Shared scaffolding for the braiding experiment at one coupling ratio."""

    params: CircuitParams
    coupling_ratio: float
    schedule: FluxSchedule
    majoranas: MajoranaSet = field(repr=False)
    sector: ParitySector = field(repr=False)

    @staticmethod
    def build(params: CircuitParams | None = None, coupling_ratio: float = 1e-4,
              step_duration: float = 1.0) -> "BraidDemo":
        params = device.default_circuit_params() if params is None else params
        x_max = xmax_for_coupling_ratio(params.islands[0], coupling_ratio)
        schedule = standard_braid_schedule(x_max, step_duration)
        majoranas = build_majorana_set(6)
        sector = parity_sector(majoranas, -1)
        return BraidDemo(params=params, coupling_ratio=coupling_ratio,
                         schedule=schedule, majoranas=majoranas, sector=sector)

    def cycle_path(self):
        return pi_hamiltonian_path(self.schedule.select("braid"), self.params,
                                   self.majoranas, self.sector)

    def frame(self) -> np.ndarray:
        return braid_qubit_frame(self.majoranas, self.sector)

    def holonomy(self, n_points: int = 2400,
                 compare_total_time: float | None = None,
                 n_slices: int = 4000) -> HolonomyResult:
        """Wilson-line holonomy; optionally cross-checked against time evolution."""
        path = self.cycle_path()
        result = wilson_line(path, n_points, frame=self.frame())
        if compare_total_time is not None:
            evolved = holonomy_from_evolution(path, compare_total_time, n_slices,
                                              self.frame())
            result = replace(result, diabatic_error=phase_distance(
                evolved.qubit_unitary, result.qubit_unitary))
        return result


@dataclass(frozen=True)
class PflipResult:
    n_cycles: int
    shots: int
    flips: int
    estimate: float
    ci_low: float
    ci_high: float


def wilson_interval(successes: int, trials: int, z: float = 3.0) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials
                         + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def pflip_experiment(n_cycles: int, shots: int, rng_seed: int,
                     braid_unitary: np.ndarray | None = None,
                     photon_model=None, coupling_ratio: float = 1e-4,
                     params: CircuitParams | None = None) -> PflipResult:
    """Initialize, braid ``n_cycles`` times, read out; repeat over ``shots``.

    Readout goes through the photon-counting channel, so outcome errors are
    part of the simulation.  The braid unitary may be passed in to avoid
    re-extracting the holonomy for every ``n``.
    """
    from .readout import PhotonCountModel, simulate_readout

    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = np.random.default_rng(rng_seed)
    if braid_unitary is None:
        demo = BraidDemo.build(params=params, coupling_ratio=coupling_ratio)
        braid_unitary = demo.holonomy().qubit_unitary
    if photon_model is None:
        p = device.default_circuit_params() if params is None else params
        photon_model = PhotonCountModel(lambda_plus=p.lambda_plus,
                                        lambda_minus=p.lambda_minus)

    # qubit starts in |0>_q = |10>|0>, whose A-B pair parity is -1
    psi = np.linalg.matrix_power(braid_unitary, n_cycles) @ np.array([1.0, 0.0],
                                                                     complex)
    p_plus = abs(psi[1]) ** 2          # |1>_q has A-B pair parity +1
    flips = 0
    true_parities = np.where(rng.random(shots) < p_plus, 1, -1)
    for true_parity in true_parities:
        first, _ = simulate_readout(-1, photon_model, rng)
        second, _ = simulate_readout(int(true_parity), photon_model, rng)
        flips += int(first != second)
    lo, hi = wilson_interval(flips, shots)
    return PflipResult(n_cycles=n_cycles, shots=shots, flips=flips,
                       estimate=flips / shots, ci_low=lo, ci_high=hi)


# --- schedule compiler ---------------------------------------------------------

@dataclass(frozen=True)
class MoveOp:
    majorana: str
    island: str

    def __str__(self):
        return f"move {self.majorana} -> {self.island}"


@dataclass(frozen=True)
class BraidOp:
    first: str
    second: str

    def __str__(self):
        return f"braid {self.first} {self.second}"


@dataclass(frozen=True)
class MeasureOp:
    pairs: tuple  # ((majorana, majorana), ...)

    def __str__(self):
        body = " ".join(f"({a},{b})" for a, b in self.pairs)
        return f"measure {body}"


@dataclass(frozen=True)
class Layout:
    """Island adjacency of one circuit: who sits where, which flux couples what.

    ``edges`` maps an unordered site pair to ``(flux_index, sign)``; the sign
    is the direction in which that flux is ramped to its working point.
    ``ancilla_flux`` is the junction holding the ancilla pair together at
    braid-block boundaries.
    """

    name: str
    n_flux: int
    positions: dict
    edges: dict
    measure_site: str
    ancilla_flux: tuple  # (flux_index, sign)
    braid_stars: dict    # frozenset pair -> (leg1, anchor, leg2) flux/sign tuples

    def edge(self, a: str, b: str):
        return self.edges.get(frozenset((a, b)))


def pi_layout() -> Layout:
    """The minimal pi circuit: one braidable pair (B, C), native (A, B) readout."""
    return Layout(
        name="pi",
        n_flux=4,
        positions={"A": "bus", "B": "tj1", "C": "isl3", "D": "ground",
                   "E": "tj2", "F": "isl2"},
        edges={frozenset(("tj1", "tj2")): (1, +1),
               frozenset(("tj2", "isl2")): (2, -1),
               frozenset(("tj2", "isl3")): (3, +1)},
        measure_site="bus",
        ancilla_flux=(2, -1),
        braid_stars={frozenset(("B", "C")): ((1, +1), (2, -1), (3, +1))},
    )


def triangle_layout() -> Layout:
    """One triangular flux-controlled qubit with its measurement island."""
    return Layout(
        name="triangle",
        n_flux=6,
        positions={"A": "a", "B": "b", "C": "c", "D": "ground",
                   "E": "m", "F": "m"},
        edges={frozenset(("b", "a")): (3, +1),
               frozenset(("b", "c")): (4, -1),
               frozenset(("m", "b")): (2, -1),
               frozenset(("m", "c")): (5, +1)},
        measure_site="m",
        ancilla_flux=(1, +1),
        braid_stars={frozenset(("B", "C")): ((2, -1), (1, +1), (5, +1))},
    )


def _route(layout: Layout, src: str, dst: str):
    """Breadth-first path from src to dst along coupling edges, or None."""
    if src == dst:
        return [src]
    frontier = [[src]]
    seen = {src}
    while frontier:
        path = frontier.pop(0)
        for pair in layout.edges:
            if path[-1] in pair:
                (nxt,) = pair - {path[-1]} if len(pair) == 2 else (path[-1],)
                if nxt in seen:
                    continue
                if nxt == dst:
                    return path + [nxt]
                seen.add(nxt)
                frontier.append(path + [nxt])
    return None


def compile_schedule(ops, layout: Layout, x_max: float = 1.0,
                     step_duration: float = 1.0) -> FluxSchedule:
    """Lower logical moves, braids and measurements to a constraint-checked schedule.

    Exactly one junction flux ramps per emitted step; measurement steps zero
    every qubit flux before raising x_0; the ancilla junction is brought to
    its working point around each braid block.  An unsatisfiable move (the
    Majorana is not adjacent to the target island) raises
    :class:`CompileError` naming the offending op.
    """
    if not 0 < x_max < FLUX_LIMIT:
        raise ValueError("x_max must lie in (0, pi/2)")
    positions = dict(layout.positions)
    cfg = np.zeros(layout.n_flux)
    steps = []

    def ramp(label, k, value):
        new = cfg.copy()
        new[k] = value
        steps.append(ScheduleStep(label, cfg.copy(), new, step_duration))
        cfg[:] = new

    def hop(op, majorana, src, dst):
        edge = layout.edge(src, dst)
        if edge is None:
            raise CompileError(f"cannot lower '{op}': {majorana} at {src} "
                               f"has no junction to {dst}")
        k, sign = edge
        ramp(f"move-{majorana}:{src}>{dst}-on", k, sign * x_max)
        ramp(f"move-{majorana}:{src}>{dst}-off", k, 0.0)
        positions[majorana] = dst

    def move(op, majorana, dst, multi_hop=False):
        if majorana not in positions:
            raise CompileError(f"cannot lower '{op}': unknown Majorana {majorana}")
        src = positions[majorana]
        if src == dst:
            return
        if layout.edge(src, dst) is None and multi_hop:
            path = _route(layout, src, dst)
            if path is None:
                raise CompileError(f"cannot lower '{op}': no junction path "
                                   f"from {src} to {dst} for {majorana}")
            for a, b in zip(path, path[1:]):
                hop(op, majorana, a, b)
        else:
            hop(op, majorana, src, dst)

    def anchor(value):
        k, sign = layout.ancilla_flux
        if cfg[k] != sign * x_max * value:
            ramp("anchor-on" if value else "anchor-off", k,
                 sign * x_max if value else 0.0)

    for op in ops:
        if isinstance(op, MoveOp):
            move(op, op.majorana, op.island)
        elif isinstance(op, BraidOp):
            star = layout.braid_stars.get(frozenset((op.first, op.second)))
            if star is None:
                raise CompileError(
                    f"cannot lower '{op}': no coupling star joins this pair "
                    f"on the {layout.name} layout")
            leg1, anchor_leg, leg2 = star
            anchor(True)
            order = ((leg1, True), (anchor_leg, False), (leg2, True),
                     (leg1, False), (anchor_leg, True), (leg2, False))
            for i, ((k, sign), turn_on) in enumerate(order):
                ramp(f"braid-{3 + i}", k, sign * x_max if turn_on else 0.0)
        elif isinstance(op, MeasureOp):
            moved = []
            for a, b in op.pairs:
                for maj in (a, b):
                    home = positions[maj]
                    if home != layout.measure_site:
                        move(op, maj, layout.measure_site, multi_hop=True)
                        moved.append((maj, home))
            for k in range(1, layout.n_flux):
                if cfg[k] != 0.0:
                    ramp("park", k, 0.0)
            ramp("measure-on", 0, x_max)
            ramp("measure-off", 0, 0.0)
            for maj, home in reversed(moved):
                move(op, maj, home, multi_hop=True)
        else:
            raise CompileError(f"unknown op type {type(op).__name__}")

    return FluxSchedule(steps=tuple(steps)) if steps else FluxSchedule(steps=())
