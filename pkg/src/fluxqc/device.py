"""Flux configurations, Coulomb couplings and effective circuit Hamiltonians.

Units: every energy is a frequency in GHz (hbar = 1); fluxes are stored as the
dimensionless phase ``x = e*Phi/hbar``, so a split junction has Josephson energy
``E_J(x) = E_J(0) * cos(x)`` and the admissible range is ``|x| < pi/2``.
Induced charges ``q`` are in units of the electron charge.

Two circuit families are covered: the minimal pi-shaped braiding circuit (four
fluxes ``x_0..x_3``, six effective Majoranas A..F) and the triangular
flux-controlled qubit used by the multi-qubit register (five fluxes per qubit
plus the global ``x_0``).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, asdict

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .algebra import MajoranaSet
from .errors import ConsistencyError, ConvergenceError, RegimeWarning

FLUX_LIMIT = np.pi / 2

# Effective Majorana labels, in the fixed ordering shared with the algebra module.
PI_MAJORANA_LABELS = ("A", "B", "C", "D", "E", "F")


@dataclass(frozen=True)
class IslandParams:
    """One superconducting island: zero-flux Josephson energy, charging energy, offset charge."""

    josephson_zero: float
    charging: float
    offset_charge: float = 0.0

    def __post_init__(self):
        if self.josephson_zero < 0 or self.charging <= 0:
            raise ValueError("energies must be positive (E_J >= 0, E_C > 0)")

    def at_flux(self, x: float) -> "IslandParams":
        """Island with the Josephson energy tuned by the split-junction flux."""
        if abs(x) >= FLUX_LIMIT:
            raise ValueError(f"|x| must stay below pi/2, got {x}")
        return IslandParams(self.josephson_zero * np.cos(x), self.charging,
                            self.offset_charge)


@dataclass(frozen=True)
class FluxConfig:
    """Dimensionless flux parameters, one per split junction."""

    phases: tuple

    def __post_init__(self):
        phases = tuple(float(x) for x in self.phases)
        object.__setattr__(self, "phases", phases)
        if any(abs(x) >= FLUX_LIMIT for x in phases):
            raise ValueError("every |x_k| must stay below pi/2")

    def __getitem__(self, k: int) -> float:
        return self.phases[k]

    def __len__(self) -> int:
        return len(self.phases)


@dataclass(frozen=True)
class CouplingSet:
    """Derived Majorana couplings in GHz, with the pair each one acts on."""

    u: tuple
    delta: tuple
    labels: tuple  # pairs of Majorana labels, e.g. ("B", "E")

    def __post_init__(self):
        for uk, dk in zip(self.u, self.delta):
            if abs(dk) > abs(uk) * (1 + 1e-12):
                raise ConsistencyError("every |Delta| must stay below its parent |U|")


@dataclass(frozen=True)
class TransmonSpectrum:
    """Mean transmon levels and their charge dispersions."""

    mean_levels: tuple
    charge_dispersion: tuple
    plasma_frequency: float


def coulomb_coupling_asymptotic(island: IslandParams) -> float:
    """Coulomb coupling U_k of one island from the large-E_J/E_C phase-slip formula.

        U = 16 (E_C E_J^3 / 2 pi^2)^(1/4) exp(-sqrt(8 E_J/E_C)) cos(pi q)

    Warns below E_J/E_C = 10 where the asymptotic form degrades.
    """
    ej, ec, q = island.josephson_zero, island.charging, island.offset_charge
    if ej <= 0:
        raise ValueError("asymptotic formula needs E_J > 0")
    ratio = ej / ec
    if ratio < 1:
        raise ValueError(f"E_J/E_C = {ratio:.3g} < 1: outside the asymptotic regime")
    if ratio < 10:
        warnings.warn(f"E_J/E_C = {ratio:.3g} < 10: asymptotic coupling degrades",
                      RegimeWarning, stacklevel=2)
    prefactor = 16.0 * (ec * ej ** 3 / (2.0 * np.pi ** 2)) ** 0.25
    return prefactor * np.exp(-np.sqrt(8.0 * ej / ec)) * np.cos(np.pi * q)


def _cpb_ground_energy(ej: float, ec: float, ng: float, ncut: int) -> float:
    n = np.arange(-ncut, ncut + 1)
    diag = 4.0 * ec * (n - ng) ** 2
    if ej == 0:
        return float(diag.min())
    off = np.full(2 * ncut, -ej / 2.0)
    return float(eigh_tridiagonal(diag, off, select="i", select_range=(0, 0),
                                  eigvals_only=True)[0])


def coulomb_coupling_exact(island: IslandParams, charge_cutoff: int = 40) -> float:
    """Exact U_k by charge-basis diagonalization of the Cooper-pair-box Hamiltonian.

    Returns half the splitting between the two lowest charge-parity branches,
    ``(E_0(n_g + 1/2) - E_0(n_g))/2`` with ``n_g = q/2``.  The cutoff doubles
    until both branch energies are stable to 1e-10 (absolute, in units of the
    larger of E_C and E_J).
    """
    ej, ec = island.josephson_zero, island.charging
    ng = island.offset_charge / 2.0
    scale = max(ej, ec)
    ncut = max(int(charge_cutoff), 4)
    prev = None
    while ncut <= 4096:
        even = _cpb_ground_energy(ej, ec, ng, ncut)
        odd = _cpb_ground_energy(ej, ec, ng + 0.5, ncut)
        if prev is not None and abs(even - prev[0]) < 1e-10 * scale \
                and abs(odd - prev[1]) < 1e-10 * scale:
            return (odd - even) / 2.0
        prev = (even, odd)
        ncut *= 2
    raise ConvergenceError(
        f"charge-basis cutoff did not converge below {ncut} states "
        f"(E_J={ej:g}, E_C={ec:g}); last branch energies {prev}")


# --- pi-circuit -------------------------------------------------------------

def pi_alphas(flux: FluxConfig) -> dict:
    """Gauge-invariant Aharonov-Bohm phases of the two pi-circuit T-junctions."""
    if len(flux) != 4:
        raise ValueError("pi circuit has four fluxes x_0..x_3")
    x0, x1, x2, x3 = flux.phases
    return {
        "bg": x0 / 2.0,
        "g1": x1 / 2.0,
        "1b": -(x0 + x1) / 2.0,
        "12": (x1 + x2) / 2.0,
        "23": (x2 + x3) / 2.0,
        "31": -(x1 + 2.0 * x2 + x3) / 2.0,
    }


def pi_couplings(flux: FluxConfig, u) -> CouplingSet:
    """Couplings Delta_1..Delta_3 of the pi circuit from the island couplings U_1..U_3.

    Braiding operation requires x_0 = 0; the returned pairs are
    (B,E), (E,F), (E,C) in that order.
    """
    if len(flux) != 4:
        raise ValueError("pi circuit has four fluxes x_0..x_3")
    if abs(flux[0]) > 1e-12:
        raise ValueError("braiding configuration requires x_0 = 0")
    u = tuple(float(v) for v in u)
    if len(u) != 3:
        raise ValueError("need U_1..U_3")
    al = pi_alphas(flux)
    norm_b = np.sqrt(np.cos(al["g1"]) ** 2 + np.cos(al["1b"]) ** 2
                     + np.cos(al["bg"]) ** 2)
    norm_e = np.sqrt(np.cos(al["12"]) ** 2 + np.cos(al["23"]) ** 2
                     + np.cos(al["31"]) ** 2)
    d1 = u[0] * (np.cos(al["bg"]) / norm_b) * (np.cos(al["23"]) / norm_e)
    d2 = u[1] * np.cos(al["31"]) / norm_e
    d3 = u[2] * np.cos(al["12"]) / norm_e
    return CouplingSet(u=u, delta=(d1, d2, d3),
                       labels=(("B", "E"), ("E", "F"), ("E", "C")))


def effective_braiding_hamiltonian(couplings: CouplingSet,
                                   majoranas: MajoranaSet) -> np.ndarray:
    """Low-energy Hamiltonian ``-i sum_k Delta_k gamma_X gamma_Y`` on six Majoranas.

    Works for both the three-coupling pi circuit and the five-coupling
    triangular qubit; the pairs come from the coupling labels.
    """
    if majoranas.count != 6:
        raise ConsistencyError("effective model lives on six Majorana operators")
    index = {name: k for k, name in enumerate(PI_MAJORANA_LABELS)}
    h = np.zeros((majoranas.dim, majoranas.dim), dtype=complex)
    for dk, (a, b) in zip(couplings.delta, couplings.labels):
        if a not in index or b not in index or a == b:
            raise ConsistencyError(f"unknown Majorana pair label ({a}, {b})")
        h = h - 1j * dk * majoranas[index[a]] @ majoranas[index[b]]
    return h


# Microscopic Majorana ordering on the ten-operator set:
MICRO_MAJORANA_LABELS = ("b1", "b2", "g1", "g2", "11", "12", "21", "22", "31", "32")


def microscopic_pi_hamiltonian(u, tunnel: float, flux: FluxConfig,
                               majoranas: MajoranaSet) -> np.ndarray:
    """Ten-Majorana pi-circuit Hamiltonian: island couplings plus both T-junctions.

    Evaluated at pinned phases (phi = phi_k = 0), with equal tunnel strength
    ``tunnel`` on all six legs and Aharonov-Bohm phases from the flux
    configuration.  Ordering of the ten operators follows
    :data:`MICRO_MAJORANA_LABELS`.
    """
    if majoranas.count != 10:
        raise ConsistencyError("microscopic pi-circuit model needs ten Majoranas")
    u = tuple(float(v) for v in u)
    if len(u) != 3:
        raise ValueError("need U_1..U_3")
    al = pi_alphas(flux)
    g = {name: majoranas[k] for k, name in enumerate(MICRO_MAJORANA_LABELS)}
    h = np.zeros((majoranas.dim, majoranas.dim), dtype=complex)
    for k, name in enumerate(("1", "2", "3")):
        h = h - 1j * u[k] * g[name + "1"] @ g[name + "2"]
    # first T-junction: bus / ground / island 1
    h = h + 1j * tunnel * (np.cos(al["bg"]) * g["b2"] @ g["g1"]
                           + np.cos(al["g1"]) * g["g1"] @ g["11"]
                           + np.cos(al["1b"]) * g["11"] @ g["b2"])
    # second T-junction: islands 1 / 2 / 3
    h = h + 1j * tunnel * (np.cos(al["12"]) * g["12"] @ g["21"]
                           + np.cos(al["23"]) * g["21"] @ g["31"]
                           + np.cos(al["31"]) * g["31"] @ g["12"])
    return h


# --- transmon spectrum ------------------------------------------------------

def transmon_levels(e_j0: float, e_c: float, n_max: int = 3) -> TransmonSpectrum:
    """Transmon mean levels and charge dispersions from the anharmonic closed forms."""
    if e_j0 <= 0 or e_c <= 0:
        raise ValueError("energies must be positive")
    if e_j0 / e_c < 10:
        warnings.warn(f"E_J0/E_C = {e_j0/e_c:.3g} < 10: transmon expansion degrades",
                      RegimeWarning, stacklevel=2)
    n = np.arange(n_max + 1)
    mean = (-e_j0 + np.sqrt(8.0 * e_j0 * e_c) * (n + 0.5)
            - e_c * (6.0 * n ** 2 + 6.0 * n + 3.0) / 12.0)
    fact = np.array([float(math.factorial(int(k))) for k in n])
    disp = (e_c * 2.0 ** (4 * n + 4) / fact * np.sqrt(2.0 / np.pi)
            * (e_j0 / (2.0 * e_c)) ** (n / 2.0 + 0.75)
            * np.exp(-np.sqrt(8.0 * e_j0 / e_c)))
    return TransmonSpectrum(mean_levels=tuple(mean), charge_dispersion=tuple(disp),
                            plasma_frequency=float(mean[1] - mean[0]))


def delta_pm_base(spectrum: TransmonSpectrum) -> tuple:
    """Bare parity couplings (delta_+, delta_-) = ((de_1 +/- de_0)/2)."""
    d0, d1 = spectrum.charge_dispersion[0], spectrum.charge_dispersion[1]
    return ((d1 + d0) / 2.0, (d1 - d0) / 2.0)


# --- triangular qubit / multi-qubit register ---------------------------------

RAMM_ALPHA_NAMES = ("12", "25", "51", "23", "34", "42", "4g", "g5", "54")


def ramm_phases(qubit_fluxes, global_flux: float = 0.0):
    """Aharonov-Bohm phases for each triangular qubit, compensating-flux convention.

    ``qubit_fluxes`` is a sequence of per-qubit 5-vectors ``(x_1..x_5)``; the
    compensating flux after each qubit makes the phases of different qubits
    independent.  Returns a list with one ``{name: alpha}`` dict per qubit.
    """
    x0 = float(global_flux)
    out = []
    for fx in qubit_fluxes:
        if len(fx) != 5:
            raise ValueError("each qubit has five fluxes x_1..x_5")
        x1, x2, x3, x4, x5 = (float(v) for v in fx)
        out.append({
            "12": (x0 + x1 + x2) / 2.0,
            "25": (x2 + 2.0 * x3 + 2.0 * x4 + x5) / 2.0,
            "51": -(x0 + x1 + 2.0 * x2 + 2.0 * x3 + 2.0 * x4 + x5) / 2.0,
            "23": (x2 + x3) / 2.0,
            "34": (x3 + x4) / 2.0,
            "42": -(x2 + 2.0 * x3 + x4) / 2.0,
            "4g": x4 / 2.0,
            "g5": x5 / 2.0,
            "54": -(x4 + x5) / 2.0,
        })
    return out


def _ramm_norms(al: dict) -> tuple:
    ne = np.sqrt(np.cos(al["12"]) ** 2 + np.cos(al["25"]) ** 2 + np.cos(al["51"]) ** 2)
    nb = np.sqrt(np.cos(al["23"]) ** 2 + np.cos(al["34"]) ** 2 + np.cos(al["42"]) ** 2)
    nc = np.sqrt(np.cos(al["4g"]) ** 2 + np.cos(al["g5"]) ** 2 + np.cos(al["54"]) ** 2)
    return ne, nb, nc


def ramm_couplings(phases: dict, u) -> CouplingSet:
    """Five couplings of one triangular qubit from its phases and island couplings.

    Pair order matches the qubit Hamiltonian: (F,E), (E,B), (B,A), (B,C), (E,C).
    """
    u = tuple(float(v) for v in u)
    if len(u) != 5:
        raise ValueError("need U_1..U_5")
    al = phases
    ne, nb, nc = _ramm_norms(al)
    d1 = u[0] * np.cos(al["25"]) / ne
    d2 = u[1] * (np.cos(al["34"]) / nb) * (np.cos(al["51"]) / ne)
    d3 = u[2] * np.cos(al["42"]) / nb
    d4 = u[3] * (np.cos(al["23"]) / nb) * (np.cos(al["g5"]) / nc)
    d5 = u[4] * (np.cos(al["12"]) / ne) * (np.cos(al["4g"]) / nc)
    return CouplingSet(u=u, delta=(d1, d2, d3, d4, d5),
                       labels=(("F", "E"), ("E", "B"), ("B", "A"),
                               ("B", "C"), ("E", "C")))


def pi_delta_pm(base, x0: float) -> tuple:
    """Pi-circuit parity couplings at readout: one T-junction cosine-ratio factor."""
    factor = 1.0 / np.sqrt(1.0 + 2.0 * np.cos(x0 / 2.0) ** 2)
    return (float(base[0]) * factor, float(base[1]) * factor)


def ramm_delta_pm(base, phases_per_qubit) -> tuple:
    """Register parity couplings: each qubit contributes one cosine-ratio factor.

    ``base`` is the bare (delta_+, delta_-) pair of the transmon; an empty
    phase list returns it unchanged.
    """
    dp, dm = float(base[0]), float(base[1])
    factor = 1.0
    for al in phases_per_qubit:
        ne, _, _ = _ramm_norms(al)
        factor *= np.cos(al["25"]) / ne
    return (dp * factor, dm * factor)


# --- operating-regime validation ---------------------------------------------

@dataclass(frozen=True)
class RegimeParams:
    """Energy scales (GHz) entering the operating-regime inequalities."""

    e_j_islands: float          # smallest island Josephson energy, braiding config
    omega_islands: float        # smallest island plasma frequency
    gap_wire: float             # induced gap Delta_g in the nanowire
    e_j0: float                 # transmon Josephson energy
    omega_0: float              # transmon plasma frequency
    omega_cavity: float         # bare cavity frequency
    e_m: float                  # Majorana tunnel coupling
    delta_max: float            # largest Coulomb coupling (on state)
    delta_min: float            # residual coupling (off state)
    k_b_t: float                # thermal energy
    g: float                    # qubit-cavity coupling
    kappa: float                # cavity decay rate
    delta_plus: float           # parity-dependent transmon splitting
    wire_length_ratio: float    # L / xi

    def __post_init__(self):
        for name, val in asdict(self).items():
            if val <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class RegimeReport:
    """Outcome of every operating-regime inequality; pure data, nothing omitted."""

    checks: tuple  # (name, lhs, rhs, satisfied)

    @property
    def all_satisfied(self) -> bool:
        return all(ok for _, _, _, ok in self.checks)

    def failed(self) -> tuple:
        return tuple(name for name, _, _, ok in self.checks if not ok)


def frequency_shift_from(g: float, delta_omega: float, delta_plus: float) -> float:
    # local copy of the readout closed form, to keep device importable standalone
    return 4.0 * g ** 2 * delta_plus / (delta_omega ** 2 - 4.0 * delta_plus ** 2)


def validate_regime(params: RegimeParams, margin: float = 3.0,
                    delta_omega: float | None = None) -> RegimeReport:
    """Evaluate every operating-regime inequality and report margins.

    Strict hierarchy separations ('much greater than') are checked with the
    given ``margin`` ratio; same-tier orderings are plain comparisons.  When
    ``delta_omega`` is omitted, the cavity detuning Omega_0 - omega_cavity is
    used for the resonance-shift test.  Failures are report entries, never
    exceptions.
    """
    p = params
    if delta_omega is None:
        delta_omega = p.omega_0 - p.omega_cavity
    shift = abs(frequency_shift_from(p.g, delta_omega, p.delta_plus))
    top = min(p.e_j_islands, p.omega_islands, p.gap_wire)
    mid = (p.e_j0, p.omega_0, p.omega_cavity)
    low = max(p.e_m, p.delta_max)
    checks = [
        ("islands_above_transmon", top, max(mid), top > max(mid)),
        ("transmon_above_majorana", min(mid), margin * low, min(mid) >= margin * low),
        ("majorana_above_thermal", min(p.e_m, p.delta_max),
         margin * max(p.k_b_t, p.delta_min),
         min(p.e_m, p.delta_max) >= margin * max(p.k_b_t, p.delta_min)),
        ("tunnel_above_parity_coupling", p.e_m, margin * p.delta_plus,
         p.e_m >= margin * p.delta_plus),
        ("shift_resolvable", shift, p.kappa, shift > p.kappa),
        ("wire_length", p.gap_wire * np.exp(-p.wire_length_ratio), p.delta_min,
         p.gap_wire * np.exp(-p.wire_length_ratio) < p.delta_min),
    ]
    return RegimeReport(checks=tuple(checks))


def reference_regime_params() -> RegimeParams:
    """Operating point at the published energy scales (GHz)."""
    return RegimeParams(
        e_j_islands=300.0, omega_islands=250.0, gap_wire=150.0,
        e_j0=100.0, omega_0=95.0, omega_cavity=90.0,
        e_m=10.0, delta_max=8.0, delta_min=8.0e-4,
        k_b_t=1.0, g=0.1, kappa=0.01, delta_plus=1.0,
        wire_length_ratio=20.0)


# --- JSON parameter records ---------------------------------------------------

def island_to_json(island: IslandParams) -> dict:
    return {"e_j0": island.josephson_zero, "e_c": island.charging,
            "q_offset": island.offset_charge}


def island_from_json(rec: dict) -> IslandParams:
    try:
        return IslandParams(float(rec["e_j0"]), float(rec["e_c"]),
                            float(rec.get("q_offset", 0.0)))
    except KeyError as exc:
        raise ValueError(f"island record missing field {exc}") from exc


@dataclass(frozen=True)
class CircuitParams:
    """Serializable description of one pi-circuit experiment."""

    islands: tuple                      # three IslandParams
    e_m: float
    transmon: IslandParams
    flux: tuple = ()                    # optional resting flux list
    x_max: float = 1.28
    lambda_plus: float = 400.0
    lambda_minus: float = 100.0

    def to_json(self) -> dict:
        return {
            "islands": [island_to_json(i) for i in self.islands],
            "e_m": self.e_m,
            "transmon": island_to_json(self.transmon),
            "flux": list(self.flux),
            "x_max": self.x_max,
            "lambda_plus": self.lambda_plus,
            "lambda_minus": self.lambda_minus,
        }

    @staticmethod
    def from_json(rec: dict) -> "CircuitParams":
        islands = tuple(island_from_json(r) for r in rec["islands"])
        if len(islands) != 3:
            raise ValueError("pi circuit has exactly three small islands")
        return CircuitParams(
            islands=islands,
            e_m=float(rec["e_m"]),
            transmon=island_from_json(rec["transmon"]),
            flux=tuple(float(x) for x in rec.get("flux", ())),
            x_max=float(rec.get("x_max", 1.28)),
            lambda_plus=float(rec.get("lambda_plus", 400.0)),
            lambda_minus=float(rec.get("lambda_minus", 100.0)),
        )


def default_circuit_params() -> CircuitParams:
    island = IslandParams(josephson_zero=50.0, charging=1.0)
    return CircuitParams(islands=(island, island, island), e_m=100.0,
                         transmon=IslandParams(josephson_zero=100.0, charging=2.0))


def load_params(path) -> CircuitParams:
    with open(path, "r", encoding="utf-8") as fh:
        return CircuitParams.from_json(json.load(fh))


def dump_params(params: CircuitParams, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(params.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
