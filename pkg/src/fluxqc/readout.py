"""Dispersive transmon readout: Jaynes-Cummings spectra and photon counting.

Energies are GHz (hbar = 1).  The readout Hamiltonian couples the two lowest
transmon levels to one cavity mode; the fermion parity P enters through the
parity couplings Delta_+/Delta_-, producing a parity-dependent effective
cavity frequency.  Measurement outcomes come from thresholding a Poissonian
photon count.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import RegimeWarning, SingularityError

DISPERSIVE_RATIO_LIMIT = 0.05


@dataclass(frozen=True)
class ReadoutParams:
    """Cavity, transmon and parity-coupling scales of one readout configuration."""

    cavity_freq: float          # omega_0
    qubit_freq: float           # Omega_0
    coupling: float             # g
    delta_plus: float
    delta_minus: float
    offset_charge: float = 0.0  # q_0, fixed to zero for maximal sensitivity
    cavity_decay: float = 0.01  # kappa
    n_photons: int = 1          # largest photon number the validity flag considers

    @property
    def detuning(self) -> float:
        return self.qubit_freq - self.cavity_freq

    @property
    def dispersive_ratio(self) -> float:
        return (self.n_photons + 1) * self.coupling ** 2 / self.detuning ** 2

    @property
    def dispersive_ok(self) -> bool:
        return self.dispersive_ratio <= DISPERSIVE_RATIO_LIMIT


def _require_zero_offset(params: ReadoutParams) -> None:
    if abs(params.offset_charge) > 1e-12:
        raise ValueError("readout formulas assume the induced charge q_0 = 0")


def jc_eigenvalues(params: ReadoutParams, n: int, parity: int) -> tuple:
    """Exact dressed-pair energies (eps_plus, eps_minus) for photon sector ``n``.

    These are the eigenvalues of the 2x2 block coupling |n, up, P> with
    |n+1, down, P>.  See :func:`jc_vacuum_energy` for the uncoupled vacuum.
    """
    _require_zero_offset(params)
    if n < 0:
        raise ValueError("photon number must be nonnegative")
    if parity not in (+1, -1):
        raise ValueError("parity must be +1 or -1")
    p = params
    base = (n + 0.5) * p.cavity_freq + parity * p.delta_minus
    root = 0.5 * math.sqrt((p.detuning + 2.0 * parity * p.delta_plus) ** 2
                           + 4.0 * p.coupling ** 2 * (n + 1))
    return (base + root, base - root)


def jc_vacuum_energy(params: ReadoutParams, parity: int) -> float:
    """Energy of the uncoupled vacuum state |0, down, P>."""
    _require_zero_offset(params)
    return parity * (params.delta_minus - params.delta_plus) \
        - 0.5 * params.qubit_freq


def dispersive_frequency(params: ReadoutParams, parity: int,
                         sigma_z: int = -1) -> float:
    """Parity-dependent cavity frequency, first order in g^2/detuning^2.

    Defaults to the transmon ground-state branch (sigma_z = -1).  Outside the
    dispersive regime a :class:`RegimeWarning` is attached to the result.
    """
    _require_zero_offset(params)
    if parity not in (+1, -1):
        raise ValueError("parity must be +1 or -1")
    if not params.dispersive_ok:
        warnings.warn(
            f"dispersive ratio (n+1)g^2/dw^2 = {params.dispersive_ratio:.3g} "
            f"exceeds {DISPERSIVE_RATIO_LIMIT}", RegimeWarning, stacklevel=2)
    return params.cavity_freq + sigma_z * params.coupling ** 2 \
        / (params.detuning + 2.0 * parity * params.delta_plus)


def frequency_shift(params: ReadoutParams) -> float:
    """Resonance shift between the two parities: 4 g^2 D_+ / (dw^2 - 4 D_+^2)."""
    _require_zero_offset(params)
    denom = params.detuning ** 2 - 4.0 * params.delta_plus ** 2
    if abs(denom) < 1e-6 * params.detuning ** 2:
        raise SingularityError(
            "detuning too close to the pole |dw| = 2 Delta_+: "
            f"denominator {denom:.3e}")
    return 4.0 * params.coupling ** 2 * params.delta_plus / denom


@dataclass(frozen=True)
class PhotonCountModel:
    """Expected photon counts for the two parities over one measurement window."""

    lambda_plus: float
    lambda_minus: float
    measurement_time: float = 1.0
    transmission_plus: float = 1.0
    transmission_minus: float = 1.0

    def __post_init__(self):
        if self.lambda_plus < 0 or self.lambda_minus < 0:
            raise ValueError("expected counts must be nonnegative")
        if self.lambda_plus < self.lambda_minus:
            raise ValueError("labeling convention requires lambda_+ >= lambda_-")

    @property
    def threshold(self) -> float:
        return math.sqrt(self.lambda_plus * self.lambda_minus)

    @property
    def discriminator(self) -> float:
        """The separation parameter (sqrt(l+) - sqrt(l-))/sqrt(2)."""
        return (math.sqrt(self.lambda_plus) - math.sqrt(self.lambda_minus)) \
            / math.sqrt(2.0)


def photon_model_from_shift(shift: float, kappa: float,
                            measurement_time: float) -> PhotonCountModel:
    """Counts from a Lorentzian transmission line probed at the bright parity.

    The bright parity transmits fully; the dark parity is suppressed by a
    Lorentzian of linewidth kappa detuned by the parity shift.  Expected
    counts are T * kappa * t_M.
    """
    t_plus = 1.0
    t_minus = (kappa / 2.0) ** 2 / (shift ** 2 + (kappa / 2.0) ** 2)
    return PhotonCountModel(
        lambda_plus=t_plus * kappa * measurement_time,
        lambda_minus=t_minus * kappa * measurement_time,
        measurement_time=measurement_time,
        transmission_plus=t_plus, transmission_minus=t_minus)


@dataclass(frozen=True)
class MeasurementError:
    """Outcome-error probability: exact Gaussian overlap and asymptotic form."""

    exact: float
    asymptotic: float
    degenerate: bool = False


def measurement_error(model: PhotonCountModel) -> MeasurementError:
    """Misassignment probability of the thresholded photon count.

    With normal approximations N(lambda, sqrt(lambda)) for the two count
    distributions, both error tails at the threshold sqrt(l+ l-) reduce to the
    same Gaussian integral, so the exact overlap is erfc(xbar)/2 with
    xbar = (sqrt(l+) - sqrt(l-))/sqrt(2).  The asymptotic companion is
    exp(-xbar^2) / (2 xbar sqrt(pi)); it diverges for equal rates, where the
    result is pinned to 1/2 and flagged degenerate.
    """
    if min(model.lambda_plus, model.lambda_minus) < 10:
        warnings.warn("Gaussian approximation degrades below lambda = 10",
                      RegimeWarning, stacklevel=2)
    xbar = model.discriminator
    if xbar == 0.0:
        return MeasurementError(exact=0.5, asymptotic=math.inf, degenerate=True)
    exact = 0.5 * erfc(xbar)
    asym = math.exp(-xbar ** 2) / (2.0 * xbar * math.sqrt(math.pi))
    return MeasurementError(exact=float(exact), asymptotic=asym)


def simulate_readout(parity: int, model: PhotonCountModel, rng) -> tuple:
    """Draw a photon count for the given parity and threshold it.

    Returns ``(outcome, n_ph)``.  The outcome is +1 only for counts strictly
    above the threshold; a count exactly at the threshold reads as -1.
    """
    if parity not in (+1, -1):
        raise ValueError("parity must be +1 or -1")
    lam = model.lambda_plus if parity == +1 else model.lambda_minus
    n_ph = int(rng.poisson(lam))
    outcome = +1 if n_ph > model.threshold else -1
    return outcome, n_ph
