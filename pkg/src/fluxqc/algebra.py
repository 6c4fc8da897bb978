"""Dense matrix representations of Majorana operators, parity sectors and states.

Majorana operators are built by the Jordan-Wigner construction.  For ``2m``
operators acting on a ``2**m``-dimensional space, mode ``j`` (0-based) owns the
pair ``(gamma_{2j}, gamma_{2j+1})``:

    gamma_{2j}   = Z x ... x Z x  X  x 1 x ... x 1
    gamma_{2j+1} = Z x ... x Z x (-Y) x 1 x ... x 1

with ``j`` leading ``Z`` factors.  The sign on ``Y`` is chosen so that the pair
parity ``i gamma_{2j} gamma_{2j+1}`` equals ``Z_j``: a computational basis state
``|n_0 n_1 ... n_{m-1}>`` (bit ``n_0`` most significant in the array index) is
then the Fock state with occupation ``n_j`` in mode ``j``, and the creation
operator ``(gamma_{2j} + i gamma_{2j+1})/2`` raises ``n_j``.  Empty mode means
pair parity +1.

All modules must share one :class:`MajoranaSet` instance per circuit: relative
signs of Majorana bilinears (and hence braiding chirality) depend on this
ordering convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError

_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_I = np.eye(2, dtype=complex)


def _kron_chain(factors) -> np.ndarray:
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


@dataclass(frozen=True)
class MajoranaSet:
    """An even number of Majorana operators as dense Hermitian involutions."""

    count: int
    operators: tuple = field(repr=False)

    @property
    def n_modes(self) -> int:
        return self.count // 2

    @property
    def dim(self) -> int:
        return 2 ** self.n_modes

    def __getitem__(self, i: int) -> np.ndarray:
        return self.operators[i]

    def pair_parity(self, i: int, j: int) -> np.ndarray:
        """The Hermitian parity operator ``i gamma_i gamma_j``."""
        if i == j:
            raise ValueError("parity operator needs two distinct Majoranas")
        return 1j * self.operators[i] @ self.operators[j]

    def total_parity(self, pairing=None) -> np.ndarray:
        """Product of pair parities; diagonal +/-1 for the default pairing."""
        pairing = default_pairing(self.count) if pairing is None else pairing
        out = np.eye(self.dim, dtype=complex)
        for a, b in pairing:
            out = out @ self.pair_parity(a, b)
        return out

    def basis_index(self, occupations) -> int:
        """Array index of the Fock basis state with the given mode occupations."""
        if len(occupations) != self.n_modes:
            raise ValueError("need one occupation number per mode")
        idx = 0
        for n in occupations:
            idx = 2 * idx + int(n)
        return idx


def default_pairing(count: int):
    """Consecutive pairing ((0,1), (2,3), ...) used for Fock occupation labels."""
    return tuple((2 * j, 2 * j + 1) for j in range(count // 2))


def build_majorana_set(count: int) -> MajoranaSet:
    """Construct ``count`` Majorana operators via the documented Jordan-Wigner map.

    Raises ValueError for odd or nonpositive ``count``.
    """
    if count < 2 or count % 2 != 0:
        raise ValueError(f"count must be a positive even integer, got {count}")
    m = count // 2
    ops = []
    for j in range(m):
        pre = [_Z] * j
        post = [_I] * (m - j - 1)
        ops.append(_kron_chain(pre + [_X] + post))
        ops.append(_kron_chain(pre + [-_Y] + post))
    return MajoranaSet(count=count, operators=tuple(ops))


@dataclass(frozen=True)
class ParitySector:
    """A fixed eigenspace of the total fermion parity.

    ``basis_states`` lists the full-space computational basis indices spanning
    the sector, in increasing order; the restriction isometry has those unit
    vectors as columns.
    """

    pairing: tuple
    parity: int
    basis_states: tuple
    dim_full: int

    @property
    def dim(self) -> int:
        return len(self.basis_states)

    @property
    def isometry(self) -> np.ndarray:
        v = np.zeros((self.dim_full, self.dim), dtype=complex)
        for col, idx in enumerate(self.basis_states):
            v[idx, col] = 1.0
        return v

    @property
    def projector(self) -> np.ndarray:
        v = self.isometry
        return v @ v.conj().T

    def restricted_unit_vector(self, full_index: int) -> np.ndarray:
        """Sector coordinates of a full-space computational basis vector."""
        col = self.basis_states.index(full_index)
        e = np.zeros(self.dim, dtype=complex)
        e[col] = 1.0
        return e


def parity_sector(mset: MajoranaSet, parity: int, pairing=None) -> ParitySector:
    """The +1 or -1 eigenspace of the total parity for the given mode pairing."""
    if parity not in (+1, -1):
        raise ValueError("parity must be +1 or -1")
    pairing = default_pairing(mset.count) if pairing is None else tuple(pairing)
    ptot = np.real(np.diag(mset.total_parity(pairing)))
    if not np.allclose(np.abs(ptot), 1.0, atol=1e-12):
        raise ConsistencyError("total parity is not diagonal +/-1 for this pairing")
    states = tuple(int(i) for i in np.nonzero(np.sign(ptot) == parity)[0])
    return ParitySector(pairing=pairing, parity=parity, basis_states=states,
                        dim_full=mset.dim)


def sector_restrict(h: np.ndarray, sector: ParitySector,
                    mset: MajoranaSet | None = None, tol: float = 1e-10) -> np.ndarray:
    """Restrict an operator to the sector; dimension halves.

    ``h`` must commute with the total parity operator.  Because the default
    total parity is diagonal, the check reduces to ``h`` having no matrix
    elements between the sector and its complement.
    """
    v = sector.isometry
    scale = max(np.abs(h).max(), 1.0)
    comp = np.setdiff1d(np.arange(sector.dim_full), np.array(sector.basis_states))
    if comp.size and np.abs(h[np.ix_(comp, sector.basis_states)]).max() > tol * scale:
        raise ConsistencyError("operator does not commute with the total parity")
    return v.conj().T @ h @ v


def ground_subspace(h: np.ndarray, degeneracy_tol: float | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of the eigenvector cluster at the bottom of the spectrum.

    Eigenvectors within ``degeneracy_tol`` of the minimum eigenvalue form the
    cluster; default tolerance is ``1e-9`` times the spectral range.  An empty
    gap simply returns a larger cluster, never an error.
    """
    w, v = np.linalg.eigh(h)
    if degeneracy_tol is None:
        degeneracy_tol = 1e-9 * max(w[-1] - w[0], 1.0)
    members = w <= w[0] + degeneracy_tol
    return v[:, members]


def assert_unitary(u: np.ndarray, tol: float = 1e-10) -> None:
    dev = np.linalg.norm(u.conj().T @ u - np.eye(u.shape[1]), 2)
    if dev > tol:
        raise ConsistencyError(f"matrix is not unitary to {tol:g} (deviation {dev:.3e})")


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Operator-norm distance between two matrices minimized over a global phase."""
    overlap = np.trace(b.conj().T @ a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b, 2))
