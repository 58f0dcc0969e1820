"""
Two-site Bose-Hubbard target.

Fock basis ``|n1>`` with ``n1 = 0..N`` bosons in well one. The Hamiltonian

    H = U/2 [n1(n1-1) + n2(n2-1)] - k (b1^+ b2 + b2^+ b1) + eps_b n1

is tridiagonal in that basis. Angular-momentum operators follow the
convention ``Jz = (n2 - n1)/2``, so positive ``Jz`` means more bosons in
well two.
"""

from dataclasses import dataclass
import enum
import math
import warnings

import numpy as np

from .errors import ValidationError
from .numkernel import SymTriMatrix, eig_sym_tridiagonal

DEFAULT_BIAS_FRACTION = 0.01
DEFAULT_SEPARATRIX_WINDOW = 3


class LevelTag(str, enum.Enum):
    RABI = "Rabi"
    SEPARATRIX = "Separatrix-adjacent"
    SELF_TRAPPED = "SelfTrapped"


@dataclass(frozen=True)
class BHParams:
    """Double-well parameters.

    ``bias`` defaults to ``0.01 * hopping``; pass ``bias=0.0`` for the
    exactly parity-symmetric well.
    """

    n_bosons: int
    hopping: float = 1.0
    interaction: float = 0.0
    bias: float = None

    def __post_init__(self):
        if isinstance(self.n_bosons, bool) or int(self.n_bosons) != self.n_bosons:
            raise ValidationError(f"n_bosons must be an integer, got {self.n_bosons!r}")
        object.__setattr__(self, "n_bosons", int(self.n_bosons))
        if self.n_bosons < 1:
            raise ValidationError(f"n_bosons must be >= 1, got {self.n_bosons}")
        if not (math.isfinite(self.hopping) and self.hopping > 0):
            raise ValidationError(f"hopping k must be > 0, got {self.hopping}")
        if not (math.isfinite(self.interaction) and self.interaction >= 0):
            raise ValidationError(f"interaction U must be >= 0, got {self.interaction}")
        if self.bias is None:
            object.__setattr__(self, "bias", DEFAULT_BIAS_FRACTION * self.hopping)
        if not (math.isfinite(self.bias) and self.bias >= 0):
            raise ValidationError(f"bias must be >= 0, got {self.bias}")

    @classmethod
    def from_control(cls, n_bosons, u, hopping=1.0, bias=None):
        """Build from the control parameter ``u = U N / (2 k)``."""
        if not (math.isfinite(u) and u >= 0):
            raise ValidationError(f"control parameter u must be >= 0, got {u}")
        return cls(n_bosons, hopping, 2.0 * hopping * u / n_bosons, bias)

    @property
    def dim(self):
        return self.n_bosons + 1

    @property
    def u(self):
        return self.interaction * self.n_bosons / (2.0 * self.hopping)


@dataclass(frozen=True)
class EigenSystem:
    params: BHParams
    energies: np.ndarray
    states: np.ndarray

    @property
    def dim(self):
        return self.energies.size


@dataclass(frozen=True)
class QMatrix:
    """``n1`` in the energy eigenbasis with its diagonal and number spread."""

    q: np.ndarray
    diag_expectation: np.ndarray
    std_dev: np.ndarray

    @property
    def variance(self):
        return self.std_dev**2


@dataclass(frozen=True)
class SeparatrixInfo:
    e_sep: float
    rabi_count: int
    classification: tuple
    window: int = DEFAULT_SEPARATRIX_WINDOW

    @property
    def self_trapped(self):
        """Level indices with energy above ``e_sep``."""
        return np.arange(self.rabi_count, len(self.classification))


def _number_diag(n):
    return np.arange(n + 1, dtype=float)


def build_hamiltonian(p: BHParams) -> SymTriMatrix:
    N = p.n_bosons
    n1 = _number_diag(N)
    n2 = N - n1
    diag = 0.5 * p.interaction * (n1 * (n1 - 1) + n2 * (n2 - 1)) + p.bias * n1
    offdiag = -p.hopping * np.sqrt((n1[:-1] + 1) * (N - n1[:-1]))
    return SymTriMatrix(diag, offdiag)


def diagonalize(p: BHParams) -> EigenSystem:
    dec = eig_sym_tridiagonal(build_hamiltonian(p))
    return EigenSystem(params=p, energies=dec.values, states=dec.vectors)


def q_matrix(es: EigenSystem) -> QMatrix:
    n1 = _number_diag(es.params.n_bosons)
    V = es.states
    q = V.T @ (n1[:, None] * V)
    q = 0.5 * (q + q.T)
    qnn = np.einsum("in,i,in->n", V, n1, V)
    second = np.einsum("in,i,in->n", V, n1**2, V)
    var = np.maximum(second - qnn**2, 0.0)
    for a in (q, qnn, var):
        a.setflags(write=False)
    return QMatrix(q=q, diag_expectation=qnn, std_dev=np.sqrt(var))


def angular_momentum_matrices(p: BHParams):
    """Return ``(Jx, Jy, Jz)`` in the Fock basis.

    ``Jx`` is real symmetric, ``Jy`` purely imaginary antisymmetric and
    ``Jz = (N - 2 n1)/2`` diagonal.
    """
    N = p.n_bosons
    n1 = _number_diag(N)
    # <n1+1| b1^+ b2 |n1>
    raise_ = np.sqrt((n1[:-1] + 1) * (N - n1[:-1]))
    up = np.diag(raise_, -1)
    jx = 0.5 * (up + up.T)
    jy = 0.5j * (up - up.T)
    jz = np.diag(0.5 * (N - 2 * n1))
    return jx, jy, jz


def parity_matrix(p: BHParams):
    return np.eye(p.dim)[::-1].copy()


def separatrix_energy(p: BHParams):
    return p.n_bosons * p.hopping * (p.u / 2.0 + 1.0)


def separatrix(p: BHParams, es: EigenSystem, window=DEFAULT_SEPARATRIX_WINDOW) -> SeparatrixInfo:
    if window < 0:
        raise ValidationError(f"separatrix window must be >= 0, got {window}")
    e_sep = separatrix_energy(p)
    dim = es.dim
    if p.u <= 1.0:
        warnings.warn(
            f"u = {p.u:g} <= 1: no separatrix, all levels are Rabi-like",
            RuntimeWarning, stacklevel=2)
        return SeparatrixInfo(e_sep, dim, (LevelTag.RABI,) * dim, window)
    rabi_count = int(np.searchsorted(es.energies, e_sep, side="left"))
    tags = []
    for n in range(dim):
        if rabi_count - window <= n < rabi_count + window:
            tags.append(LevelTag.SEPARATRIX)
        elif n < rabi_count:
            tags.append(LevelTag.RABI)
        else:
            tags.append(LevelTag.SELF_TRAPPED)
    return SeparatrixInfo(e_sep, rabi_count, tuple(tags), window)


def pair_splitting(es: EigenSystem, s: SeparatrixInfo):
    """Intra-pair splitting and pair spacing for the quasi-degenerate levels.

    Levels above ``e_sep`` are grouped as ``(r, r+1), (r+2, r+3), ...`` with
    ``r = rabi_count``. Returns an array of shape ``(npairs, 2)`` holding
    ``(splitting, spacing)``; the spacing of pair ``j`` is the gap to pair
    ``j+1`` (the top pair uses the gap to the pair below). Fewer than two
    pairs yields an empty array.
    """
    upper = es.energies[s.rabi_count:]
    npairs = upper.size // 2
    if npairs < 2:
        return np.empty((0, 2))
    lo = upper[0:2 * npairs:2]
    hi = upper[1:2 * npairs:2]
    splitting = hi - lo
    gaps = lo[1:] - hi[:-1]
    spacing = np.append(gaps, gaps[-1])
    return np.column_stack([splitting, spacing])


def level_parities(p: BHParams, es: EigenSystem):
    """Expectation ``<E_n|P|E_n>``; +-1 for parity eigenstates."""
    V = es.states
    return np.einsum("in,in->n", V, V[::-1])
