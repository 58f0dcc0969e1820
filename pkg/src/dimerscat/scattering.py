"""
Transmission S-matrix of a probe on a tight-binding waveguide coupled to
site one of the double well.

In the target energy eigenbasis, at total energy ``E``,

    S_T(E) = sqrt(v) * i g * M^-1 * sqrt(v),
    M = (1 - g) (E - E'_n) delta_nm - s alpha Q_nm + i g v_n delta_nm,

with ``g = (J0/J)^2`` and ``v_n = 2 J sin k_n`` the channel velocity. The
target spectrum is mapped affinely into the lead band before use
(``rescale``) so that every channel stays open across the sweep window;
the interaction operator is multiplied by the same factor ``s``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ClosedChannelError, NumericalError, ValidationError
from .numkernel import lu_factor, lu_solve

DEFAULT_BAND_FRACTION = 0.35
DEFAULT_MARGIN = 0.05
DEFAULT_GRID_POINTS = 2001
# systems factorised together; bounds memory at ~ chunk * dim^2 * 16 bytes
SWEEP_CHUNK = 64
ELASTIC_FLOOR = 1e-300


class ElasticColumnError(NumericalError):
    def __init__(self, column):
        self.column = column
        super().__init__(
            f"column {column} has no inelastic weight; participation number "
            "is undefined (alpha = 0 or a numerically elastic column)")


@dataclass(frozen=True)
class LeadParams:
    hopping: float = 1.0
    gamma: float = 0.1

    def __post_init__(self):
        if not (math.isfinite(self.hopping) and self.hopping > 0):
            raise ValidationError(f"lead hopping J must be > 0, got {self.hopping}")
        if not (0.0 < self.gamma <= 1.0):
            raise ValidationError(f"coupling ratio gamma must lie in (0, 1], got {self.gamma}")

    @property
    def half_band(self):
        return 2.0 * self.hopping


@dataclass(frozen=True)
class RescaledTarget:
    energies: np.ndarray
    scale: float
    center: float
    band_fraction: float

    @property
    def dim(self):
        return self.energies.size

    def scaled_alpha(self, alpha):
        return self.scale * alpha


@dataclass(frozen=True)
class ChannelSet:
    total_energy: float
    kinetic: np.ndarray
    wavenumber: np.ndarray
    velocity: np.ndarray
    open: np.ndarray


@dataclass(frozen=True)
class SMatrixBlock:
    total_energy: float
    matrix: np.ndarray

    @property
    def dim(self):
        return self.matrix.shape[0]


def rescale(es, lead: LeadParams, band_fraction=DEFAULT_BAND_FRACTION) -> RescaledTarget:
    if not (0.0 < band_fraction < 1.0):
        raise ValidationError(f"band fraction must lie in (0, 1), got {band_fraction}")
    e = np.asarray(es.energies, dtype=float)
    width = float(e[-1] - e[0])
    if not width > 0:
        raise ValidationError("target spectrum has zero width; cannot rescale")
    s = band_fraction * 4.0 * lead.hopping / width
    c = 0.5 * float(e[-1] + e[0])
    ep = s * (e - c)
    ep.setflags(write=False)
    return RescaledTarget(energies=ep, scale=s, center=c, band_fraction=band_fraction)


def open_window(rt: RescaledTarget, lead: LeadParams, margin=DEFAULT_MARGIN):
    """Total-energy interval on which every channel is open, shrunk by ``margin``."""
    lo = float(rt.energies.max()) - lead.half_band + margin
    hi = float(rt.energies.min()) + lead.half_band - margin
    if not lo <= hi:
        raise ValidationError(
            f"no all-channels-open window for band fraction {rt.band_fraction:g} "
            f"and margin {margin:g}")
    return lo, hi


def energy_grid(rt, lead, points=DEFAULT_GRID_POINTS, margin=DEFAULT_MARGIN):
    points = int(points)
    if points < 1:
        raise ValidationError("grid needs at least one point")
    lo, hi = open_window(rt, lead, margin)
    if points == 1:
        return np.array([0.5 * (lo + hi)])
    return np.linspace(lo, hi, points)


def _kinematics(ep, energies, lead):
    eps = np.asarray(energies, dtype=float)[..., None] - ep
    is_open = np.abs(eps) < lead.half_band
    k = np.arccos(np.clip(-eps / lead.half_band, -1.0, 1.0))
    v = lead.half_band * np.sin(k)
    return eps, k, v, is_open


def channels(rt: RescaledTarget, energy, lead: LeadParams = LeadParams()) -> ChannelSet:
    eps, k, v, is_open = _kinematics(rt.energies, float(energy), lead)
    if not np.all(is_open):
        n = int(np.argmin(is_open))
        raise ClosedChannelError(n, float(eps[n]), lead.hopping)
    return ChannelSet(float(energy), eps, k, v, is_open)


def _check_open(ep, energies, lead):
    eps, k, v, is_open = _kinematics(ep, energies, lead)
    if not np.all(is_open):
        g, n = np.argwhere(~is_open)[0]
        raise ClosedChannelError(int(n), float(eps[g, n]), lead.hopping)
    return eps, v


def _s_batch(rt, q, lead, alpha, energies):
    """S_T for a 1-D array of total energies, shape ``(G, n, n)``."""
    if not (math.isfinite(alpha) and alpha >= 0):
        raise ValidationError(f"alpha must be >= 0, got {alpha}")
    qm = np.asarray(q.q if hasattr(q, "q") else q, dtype=float)
    n = rt.dim
    if qm.shape != (n, n):
        raise ValidationError(f"Q has shape {qm.shape}, expected {(n, n)}")
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    eps, v = _check_open(rt.energies, energies, lead)
    g = lead.gamma
    sa = rt.scale * alpha
    out = np.empty((energies.size, n, n), dtype=complex)
    idx = np.arange(n)
    for start in range(0, energies.size, SWEEP_CHUNK):
        sl = slice(start, start + SWEEP_CHUNK)
        m = np.broadcast_to(-sa * qm, (eps[sl].shape[0], n, n)).astype(complex)
        m[:, idx, idx] += (1.0 - g) * eps[sl] + 1j * g * v[sl]
        sv = np.sqrt(v[sl])
        rhs = np.zeros_like(m)
        rhs[:, idx, idx] = sv
        lu, perm = lu_factor(m)
        x = lu_solve(lu, perm, rhs)
        out[sl] = (1j * g) * sv[:, :, None] * x
    return out


def s_matrix(rt: RescaledTarget, q, lead: LeadParams, alpha, energy) -> SMatrixBlock:
    return SMatrixBlock(float(energy), _s_batch(rt, q, lead, alpha, [energy])[0])


def _matrix(s):
    return s.matrix if isinstance(s, SMatrixBlock) else np.asarray(s)


def inelastic_weights(s):
    """``|S_nm|^2`` with the diagonal zeroed (works on stacks of matrices)."""
    a = np.abs(_matrix(s))**2
    n = a.shape[-1]
    a[..., np.arange(n), np.arange(n)] = 0.0
    return a


def inelastic_cross_sections(s):
    """``2 sum_{n != m} |S_nm|^2`` for every column ``m``."""
    return 2.0 * inelastic_weights(s).sum(axis=-2)


def inelastic_cross_section(s, m) -> float:
    return float(inelastic_cross_sections(s)[..., m])


def flux_cross_section(s, m) -> float:
    """The cross section via unitarity: ``1 - |S_mm|^2 - |S_mm - 1|^2``."""
    smm = _matrix(s)[m, m]
    return float(1.0 - abs(smm)**2 - abs(smm - 1.0)**2)


def flux_defect(s):
    """``max |2 S^+ S - S - S^+|``; vanishes when all channels are open."""
    a = _matrix(s)
    ah = np.conj(np.swapaxes(a, -1, -2))
    return np.max(np.abs(2.0 * ah @ a - a - ah), axis=(-2, -1))


def participation_numbers(s):
    w = inelastic_weights(s)
    tot = w.sum(axis=-2)
    if np.any(tot < ELASTIC_FLOOR):
        raise ElasticColumnError(int(np.argwhere(tot < ELASTIC_FLOOR)[0][-1]))
    return tot**2 / (w**2).sum(axis=-2)


def participation_number(s, m) -> float:
    w = inelastic_weights(s)[:, m]
    tot = w.sum()
    if tot < ELASTIC_FLOOR:
        raise ElasticColumnError(m)
    return float(tot**2 / np.sum(w**2))


def predicted_resonances(rt, q, lead, alpha):
    """Lorentzian peak positions ``E'_m + s alpha Q_mm / (1 - gamma)``."""
    if lead.gamma >= 1.0:
        raise ValidationError("resonance shift is undefined for gamma = 1")
    qnn = np.asarray(q.diag_expectation)
    return rt.energies + rt.scale * alpha * qnn / (1.0 - lead.gamma)


@dataclass(frozen=True)
class SweepResult:
    energies: np.ndarray
    rho_in: np.ndarray
    pn: np.ndarray
    resonance_index: np.ndarray
    resonance_position: np.ndarray
    peak_height: np.ndarray
    peak_velocity: np.ndarray
    flux_defect: np.ndarray
    gamma: float

    @property
    def pn_average(self):
        if self.pn is None:
            return None
        return self.pn.mean(axis=0)

    @property
    def half_linewidth(self):
        """``gamma * v_m`` at each channel's resonance."""
        return self.gamma * self.peak_velocity


def sweep(rt, q, lead, alpha, energies) -> SweepResult:
    """Evaluate the S-matrix on a grid and collect per-channel observables.

    Rows of ``rho_in`` and ``pn`` follow the grid order; PN is omitted
    (``None``) when ``alpha == 0`` because it is undefined there.
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    s = _s_batch(rt, q, lead, alpha, energies)
    rho = inelastic_cross_sections(s)
    pn = participation_numbers(s) if alpha > 0 else None
    ridx = np.argmax(rho, axis=0)
    cols = np.arange(rt.dim)
    pos = energies[ridx]
    v_peak = lead.half_band * np.sin(
        np.arccos(np.clip(-(pos - rt.energies) / lead.half_band, -1.0, 1.0)))
    return SweepResult(
        energies=energies,
        rho_in=rho,
        pn=pn,
        resonance_index=ridx,
        resonance_position=pos,
        peak_height=rho[ridx, cols],
        peak_velocity=v_peak,
        flux_defect=flux_defect(s),
        gamma=lead.gamma,
    )
