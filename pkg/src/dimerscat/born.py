"""
First-order Born approximation of the transmission block.

The diagonal ``Q~`` of the interaction is absorbed into the unperturbed
resolvent and only the off-diagonal part ``Q^ = Q - Q~`` is treated as a
perturbation:

    S_Born = S_D - i kappa B,   kappa = s alpha / gamma,
    S_D,n  = i g v_n / ((1-g)(E - E'_n) - s alpha Q_nn + i g v_n),
    B      = S_D v^-1/2 Q^ v^-1/2 S_D.

All quantities use the rescaled spectrum and interaction of
``scattering.rescale`` so they compare point-for-point with the exact
solve.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ValidationError
from .scattering import _check_open, sweep


@dataclass(frozen=True)
class BornOperators:
    q_tilde: np.ndarray
    q_bar: np.ndarray
    kappa: float
    s_d: np.ndarray
    b: np.ndarray
    velocity: np.ndarray

    def a_terms(self):
        """``|S_D,k|^2 / v_k``; the simplified cross section sets these to one."""
        return np.abs(self.s_d)**2 / self.velocity


def _split(q):
    qm = np.asarray(q.q if hasattr(q, "q") else q, dtype=float)
    qt = np.diag(np.diag(qm))
    return qt, qm - qt


def _resolvent_diag(rt, qnn, lead, alpha, energies):
    eps, v = _check_open(rt.energies, np.atleast_1d(energies), lead)
    g = lead.gamma
    den = (1.0 - g) * eps - rt.scale * alpha * qnn + 1j * g * v
    return 1j * g * v / den, v, eps


def born_operators(rt, q, lead, alpha, energy) -> BornOperators:
    if not (math.isfinite(alpha) and alpha >= 0):
        raise ValidationError(f"alpha must be >= 0, got {alpha}")
    qt, qb = _split(q)
    s_d, v, _ = _resolvent_diag(rt, np.diag(qt), lead, alpha, energy)
    s_d, v = s_d[0], v[0]
    w = s_d / np.sqrt(v)
    b = w[:, None] * qb * w[None, :]
    return BornOperators(q_tilde=qt, q_bar=qb, kappa=rt.scale * alpha / lead.gamma,
                         s_d=s_d, b=b, velocity=v)


def s_matrix_born(rt, q, lead, alpha, energy):
    ops = born_operators(rt, q, lead, alpha, energy)
    return np.diag(ops.s_d) - 1j * ops.kappa * ops.b


def rho_in_born_full(ops: BornOperators, m) -> float:
    """``2 kappa^2 [(B B^+)_mm - |B_mm|^2]``.

    ``B_mm`` vanishes identically because ``Q^`` has a zero diagonal, so the
    two ways of writing the subtracted term agree.
    """
    bbh = np.sum(np.abs(ops.b[m, :])**2)
    return float(2.0 * ops.kappa**2 * (bbh - abs(ops.b[m, m])**2))


def rho_in_born_simplified(rt, q, lead, alpha, energy, m) -> float:
    return float(rho_in_born_simplified_grid(rt, q, lead, alpha, [energy])[0, m])


def rho_in_born_full_grid(rt, q, lead, alpha, energies):
    """Born cross section for every channel on a grid, shape ``(G, n)``."""
    qt, qb = _split(q)
    s_d, v, _ = _resolvent_diag(rt, np.diag(qt), lead, alpha, energies)
    kappa = rt.scale * alpha / lead.gamma
    a = np.abs(s_d)**2 / v
    # sum_k Q^_mk^2 A_k, times A_m
    return 2.0 * kappa**2 * a * (a @ (qb**2))


def rho_in_born_simplified_grid(rt, q, lead, alpha, energies):
    """Lorentzian in E times the number variance ``sigma_m^2``."""
    qnn = np.asarray(q.diag_expectation)
    var = np.asarray(q.variance)
    eps, v = _check_open(rt.energies, np.atleast_1d(energies), lead)
    g = lead.gamma
    sa = rt.scale * alpha
    lor = (sa**2 * v**2) / (((1.0 - g) * eps - sa * qnn)**2 + g**2 * v**2)
    return 2.0 / v * lor * var


@dataclass(frozen=True)
class BornRow:
    alpha: float
    scaled_alpha: float
    m: int
    resonance: float
    rho_exact: float
    rho_full: float
    rho_simplified: float
    err_full: float
    err_simplified: float
    a_max: float
    bound_holds: bool


def born_report(rt, q, lead, alphas, energies):
    """Compare both Born forms with the exact cross section.

    For each ``alpha`` the exact sweep fixes each channel's resonance
    (grid argmax); both Born expressions are evaluated there. ``bound_holds``
    is set when every A-term is at most one, in which case the simplified
    form must be an upper bound on the full Born cross section.
    """
    alphas = [float(a) for a in alphas]
    if not alphas or any(not a > 0 for a in alphas):
        raise ValidationError("Born report needs positive alpha values")
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    rows = []
    for alpha in alphas:
        res = sweep(rt, q, lead, alpha, energies)
        pos = res.resonance_position
        full = rho_in_born_full_grid(rt, q, lead, alpha, pos)
        simp = rho_in_born_simplified_grid(rt, q, lead, alpha, pos)
        qt, _ = _split(q)
        s_d, v, _ = _resolvent_diag(rt, np.diag(qt), lead, alpha, pos)
        a_terms = np.abs(s_d)**2 / v
        for m in range(rt.dim):
            exact = float(res.peak_height[m])
            f = float(full[m, m])
            sp = float(simp[m, m])
            amax = float(a_terms[m].max())
            ok = amax > 1.0 or sp >= f * (1.0 - 1e-12)
            rows.append(BornRow(alpha, rt.scale * alpha, m, float(pos[m]), exact, f, sp,
                                abs(f - exact) / exact, abs(sp - exact) / exact,
                                amax, ok))
    return rows


def loglog_slope(x, y):
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])

