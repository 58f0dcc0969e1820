"""
Mean-field (discrete Gross-Pitaevskii) dynamics of the double well on the
Bloch sphere.

Per-particle variables ``j = J/N`` with ``|j| = 1/2``; ``jz = (|A2|^2 -
|A1|^2)/2`` so ``|A1|^2 = 1/2 - jz``. Substituting into the GP functional gives

    h = H/N = k u (1/2 + 2 jz^2) - 2 k jx

whose value at the hyperbolic point ``(-1/2, 0, 0)`` is ``k (u/2 + 1)``, the
separatrix energy per particle, with no additional constant. The equations
of motion follow from ``{j_a, j_b} = eps_abc j_c``:

    djx/dt = -4 k u jy jz
    djy/dt =  4 k u jx jz + 2 k jz
    djz/dt = -2 k jy
"""

from dataclasses import dataclass, replace
import math

import numpy as np

from .bhcore import LevelTag
from .errors import DriftError, ValidationError

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

NORM_TOLERANCE = 1e-6
DRIFT_TOLERANCE = 1e-6
TRAPPING_THRESHOLD = 0.05
# energy band (fraction of the full energy range) treated as on the separatrix
SEPARATRIX_BAND = 1e-3


@dataclass(frozen=True)
class MFParams:
    u: float
    hopping: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.u) and self.u >= 0):
            raise ValidationError(f"u must be >= 0, got {self.u}")
        if not (math.isfinite(self.hopping) and self.hopping > 0):
            raise ValidationError(f"hopping k must be > 0, got {self.hopping}")


@dataclass(frozen=True)
class BlochState:
    jx: float
    jy: float
    jz: float

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]))

    @classmethod
    def from_amplitudes(cls, a1, a2):
        """Bloch vector of normalised mode amplitudes ``(A1, A2)``.

        ``jx = Re(A1* A2)``, ``jy = -Im(A1* A2)``, ``jz = (|A2|^2 - |A1|^2)/2``.
        """
        a1 = complex(a1)
        a2 = complex(a2)
        c = a1.conjugate() * a2
        return cls(c.real, -c.imag, 0.5 * (abs(a2)**2 - abs(a1)**2))

    def as_array(self):
        return np.array([self.jx, self.jy, self.jz])

    @property
    def norm(self):
        return math.sqrt(self.jx**2 + self.jy**2 + self.jz**2)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray
    norm_drift: float
    energy_drift: float
    tag: LevelTag = None

    @property
    def jz(self):
        return self.states[:, 2]

    def mean_jz(self):
        t = self.times
        if t.size < 2:
            return float(self.states[0, 2])
        return float(_trapezoid(self.jz, t) / (t[-1] - t[0]))


def _energy(y, p):
    k = p.hopping
    return k * p.u * (0.5 + 2.0 * y[..., 2]**2) - 2.0 * k * y[..., 0]


def _rhs(y, p):
    k = p.hopping
    a = 4.0 * k * p.u
    jx, jy, jz = y[..., 0], y[..., 1], y[..., 2]
    out = np.empty_like(y)
    out[..., 0] = -a * jy * jz
    out[..., 1] = a * jx * jz + 2.0 * k * jz
    out[..., 2] = -2.0 * k * jy
    return out


def _check_norm(y):
    norms = np.sqrt(np.sum(np.asarray(y)**2, axis=-1))
    bad = np.abs(norms - 0.5) > NORM_TOLERANCE
    if np.any(bad):
        raise ValidationError(
            f"Bloch state must have |j| = 1/2, got |j| = {float(np.ravel(norms)[np.argmax(np.ravel(bad))]):.8g}")


def energy_per_particle(s: BlochState, p: MFParams) -> float:
    y = s.as_array()
    _check_norm(y)
    return float(_energy(y, p))


def derivative(s: BlochState, p: MFParams) -> BlochState:
    return BlochState.from_array(_rhs(s.as_array(), p))


def separatrix_energy(p: MFParams):
    """Energy per particle of the hyperbolic point ``(-1/2, 0, 0)``."""
    return p.hopping * (p.u / 2.0 + 1.0)


def energy_bounds(p: MFParams):
    k, u = p.hopping, p.u
    lo = k * u / 2.0 - k
    hi = k * u + k / (2.0 * u) if u > 1.0 else k * u / 2.0 + k
    return lo, hi


def fixed_points(p: MFParams):
    """Stationary points keyed by name; the self-trapped pair exists for u > 1."""
    pts = {"ground": BlochState(0.5, 0.0, 0.0),
           "hyperbolic" if p.u > 1.0 else "pi_mode": BlochState(-0.5, 0.0, 0.0)}
    if p.u > 1.0:
        jx = -1.0 / (2.0 * p.u)
        jz = 0.5 * math.sqrt(1.0 - p.u**-2)
        pts["trapped_up"] = BlochState(jx, 0.0, jz)
        pts["trapped_down"] = BlochState(jx, 0.0, -jz)
    return pts


def linear_frequency(p: MFParams, point="ground"):
    """Small-oscillation angular frequency around an elliptic fixed point."""
    k, u = p.hopping, p.u
    if point == "ground":
        return 2.0 * k * math.sqrt(1.0 + u)
    if point in ("trapped_up", "trapped_down") and u > 1.0:
        return 2.0 * k * math.sqrt(u * u - 1.0)
    if point == "pi_mode" and u < 1.0:
        return 2.0 * k * math.sqrt(1.0 - u)
    raise ValidationError(f"{point!r} is not an elliptic fixed point for u = {u:g}")


def integrate_many(states, p: MFParams, t_final, dt, record_every=1,
                   drift_tolerance=DRIFT_TOLERANCE):
    """RK4-integrate an ``(M, 3)`` batch of Bloch vectors in lock step.

    No renormalisation is applied; the final norm and energy drift serve as
    the accuracy diagnostic and exceeding ``drift_tolerance`` raises.
    """
    y = np.array(states, dtype=float)
    if y.ndim == 1:
        y = y[None]
    _check_norm(y)
    if not (dt > 0 and math.isfinite(dt)):
        raise ValidationError(f"dt must be > 0, got {dt}")
    if not (t_final >= 0 and math.isfinite(t_final)):
        raise ValidationError(f"t_final must be >= 0, got {t_final}")
    record_every = int(record_every)
    if record_every < 1:
        raise ValidationError("record_every must be >= 1")
    nsteps = int(round(t_final / dt))
    nrec = nsteps // record_every + 1
    rec = np.empty((nrec, ) + y.shape)
    rec[0] = y
    h = dt
    j = 1
    e0 = _energy(y, p)
    # drift is tracked at every step, not only at recorded samples
    nd = np.zeros(y.shape[0])
    ed = np.zeros(y.shape[0])
    for step in range(1, nsteps + 1):
        k1 = _rhs(y, p)
        k2 = _rhs(y + 0.5 * h * k1, p)
        k3 = _rhs(y + 0.5 * h * k2, p)
        k4 = _rhs(y + h * k3, p)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        np.maximum(nd, np.abs(np.sqrt(np.einsum("ij,ij->i", y, y)) - 0.5), out=nd)
        np.maximum(ed, np.abs(_energy(y, p) - e0), out=ed)
        if step % record_every == 0:
            rec[j] = y
            j += 1
    bad = (nd > drift_tolerance) | (ed > drift_tolerance * p.hopping) | ~np.isfinite(nd + ed)
    if np.any(bad):
        m = int(np.argmax(bad))
        raise DriftError(float(nd[m]), float(ed[m]), drift_tolerance)
    times = np.arange(nrec) * (record_every * dt)
    energies = _energy(rec, p)
    return [Trajectory(times=times, states=rec[:, m, :].copy(),
                       energies=energies[:, m].copy(),
                       norm_drift=float(nd[m]), energy_drift=float(ed[m]))
            for m in range(y.shape[0])]


def integrate(s0: BlochState, p: MFParams, t_final, dt, record_every=1,
              drift_tolerance=DRIFT_TOLERANCE) -> Trajectory:
    return integrate_many(s0.as_array()[None], p, t_final, dt, record_every,
                          drift_tolerance)[0]


def classify(tr: Trajectory, p: MFParams, threshold=TRAPPING_THRESHOLD,
             band=SEPARATRIX_BAND) -> LevelTag:
    """Rabi vs self-trapped from the time-averaged imbalance.

    The energy relative to the separatrix acts as arbiter: when the two
    criteria disagree, or the energy lies within ``band`` (fraction of the
    energy range) of the separatrix, the tag is ``SEPARATRIX``.
    """
    if p.u <= 1.0:
        return LevelTag.RABI
    e0 = float(tr.energies[0])
    lo, hi = energy_bounds(p)
    de = e0 - separatrix_energy(p)
    if abs(de) <= band * (hi - lo):
        return LevelTag.SEPARATRIX
    by_energy = LevelTag.SELF_TRAPPED if de > 0 else LevelTag.RABI
    by_average = (LevelTag.SELF_TRAPPED if abs(tr.mean_jz()) > threshold
                  else LevelTag.RABI)
    return by_energy if by_energy == by_average else LevelTag.SEPARATRIX


def with_tag(tr: Trajectory, p: MFParams) -> Trajectory:
    return replace(tr, tag=classify(tr, p))


def dominant_frequency(tr: Trajectory, min_crossings=10):
    """Oscillation frequency (cycles per unit time) of ``jz`` about its mean.

    Crossing times are located by linear interpolation between samples.
    Upward and downward crossings are timed separately: an offset in the
    finite-window mean shifts the two families in opposite directions, so
    each family alone still has the exact period.
    """
    x = tr.jz - tr.mean_jz()
    t = tr.times
    idx = np.nonzero(np.signbit(x[:-1]) != np.signbit(x[1:]))[0]
    if idx.size < min_crossings:
        raise ValidationError(
            f"only {idx.size} zero crossings of jz - <jz>; need {min_crossings} "
            "(integrate longer)")
    x0, x1 = x[idx], x[idx + 1]
    tc = t[idx] + (t[idx + 1] - t[idx]) * x0 / (x0 - x1)
    rising = x1 > x0
    freqs = []
    for fam in (tc[rising], tc[~rising]):
        if fam.size >= 2:
            freqs.append((fam.size - 1) / (fam[-1] - fam[0]))
    return float(np.mean(freqs))


def random_states(n, rng):
    """``n`` Bloch vectors uniform on the sphere of radius 1/2."""
    v = rng.normal(size=(n, 3))
    return 0.5 * v / np.linalg.norm(v, axis=1, keepdims=True)


def separatrix_crossing_jz(p: MFParams):
    """``jz > 0`` where the separatrix crosses the ``jy = 0, jx > 0`` meridian."""
    if p.u <= 1.0:
        raise ValidationError("no separatrix for u <= 1")
    target = separatrix_energy(p)

    def f(jz):
        return _energy(np.array([math.sqrt(0.25 - jz * jz), 0.0, jz]), p) - target

    if f(0.5) <= 0:
        raise ValidationError(f"separatrix does not cross the jx > 0 meridian for u = {p.u:g}")
    a, b = 0.0, 0.5
    for _ in range(200):
        c = 0.5 * (a + b)
        if f(c) > 0:
            b = c
        else:
            a = c
    return 0.5 * (a + b)
