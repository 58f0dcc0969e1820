import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dimerscat.bhcore import LevelTag
from dimerscat.errors import DriftError, ValidationError
from dimerscat.meanfield import (BlochState, MFParams, _rhs, classify,
                                 derivative, dominant_frequency, energy_bounds,
                                 energy_per_particle, fixed_points, integrate,
                                 integrate_many, linear_frequency, random_states,
                                 separatrix_crossing_jz, separatrix_energy, with_tag)

amplitude = st.tuples(*(st.floats(-1, 1) for _ in range(4))).filter(
    lambda t: sum(x * x for x in t) > 1e-3)


def normalised(t):
    a = np.array([t[0] + 1j * t[1], t[2] + 1j * t[3]])
    return a / np.linalg.norm(a)


def gp_energy(a1, a2, p):
    """Per-particle GP functional with U N = 2 k u."""
    k, un = p.hopping, 2 * p.hopping * p.u
    return 0.5 * un * (abs(a1)**4 + abs(a2)**4) - 2 * k * (np.conj(a1) * a2).real


def gp_rhs(a, p):
    """i dA_j/dt = dh/dA_j^*."""
    k, un = p.hopping, 2 * p.hopping * p.u
    return -1j * np.array([un * abs(a[0])**2 * a[0] - k * a[1],
                           un * abs(a[1])**2 * a[1] - k * a[0]])


def jacobian(y, p, h=1e-6):
    cols = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        cols.append((_rhs(y + e, p) - _rhs(y - e, p)) / (2 * h))
    return np.array(cols).T


class TestEnergy:
    def test_examples(self):
        p = MFParams(5.0)
        assert energy_per_particle(BlochState(0.5, 0, 0), p) == pytest.approx(1.5)
        assert energy_per_particle(BlochState(-0.5, 0, 0), p) == pytest.approx(3.5)
        assert energy_per_particle(BlochState(-0.5, 0, 0), p) == pytest.approx(
            separatrix_energy(p))

    @settings(max_examples=60, deadline=None)
    @given(t=amplitude, u=st.floats(0, 10), k=st.floats(0.1, 3))
    def test_matches_gp_functional(self, t, u, k):
        p = MFParams(u, k)
        a = normalised(t)
        s = BlochState.from_amplitudes(*a)
        assert s.norm == pytest.approx(0.5, abs=1e-12)
        assert energy_per_particle(s, p) == pytest.approx(gp_energy(*a, p), abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(t=amplitude, u=st.floats(0, 10))
    def test_mirror_symmetry(self, t, u):
        p = MFParams(u)
        s = BlochState.from_amplitudes(*normalised(t))
        m = BlochState(s.jx, s.jy, -s.jz)
        assert energy_per_particle(s, p) == pytest.approx(energy_per_particle(m, p), abs=1e-13)

    def test_rejects_off_sphere(self):
        with pytest.raises(ValidationError):
            energy_per_particle(BlochState(0.3, 0, 0), MFParams(1.0))

    def test_bounds(self, rng):
        for u in (0.0, 0.5, 3.0, 5.0):
            p = MFParams(u)
            lo, hi = energy_bounds(p)
            e = np.array([energy_per_particle(BlochState.from_array(y), p)
                          for y in random_states(500, rng)])
            assert lo - 1e-12 <= e.min() and e.max() <= hi + 1e-12

    def test_rejects_params(self):
        with pytest.raises(ValidationError):
            MFParams(-1.0)
        with pytest.raises(ValidationError):
            MFParams(1.0, 0.0)


class TestDynamics:
    @settings(max_examples=40, deadline=None)
    @given(t=amplitude, u=st.floats(0, 8), k=st.floats(0.2, 2))
    def test_equations_follow_amplitude_dynamics(self, t, u, k):
        p = MFParams(u, k)
        a = normalised(t)
        da = gp_rhs(a, p)
        h = 1e-6
        fwd = BlochState.from_amplitudes(*(a + h * da)).as_array()
        bwd = BlochState.from_amplitudes(*(a - h * da)).as_array()
        fd = (fwd - bwd) / (2 * h)
        got = derivative(BlochState.from_amplitudes(*a), p).as_array()
        assert np.allclose(got, fd, atol=1e-7 * (1 + u) * k)

    @pytest.mark.parametrize("u", [0.0, 0.5, 1.0, 2.5, 5.0])
    def test_fixed_points_are_stationary(self, u):
        p = MFParams(u)
        pts = fixed_points(p)
        assert ("trapped_up" in pts) == (u > 1)
        for s in pts.values():
            assert s.norm == pytest.approx(0.5, abs=1e-14)
            assert np.allclose(derivative(s, p).as_array(), 0.0, atol=1e-14)

    def test_trapped_points(self):
        pts = fixed_points(MFParams(5.0))
        up = pts["trapped_up"]
        assert up.jx == pytest.approx(-0.1)
        assert up.jz == pytest.approx(0.5 * math.sqrt(1 - 1 / 25))
        assert pts["trapped_down"].jz == pytest.approx(-up.jz)

    @pytest.mark.parametrize("u,point", [(0.0, "ground"), (3.0, "ground"),
                                         (3.0, "trapped_up"), (5.0, "trapped_down"),
                                         (0.4, "pi_mode"), (1.7, "trapped_up")])
    def test_linear_frequency_matches_jacobian(self, u, point):
        p = MFParams(u, 1.3)
        y = fixed_points(p)[point].as_array()
        ev = np.linalg.eigvals(jacobian(y, p))
        omega = np.max(np.abs(ev.imag))
        assert np.max(np.abs(ev.real)) < 1e-6
        assert linear_frequency(p, point) == pytest.approx(omega, rel=1e-6)

    def test_hyperbolic_point_is_unstable(self):
        p = MFParams(5.0)
        ev = np.linalg.eigvals(jacobian(fixed_points(p)["hyperbolic"].as_array(), p))
        assert np.max(ev.real) > 1.0
        with pytest.raises(ValidationError):
            linear_frequency(p, "hyperbolic")

    def test_free_precession(self):
        # u = 0: jz = cos(2kt)/2, jy = sin(2kt)/2
        k = 1.0
        p = MFParams(0.0, k)
        quarter = math.pi / (4 * k)
        dt = quarter / 5000
        tr = integrate(BlochState(0, 0, 0.5), p, 2 * quarter, dt, record_every=1)
        assert np.allclose(tr.states[5000], [0, 0.5, 0], atol=1e-9)
        assert np.allclose(tr.states[-1], [0, 0, -0.5], atol=1e-6)
        assert np.allclose(tr.jz, 0.5 * np.cos(2 * k * tr.times), atol=1e-9)

    def test_rabi_frequency_at_zero_interaction(self):
        p = MFParams(0.0, 0.7)
        tr = integrate(BlochState(0, 0, 0.5), p, 60.0, 1e-3, record_every=5)
        f = dominant_frequency(tr)
        assert 1 / f == pytest.approx(math.pi / 0.7, rel=1e-6)

    def test_small_oscillation_frequency(self):
        p = MFParams(3.0)
        eps = 1e-3
        y = np.array([math.sqrt(0.25 - eps**2), 0.0, eps])
        tr = integrate(BlochState.from_array(y), p, 40.0, 1e-3, record_every=2)
        f = dominant_frequency(tr)
        assert 2 * math.pi * f == pytest.approx(linear_frequency(p), rel=1e-5)

    def test_drift_is_small(self, rng):
        p = MFParams(5.0)
        trs = integrate_many(random_states(20, rng), p, 50.0, 1e-3, record_every=50)
        assert max(t.norm_drift for t in trs) < 1e-9
        assert max(t.energy_drift for t in trs) < 1e-9

    def test_drift_error_raised(self):
        with pytest.raises(DriftError):
            integrate(BlochState(0.3, 0.0, 0.4), MFParams(5.0), 5.0, 0.2)

    def test_record_layout(self):
        tr = integrate(BlochState(0.5, 0, 0), MFParams(2.0), 1.0, 0.01, record_every=10)
        assert tr.times.shape == (11,) and tr.states.shape == (11, 3)
        assert tr.times[-1] == pytest.approx(1.0)

    @pytest.mark.parametrize("kw", [dict(dt=0.0), dict(t_final=-1.0),
                                    dict(record_every=0)])
    def test_rejects_bad_integration(self, kw):
        args = dict(t_final=1.0, dt=0.01, record_every=1)
        args.update(kw)
        with pytest.raises(ValidationError):
            integrate(BlochState(0.5, 0, 0), MFParams(1.0), **args)

    def test_too_few_crossings(self):
        tr = integrate(BlochState(0, 0, 0.5), MFParams(0.0), 1.0, 0.01)
        with pytest.raises(ValidationError):
            dominant_frequency(tr)


class TestClassification:
    def test_self_trapped_stays_positive(self):
        p = MFParams(5.0)
        tr = with_tag(integrate(BlochState(0, 0, 0.5), p, 50.0, 1e-3, record_every=10), p)
        assert np.all(tr.jz > 0)
        assert tr.tag == LevelTag.SELF_TRAPPED

    def test_rabi_averages_to_zero(self):
        p = MFParams(5.0)
        y = np.array([math.sqrt(0.25 - 0.1**2), 0.0, 0.1])
        tr = integrate(BlochState.from_array(y), p, 100.0, 1e-3, record_every=10)
        assert abs(tr.mean_jz()) < 0.05
        assert classify(tr, p) == LevelTag.RABI

    @pytest.mark.parametrize("u", [0.0, 0.8, 1.0])
    def test_everything_rabi_without_separatrix(self, u):
        p = MFParams(u)
        tr = integrate(BlochState(0, 0, 0.5), p, 10.0, 1e-3, record_every=10)
        assert classify(tr, p) == LevelTag.RABI

    def test_hyperbolic_point_is_on_separatrix(self):
        p = MFParams(5.0)
        tr = integrate(fixed_points(p)["hyperbolic"], p, 10.0, 1e-3, record_every=10)
        assert classify(tr, p) == LevelTag.SEPARATRIX

    def test_crossing_point_lies_on_separatrix(self):
        p = MFParams(5.0)
        jz = separatrix_crossing_jz(p)
        s = BlochState(math.sqrt(0.25 - jz * jz), 0.0, jz)
        assert energy_per_particle(s, p) == pytest.approx(separatrix_energy(p), abs=1e-12)

    @pytest.mark.parametrize("u", [1.0, 2.0])
    def test_crossing_needs_strong_interaction(self, u):
        with pytest.raises(ValidationError):
            separatrix_crossing_jz(MFParams(u))

    def test_energy_and_average_agree(self):
        rng = np.random.default_rng(7)
        p = MFParams(5.0)
        lo, hi = energy_bounds(p)
        trs = integrate_many(random_states(40, rng), p, 100.0, 1e-3, record_every=10)
        for tr in trs:
            de = tr.energies[0] - separatrix_energy(p)
            if abs(de) < 0.01 * (hi - lo):
                continue
            expect = LevelTag.SELF_TRAPPED if de > 0 else LevelTag.RABI
            assert classify(tr, p) == expect
