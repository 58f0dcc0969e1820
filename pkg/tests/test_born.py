import numpy as np
import pytest

from dimerscat.bhcore import QMatrix
from dimerscat.born import (born_operators, born_report, loglog_slope,
                            rho_in_born_full, rho_in_born_full_grid,
                            rho_in_born_simplified, rho_in_born_simplified_grid,
                            s_matrix_born)
from dimerscat.errors import ValidationError
from dimerscat.scattering import (LeadParams, energy_grid, inelastic_cross_sections,
                                  rescale, s_matrix, sweep)

from conftest import target


def setup(n=20, gamma=0.1):
    p, es, q = target(n)
    lead = LeadParams(1.0, gamma)
    return rescale(es, lead), q, lead


def diagonal_q(q):
    d = np.array(q.diag_expectation)
    return QMatrix(q=np.diag(d), diag_expectation=d, std_dev=np.zeros_like(d))


class TestBornMatrix:
    def test_equals_exact_without_interaction(self):
        rt, q, lead = setup()
        for e in (-0.5, 0.0, 0.4):
            assert np.allclose(s_matrix_born(rt, q, lead, 0.0, e),
                               s_matrix(rt, q, lead, 0.0, e).matrix, atol=1e-15)

    def test_exact_for_diagonal_interaction(self):
        rt, q, lead = setup()
        qd = diagonal_q(q)
        for alpha in (0.3, 3.0):
            assert np.allclose(s_matrix_born(rt, qd, lead, alpha, 0.1),
                               s_matrix(rt, qd, lead, alpha, 0.1).matrix, atol=1e-14)

    def test_error_is_second_order(self):
        rt, q, lead = setup()
        alphas = np.array([1e-4, 2e-4, 4e-4])
        errs = []
        for a in alphas:
            s = s_matrix(rt, q, lead, a, 0.05).matrix
            sb = s_matrix_born(rt, q, lead, a, 0.05)
            errs.append(np.linalg.norm(sb - s) / np.linalg.norm(s - np.diag(np.diag(s))))
        assert errs[-1] < 1e-2
        assert loglog_slope(alphas, errs) == pytest.approx(1.0, abs=0.05)

    def test_b_has_zero_diagonal(self):
        rt, q, lead = setup()
        ops = born_operators(rt, q, lead, 1.0, 0.2)
        assert np.all(np.diag(ops.b) == 0)
        assert np.all(np.diag(ops.q_bar) == 0)
        assert np.allclose(ops.q_tilde + ops.q_bar, q.q)

    def test_rejects_alpha(self):
        rt, q, lead = setup()
        with pytest.raises(ValidationError):
            born_operators(rt, q, lead, -1.0, 0.0)


class TestBornCrossSections:
    def test_full_is_kappa_squared_row_norm(self):
        rt, q, lead = setup(25)
        ops = born_operators(rt, q, lead, 0.8, -0.1)
        for m in range(rt.dim):
            direct = 2 * ops.kappa**2 * np.sum(np.abs(np.delete(ops.b[m], m))**2)
            assert rho_in_born_full(ops, m) == pytest.approx(direct, rel=1e-12)

    def test_full_matches_inelastic_part_of_born_matrix(self):
        rt, q, lead = setup(25)
        sb = s_matrix_born(rt, q, lead, 0.8, -0.1)
        grid = rho_in_born_full_grid(rt, q, lead, 0.8, [-0.1])[0]
        assert np.allclose(inelastic_cross_sections(sb), grid, rtol=1e-12, atol=0)

    def test_grid_matches_pointwise(self):
        rt, q, lead = setup()
        grid = rho_in_born_full_grid(rt, q, lead, 1.0, [0.0, 0.3])
        ops = born_operators(rt, q, lead, 1.0, 0.3)
        assert grid[1, 4] == pytest.approx(rho_in_born_full(ops, 4), rel=1e-12)
        simp = rho_in_born_simplified_grid(rt, q, lead, 1.0, [0.3])
        assert simp[0, 4] == pytest.approx(rho_in_born_simplified(rt, q, lead, 1.0, 0.3, 4))

    def test_vanish_without_off_diagonal_coupling(self):
        rt, q, lead = setup()
        qd = diagonal_q(q)
        e = energy_grid(rt, lead, 11)
        assert np.all(rho_in_born_full_grid(rt, qd, lead, 1.0, e) == 0)
        assert np.all(rho_in_born_simplified_grid(rt, qd, lead, 1.0, e) == 0)

    def test_simplified_peak_location(self):
        rt, q, lead = setup()
        g = lead.gamma
        sa = rt.scale * 1.0
        m = 8
        pred = rt.energies[m] + sa * q.diag_expectation[m] / (1 - g)
        e = pred + np.linspace(-0.02, 0.02, 4001)
        vals = rho_in_born_simplified_grid(rt, q, lead, 1.0, e)[:, m]
        # the explicit 1/v and v^2 factors move the maximum by far less than the width
        assert abs(e[np.argmax(vals)] - pred) < 0.01 * g * 2

    def test_alpha_squared_scaling(self):
        rt, q, lead = setup()
        alphas = np.array([0.01, 0.02, 0.04])
        e = [0.1]
        for fn in (rho_in_born_full_grid, rho_in_born_simplified_grid):
            vals = [fn(rt, q, lead, a, e)[0, 3] for a in alphas]
            assert loglog_slope(alphas, vals) == pytest.approx(2.0, abs=0.05)

    def test_a_terms_at_most_one(self):
        for gamma in (0.1, 0.2):
            rt, q, lead = setup(30, gamma)
            for e in energy_grid(rt, lead, 41):
                assert np.max(born_operators(rt, q, lead, 1.0, e).a_terms()) <= 1.0

    def test_simplified_bounds_full_when_a_terms_small(self):
        # every A_k <= 1 gives sum_k Qbar_mk^2 A_k <= sigma_m^2 and A_m <= 1/v_m
        rt, q, lead = setup(30)
        grid = energy_grid(rt, lead, 201)
        for alpha in (0.05, 1.0):
            full = rho_in_born_full_grid(rt, q, lead, alpha, grid)
            simp = rho_in_born_simplified_grid(rt, q, lead, alpha, grid)
            assert np.all(simp >= full * (1 - 1e-12))

    def test_report(self):
        rt, q, lead = setup(16)
        grid = energy_grid(rt, lead, 401)
        rows = born_report(rt, q, lead, [0.01, 0.1], grid)
        assert len(rows) == 2 * rt.dim
        assert all(r.bound_holds for r in rows)
        exact = sweep(rt, q, lead, 0.01, grid).peak_height
        first = [r for r in rows if r.alpha == 0.01]
        assert np.allclose([r.rho_exact for r in first], exact)
        assert all(r.err_full < 0.5 for r in first)
        with pytest.raises(ValidationError):
            born_report(rt, q, lead, [0.0], grid)
