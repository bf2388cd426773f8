"""Tests for the continued-fraction eigenvalue machinery.

Expected values marked "frozen" were computed from the independent dense
matrix oracle (`dense_sigma_star`) and hand checks on the recursion weights,
then pinned here.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mgsim.errors import DegenerateTailError, NoRootError
from mgsim.symbol import PhysParams, eval_symbol
from mgsim.eigen import (
    alpha,
    backward_coefficients,
    cf_residual,
    closed_form_bounds,
    continuum_optimum,
    dense_sigma_star,
    forward_coefficients,
    illposedness_sweep,
    optimize_growth,
    sigma_bracket,
    sigma_shifted,
    solve_sigma_star,
    HALF_LAPLACIAN_THRESHOLD,
)

CANON = PhysParams(n2=1.0, m=1, eps_kappa=0.0, gamma=1.0)
# frozen: canonical mode (1,1), no diffusion; dense oracle agrees to 16 digits
SIGMA_CANON = 0.1019869392585389


class TestAlpha:
    def test_hand_values(self):
        assert alpha(1, 1, 1, CANON) == 4.0
        assert alpha(2, 1, 1, CANON) == 25.0

    def test_matches_vertical_multiplier(self):
        # 1/alpha_p = (m/2) M3(k1, k2, m p): the recursion weights are the
        # multiplier's vertical component sampled on the mode ladder
        for (k1, k2, m, p) in [(1, 1, 1, 1), (1, 1, 1, 4), (3, 2, 2, 5),
                               (6, 4, 1, 3), (9, 4, 3, 7)]:
            par = PhysParams(n2=1.5, m=m)
            lhs = 1.0 / alpha(p, k1, k2, par)
            rhs = 0.5 * m * eval_symbol((k1, k2, m * p), 1.5)[2]
            assert abs(lhs - rhs) < 1e-15 * (1.0 + abs(rhs))

    def test_quartic_growth(self):
        # canonical weights grow like p^4 with unit prefactor
        a100 = alpha(100, 1, 1, CANON)
        assert abs(a100 / 100 ** 4 - 1.0) < 1e-3

    def test_rejects_bad_mode(self):
        with pytest.raises(ValueError):
            alpha(1, 0, 1, CANON)
        with pytest.raises(ValueError):
            alpha(0, 1, 1, CANON)


class TestSigmaShifted:
    def test_laplacian_shift(self):
        par = PhysParams(eps_kappa=0.1, gamma=1.0)
        assert sigma_shifted(0.0, 1, 1, 1, par) == pytest.approx(0.3, abs=1e-15)

    def test_fractional_shift(self):
        par = PhysParams(eps_kappa=0.1, gamma=0.5)
        assert sigma_shifted(0.0, 1, 2, 1, par) == pytest.approx(
            0.1 * math.sqrt(6.0), abs=1e-15)


class TestBrackets:
    def test_canonical_bracket(self):
        lo, hi = sigma_bracket(1, 1, CANON)
        assert lo == pytest.approx(0.1, abs=1e-15)
        assert hi == pytest.approx(math.sqrt(2.0) / 10.0, abs=1e-15)

    def test_canonical_closed_forms(self):
        lower, upper = closed_form_bounds(1, 1, CANON)
        assert lower == pytest.approx(1.0 / 25.0, abs=1e-15)
        assert upper == pytest.approx(2.0 / 4.0, abs=1e-15)

    def test_64_diffusive_closed_lower(self):
        # frozen: 1/alpha_2 - e_2 at (6,4), eps_kappa = 0.01
        par = PhysParams(eps_kappa=0.01)
        lower, upper = closed_form_bounds(6, 4, par)
        assert lower == pytest.approx(0.3066666666666666, abs=1e-12)
        assert upper > lower


class TestCfResidual:
    def test_sign_change_across_bracket(self):
        lo, hi = sigma_bracket(1, 1, CANON)
        assert cf_residual(lo * 1.0000001, 1, 1, CANON) < 0.0
        assert cf_residual(hi, 1, 1, CANON) > 0.0

    def test_degenerate_tail_below_branch(self):
        with pytest.raises(DegenerateTailError):
            cf_residual(0.01, 1, 1, CANON)

    def test_residual_tiny_at_root(self):
        assert abs(cf_residual(SIGMA_CANON, 1, 1, CANON, depth=128)) < 1e-12

    def test_depth_validation(self):
        with pytest.raises(ValueError):
            cf_residual(0.1, 1, 1, CANON, depth=1)


class TestSolve:
    def test_canonical_root_frozen(self):
        sol = solve_sigma_star(1, 1, CANON)
        assert sol.sigma_star == pytest.approx(SIGMA_CANON, abs=1e-12)
        assert sol.residual < 1e-12
        assert sol.sign_changes >= 1
        lo, hi = sol.bracket
        assert lo <= sol.sigma_star <= hi

    def test_matches_dense_oracle(self):
        assert dense_sigma_star(1, 1, CANON, 64) == pytest.approx(
            SIGMA_CANON, abs=1e-12)
        for (k1, k2, eps) in [(2, 3, 0.0), (6, 4, 0.01), (1, 2, 0.0),
                              (5, 5, 0.005), (3, 1, 0.01)]:
            par = PhysParams(eps_kappa=eps)
            sol = solve_sigma_star(k1, k2, par)
            ref = dense_sigma_star(k1, k2, par, depth=64)
            assert abs(sol.sigma_star - ref) < 1e-9, (k1, k2, eps)

    def test_product_lemma(self):
        # the principal root satisfies sigma_1 sigma_2 in
        # [1/(alpha_1 alpha_2), 2/(alpha_1 alpha_2)]
        for (k1, k2, eps) in [(1, 1, 0.0), (6, 4, 0.01), (2, 5, 0.002)]:
            par = PhysParams(eps_kappa=eps)
            sol = solve_sigma_star(k1, k2, par)
            a1, a2 = alpha(1, k1, k2, par), alpha(2, k1, k2, par)
            s1 = sigma_shifted(sol.sigma_star, 1, k1, k2, par)
            s2 = sigma_shifted(sol.sigma_star, 2, k1, k2, par)
            prod = s1 * s2
            assert 1.0 / (a1 * a2) * (1 - 1e-10) <= prod <= 2.0 / (a1 * a2) * (1 + 1e-10)

    def test_frozen_diffusive_roots(self):
        par = PhysParams(eps_kappa=0.01)
        assert solve_sigma_star(6, 4, par).sigma_star == pytest.approx(
            0.7310367787565613, abs=1e-10)
        assert solve_sigma_star(1, 1, par).sigma_star == pytest.approx(
            0.05714564320543115, abs=1e-10)

    def test_depth_doubling_from_coarse_start(self):
        coarse = solve_sigma_star(1, 1, CANON, depth=8)
        fine = solve_sigma_star(1, 1, CANON, depth=64)
        assert abs(coarse.sigma_star - fine.sigma_star) < 1e-12
        assert coarse.depth > 8  # doubling actually engaged

    def test_stable_mode_raises_no_root(self):
        # all integer modes are stable at this diffusivity; the bracket is
        # positive but the residual never changes sign
        with pytest.raises(NoRootError):
            solve_sigma_star(2, 2, PhysParams(eps_kappa=0.05))

    def test_certified_stable_raises_with_bracket(self):
        with pytest.raises(NoRootError) as exc:
            solve_sigma_star(1, 1, PhysParams(eps_kappa=1.0))
        assert exc.value.hi is not None and exc.value.hi <= 0.0

    def test_monotone_in_diffusivity(self):
        rates = []
        for eps in (0.0, 0.002, 0.01, 0.02):
            rates.append(solve_sigma_star(1, 1, PhysParams(eps_kappa=eps)).sigma_star)
        assert all(a > b for a, b in zip(rates, rates[1:]))


class TestCoefficients:
    def test_normalization_and_signs(self):
        sol = solve_sigma_star(1, 1, CANON)
        c = sol.c
        assert c[0] == 4.0  # c_1 = alpha_1 exactly
        assert c[1] == pytest.approx(-SIGMA_CANON * 25.0 * 4.0, rel=1e-12)
        nz = np.abs(c) > 0
        signs = np.sign(c[nz])
        assert (signs[::2] > 0).all() and (signs[1::2] < 0).all()

    def test_superexponential_decay(self):
        sol = solve_sigma_star(1, 1, CANON)
        mags = np.abs(sol.c[:10])
        ratios = mags[3:] / mags[2:-1]
        assert (ratios < 0.15).all(), "tail should collapse faster than 0.15^p"

    def test_recursion_rows_certified(self):
        sol = solve_sigma_star(6, 4, PhysParams(eps_kappa=0.01))
        assert sol.recursion_residual < 1e-10

    def test_forward_recursion_unstable(self):
        # forward recursion from the p = 1 line tracks the minimal solution
        # only briefly before the dominant solution takes over: agreement to
        # 1e-6 through p = 5, then catastrophic divergence (frozen, float64)
        sol = solve_sigma_star(1, 1, CANON)
        fwd = forward_coefficients(sol.sigma_star, 1, 1, CANON, depth=16)
        bwd = sol.c
        for p in range(1, 6):
            rel = abs(fwd[p - 1] - bwd[p - 1]) / abs(bwd[p - 1])
            assert rel < 1e-6, f"forward lost the minimal solution at p={p}"
        rel10 = abs(fwd[9] - bwd[9]) / abs(bwd[9])
        assert rel10 > 1e3, "forward recursion should have diverged by p=10"

    def test_underflowed_tail_is_zero_not_junk(self):
        sol = solve_sigma_star(1, 1, CANON, depth=256)
        c = sol.c
        assert c[0] == 4.0
        # deep tail underflows cleanly to zero
        assert (np.abs(c[200:]) == 0.0).all()


class TestOptimize:
    def test_small_box_consistency(self):
        par = PhysParams(eps_kappa=0.02)
        res = optimize_growth(par, box=8)
        assert res.sigma_star >= res.lb_max
        assert res.n_unstable == len(res.table)
        assert res.table[0][2] == res.sigma_star
        # frozen: sigma argmax (4,3), certified-bound argmax (2,3)
        assert (res.k1, res.k2) == (4, 3)
        assert res.lb_argmax == (2, 3)
        lb_row = [r for r in res.table if (r[0], r[1]) == (res.k1, res.k2)][0]
        assert res.lower_bound_at_opt == lb_row[3]

    def test_continuum_prediction(self):
        k1, k2 = continuum_optimum(PhysParams(eps_kappa=0.01))
        assert k1 == pytest.approx(6.25)
        assert k2 == pytest.approx(math.sqrt(1.0 / 0.08))

    def test_no_unstable_modes(self):
        with pytest.raises(NoRootError):
            optimize_growth(PhysParams(eps_kappa=10.0), box=4)


class TestSweep:
    def test_nondiffusive_diverges(self):
        res = illposedness_sweep("nondiffusive", CANON, 2, 10)
        assert res.verdict == "diverging"
        for row in res.rows:
            assert row.k1 == row.j ** 2 and row.k2 == row.j
            assert row.certified
            assert row.sigma_star >= row.j / 26.0
        rates = [r.sigma_star for r in res.rows]
        assert rates == sorted(rates)

    def test_half_laplacian_below_threshold_diverges(self):
        res = illposedness_sweep(
            "fractional", PhysParams(eps_kappa=0.02, gamma=0.5), 2, 10)
        assert res.verdict == "diverging"
        for row in res.rows:
            assert row.sigma_star >= row.bound > 0.0

    def test_half_laplacian_above_threshold_terminates(self):
        assert 0.1 > HALF_LAPLACIAN_THRESHOLD
        res = illposedness_sweep(
            "fractional", PhysParams(eps_kappa=0.1, gamma=0.5), 2, 10)
        assert res.verdict == "terminated"
        assert "non-positive" in res.reason
        # the certificate failed, but the computed rates are still reported
        assert all(r.sigma_star is not None for r in res.rows)
        assert all(not r.certified for r in res.rows)

    def test_strong_dissipation_terminates_at_finite_j(self):
        res = illposedness_sweep(
            "fractional", PhysParams(eps_kappa=0.02, gamma=0.75), 2, 12)
        assert res.verdict == "terminated"
        found = [r.j for r in res.rows if r.sigma_star is not None]
        missing = [r.j for r in res.rows if r.sigma_star is None]
        assert found and missing, "expected growth at small j, none at large j"
        assert max(found) < min(missing) or min(missing) > res.j_min

    def test_small_gamma_diverges(self):
        res = illposedness_sweep(
            "fractional", PhysParams(eps_kappa=0.01, gamma=0.25), 2, 8)
        assert res.verdict == "diverging"

    def test_regime_validation(self):
        with pytest.raises(ValueError):
            illposedness_sweep("nondiffusive", PhysParams(eps_kappa=0.1), 2, 4)
        with pytest.raises(ValueError):
            illposedness_sweep("fractional", PhysParams(), 2, 4)
        with pytest.raises(ValueError):
            illposedness_sweep("bogus", PhysParams(), 2, 4)
        with pytest.raises(ValueError):
            illposedness_sweep("nondiffusive", PhysParams(m=3), 2, 8)


@given(
    k1=st.integers(1, 8),
    k2=st.integers(1, 8),
    eps=st.floats(0.0, 0.02),
)
@settings(max_examples=30, deadline=None)
def test_root_properties(k1, k2, eps):
    par = PhysParams(eps_kappa=eps)
    try:
        sol = solve_sigma_star(k1, k2, par)
    except NoRootError:
        return
    assert sol.sigma_star > 0.0
    assert sol.residual < 1e-12
    assert sol.c[0] == alpha(1, k1, k2, par)
    ref = dense_sigma_star(k1, k2, par, depth=sol.depth)
    assert abs(sol.sigma_star - ref) < 1e-9
