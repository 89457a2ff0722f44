import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.optimize import brentq

from pbbsim.classical import (
    NONPHYSICAL,
    STABLE_BRIGHT,
    STABLE_DIM,
    UNSTABLE,
    IntegrationError,
    MeanFieldState,
    fold_drives,
    intuitive_critical_eta,
    intuitive_photon_number,
    maxwell_bloch_integrate,
    mean_field_rhs,
    neoclassical_denominator,
    neoclassical_roots,
    semiclassical_denominator,
    semiclassical_fixed_point,
    semiclassical_pseudospin,
    semiclassical_roots,
    semiclassical_shift,
    trace_boundary,
)
from pbbsim.model import SystemParams

SCAN = np.logspace(-6, 4, 100_000)

# zero or physically sized; denormal-scale rates make the absolute residual check vacuous
small_rates = st.one_of(st.just(0.0), st.floats(1e-6, 3))
drives = st.one_of(st.just(0.0), st.floats(1e-3, 60))


def scan_roots(denominator, p):
    """Independent oracle: sign changes of n*D(n) - eta^2 on a log grid, refined by brentq."""
    f = lambda n: n * denominator(n, p) - p.eta**2  # noqa: E731
    vals = f(SCAN)
    idx = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
    return [brentq(f, SCAN[i], SCAN[i + 1], xtol=1e-15, rtol=1e-14) for i in idx]


def random_draws(count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield SystemParams(
            g=float(rng.uniform(0, 150)),
            gamma=float(rng.choice([0.0, rng.uniform(0, 2)])),
            delta=float(rng.uniform(0.5, 60)),
            eta=float(rng.uniform(0.1, 60)),
        )


def _well_separated(values, rtol=1e-3):
    v = sorted(values)
    return all(b > a * (1 + rtol) for a, b in zip(v, v[1:]))


class TestSemiclassicalRoots:
    def test_empty_cavity(self):
        rs = semiclassical_roots(SystemParams(g=0, delta=0, eta=2))
        assert [r.n for r in rs.roots] == pytest.approx([4.0], rel=1e-14)

    def test_three_root_window_and_bright_branch(self):
        p = SystemParams(g=100, delta=2, eta=20)
        rs = semiclassical_roots(p)
        assert [r.kind for r in rs.roots] == [STABLE_DIM, UNSTABLE, STABLE_BRIGHT]
        assert rs.bright.n == pytest.approx(p.empty_cavity_photons, rel=0.05)
        assert len(semiclassical_roots(p.replace(eta=0.3)).roots) == 1
        assert len(semiclassical_roots(p.replace(eta=45)).roots) == 1

    def test_dephasing_removes_the_shift(self):
        p = SystemParams(g=100, gamma=1e-6, gamma_c=0.1, delta=10, eta=20)
        rs = semiclassical_roots(p)
        assert len(rs.roots) == 1
        assert rs.roots[0].n == pytest.approx(p.empty_cavity_photons, rel=1e-4)

    def test_without_dephasing_bistability_survives_small_gamma(self):
        for gamma in (0.0, 1e-8, 1e-4):
            assert semiclassical_roots(SystemParams(g=100, gamma=gamma, delta=10, eta=20)).bistable

    @given(g=st.floats(0, 150), gamma=small_rates, gamma_c=small_rates, delta=st.floats(-60, 60), eta=drives)
    def test_residuals(self, g, gamma, gamma_c, delta, eta):
        p = SystemParams(g=g, gamma=gamma, gamma_c=gamma_c, delta=delta, eta=eta)
        rs = semiclassical_roots(p)
        assert 1 <= len(rs.physical) <= 3
        for r in rs.roots:
            assert r.n >= 0
            assert r.residual < 1e-9 * max(1, eta**2)
            assert abs(r.n - eta**2 / semiclassical_denominator(r.n, p)) < 1e-9 * max(1, eta**2)

    def test_matches_sign_change_scan(self):
        checked = 0
        for p in random_draws(100, 1):
            expected = scan_roots(semiclassical_denominator, p)
            got = [r.n for r in semiclassical_roots(p).roots]
            if not (_well_separated(got) and all(1e-6 < n < 1e4 for n in got)):
                continue
            checked += 1
            assert len(got) == len(expected), p
            np.testing.assert_allclose(got, expected, rtol=1e-6)
        assert checked >= 90

    def test_shift_reciprocity(self):
        # without dephasing the shift magnitude is symmetric in delta and gamma
        rng = np.random.default_rng(3)
        for _ in range(50):
            g, d, gam, n = rng.uniform(0.1, 100), rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(0, 30)
            a = semiclassical_shift(n, SystemParams(g=g, delta=d, gamma=gam))
            b = semiclassical_shift(n, SystemParams(g=g, delta=gam, gamma=d))
            assert abs(a) == pytest.approx(abs(b), rel=1e-13)
            assert a == pytest.approx(complex(b.imag, b.real), rel=1e-13)

    def test_denominator_is_shifted_detuning(self):
        p = SystemParams(g=30, gamma=0.4, gamma_c=0.2, delta=-3, eta=1)
        for n in (0.0, 0.1, 5.0):
            s = semiclassical_shift(n, p)
            assert semiclassical_denominator(n, p) == pytest.approx(abs(p.kappa - 1j * p.delta - s) ** 2, rel=1e-13)


class TestNeoclassicalRoots:
    def test_uncoupled(self):
        p = SystemParams(g=0, delta=3, eta=5)
        assert [r.n for r in neoclassical_roots(p).physical] == pytest.approx([p.empty_cavity_photons])

    def test_reference_point_against_scan(self):
        p = SystemParams(g=100, delta=25, eta=30)
        rs = neoclassical_roots(p)
        assert [r.kind for r in rs.roots] == [NONPHYSICAL, STABLE_DIM, UNSTABLE, STABLE_BRIGHT]
        np.testing.assert_allclose([r.n for r in rs.physical], scan_roots(neoclassical_denominator, p), rtol=1e-6)
        # the spurious root obeys the equation with the opposite shift sign
        low = rs.roots[0].n
        assert low == pytest.approx(p.eta**2 / neoclassical_denominator(low, p, branch=-1), rel=1e-9)

    def test_matches_sign_change_scan(self):
        checked = 0
        for p in random_draws(100, 2):
            rs = neoclassical_roots(p)
            got = [r.n for r in rs.physical]
            if not (_well_separated(got) and all(1e-6 < n < 1e4 for n in got)):
                continue
            checked += 1
            expected = scan_roots(neoclassical_denominator, p)
            assert len(got) == len(expected), p
            np.testing.assert_allclose(got, expected, rtol=1e-6)
        assert checked >= 90

    @given(g=st.floats(0.1, 150), delta=st.floats(0.01, 60), eta=st.floats(0.01, 60))
    def test_structure(self, g, delta, eta):
        p = SystemParams(g=g, delta=delta, eta=eta)
        rs = neoclassical_roots(p)
        assert len(rs.roots) <= 4
        assert rs.roots[0].kind == NONPHYSICAL
        assert all(r.kind != NONPHYSICAL for r in rs.roots[1:])
        for r in rs.roots:
            assert r.residual < 1e-9 * max(1, eta**2)

    def test_resonant_special_case(self):
        g = 100.0
        below = neoclassical_roots(SystemParams(g=g, eta=30))
        assert [r.n for r in below.physical] == [0.0]
        above = neoclassical_roots(SystemParams(g=g, eta=60))
        assert above.bright.n == pytest.approx(60**2 - g**2 / 4)
        assert neoclassical_roots(SystemParams(g=g, eta=g / 2)).degenerate

    def test_window_collapses_on_resonance(self):
        lo, hi = fold_drives("neoclassical", SystemParams(g=100, delta=1e-3))
        assert hi - lo < 1e-2
        assert lo == pytest.approx(50, abs=1e-2)


class TestLadderEstimate:
    def test_uncoupled(self):
        p = SystemParams(g=0, delta=4, eta=3)
        rs = intuitive_photon_number(p)
        assert rs.bright.n == pytest.approx(p.empty_cavity_photons, rel=1e-14)

    def test_threshold(self):
        p = SystemParams(g=100, delta=10)
        eta_c = intuitive_critical_eta(p)
        assert intuitive_photon_number(p.replace(eta=eta_c * (1 - 1e-9))).roots == ()
        assert len(intuitive_photon_number(p.replace(eta=eta_c * (1 + 1e-9))).roots) == 2

    def test_threshold_tracks_lower_fold_at_small_detuning(self):
        # the estimate equals the neoclassical lower fold up to corrections in (kappa/delta)^2
        gaps = []
        for delta in (2.0, 10.0, 25.0, 50.0):
            p = SystemParams(g=100, delta=delta)
            gaps.append(abs(intuitive_critical_eta(p) / fold_drives("neoclassical", p)[0] - 1))
        assert gaps[0] < 1e-6
        assert gaps == sorted(gaps)

    def test_lower_root_turns_nonphysical_at_half_coupling(self):
        p = SystemParams(g=100, delta=10)
        assert all(r.kind != NONPHYSICAL for r in intuitive_photon_number(p.replace(eta=49.9)).roots)
        above = intuitive_photon_number(p.replace(eta=50.1))
        assert above.roots[0].kind == NONPHYSICAL
        at = intuitive_photon_number(p.replace(eta=50.0))
        assert min(r.n for r in at.roots) == pytest.approx(0, abs=1e-20)

    def test_requires_positive_detuning(self):
        with pytest.raises(ValueError):
            intuitive_photon_number(SystemParams(g=1, delta=0, eta=1))


class TestPseudospin:
    def test_examples(self):
        p = SystemParams(g=100, delta=10)
        assert semiclassical_pseudospin(0, p) == 1
        assert semiclassical_pseudospin(4, p) == pytest.approx(1 - (80000 / 80100) ** 2, rel=1e-12)
        assert semiclassical_pseudospin(4, p.replace(delta=1e6)) == pytest.approx(1, abs=1e-6)

    def test_fixed_point_matches_formula(self):
        p = SystemParams(g=100, delta=25, eta=30)
        for root in semiclassical_roots(p).roots:
            ms = semiclassical_fixed_point(root.n, p)
            assert ms.pseudospin == pytest.approx(semiclassical_pseudospin(root.n, p), rel=1e-9)


class TestMaxwellBloch:
    def test_pseudospin_conserved(self):
        p = SystemParams(g=100, delta=25, eta=30)
        traj = maxwell_bloch_integrate(MeanFieldState(0j, 0j, -1.0), p, 100.0, 0.5)
        drift = np.abs(traj.pseudospin - 1)
        assert np.all(drift < 1e-9 * np.maximum(traj.t, 1e-3))

    def test_linear_oscillator(self):
        p = SystemParams(g=0, delta=3, eta=2)
        traj = maxwell_bloch_integrate(MeanFieldState(0j, 0j, -1.0), p, 40.0, 1.0)
        assert abs(traj.final.a_mean - p.eta / (p.kappa - 1j * p.delta)) < 1e-8

    def test_stable_fixed_points_hold(self):
        p = SystemParams(g=100, gamma=0.1, delta=25, eta=20)
        rs = semiclassical_roots(p)
        assert rs.bistable
        for root in (rs.dim, rs.bright):
            start = semiclassical_fixed_point(root.n, p)
            rhs = mean_field_rhs(start, p)
            assert max(abs(rhs.a_mean), abs(rhs.sigma_mean), abs(rhs.sigma_z_mean)) < 1e-8
            traj = maxwell_bloch_integrate(start, p, 50.0, 1.0)
            assert abs(traj.n_mean[-1] - root.n) < 1e-6 * max(1, root.n)

    def test_rejects_bad_times(self):
        with pytest.raises(ValueError):
            maxwell_bloch_integrate(MeanFieldState(0j, 0j, -1.0), SystemParams(g=1), -1.0, 0.1)

    def test_integration_error_carries_time(self):
        err = IntegrationError("step size underflow", 3.5)
        assert err.t == 3.5


class TestBoundary:
    def test_collapse_to_half_coupling(self):
        curve = trace_boundary("neoclassical", 0, 0, [0.001, 0.01, 0.1, 1.0])
        widths = [pt.eta_upper - pt.eta_lower for pt in curve.points]
        assert widths == sorted(widths)
        assert curve.points[0].eta_lower == pytest.approx(50, abs=2e-3)
        assert curve.points[0].eta_upper == pytest.approx(50, abs=2e-3)

    def test_edges_match_folds(self):
        deltas = [2.0, 10.0, 25.0, 50.0]
        for theory in ("semiclassical", "neoclassical"):
            curve = trace_boundary(theory, 0, 0, deltas)
            for pt in curve.points:
                folds = fold_drives(theory, SystemParams(g=100, delta=pt.delta))
                assert pt.eta_lower <= pt.eta_upper
                assert abs(pt.eta_lower - folds[0]) < 1e-3
                assert abs(pt.eta_upper - folds[-1]) < 1e-3

    def test_theories_converge_at_large_detuning(self):
        semi = trace_boundary("semiclassical", 0, 0, [50.0]).points[0]
        neo = trace_boundary("neoclassical", 0, 0, [50.0]).points[0]
        assert abs(semi.eta_upper - neo.eta_upper) < 3
        assert abs(semi.eta_lower - neo.eta_lower) < 3

    def test_qubit_decay_raises_lower_edge(self):
        curves = [trace_boundary("semiclassical", gamma, 0, [10.0]).points[0] for gamma in (0, 0.1, 1)]
        lows = [c.eta_lower for c in curves]
        highs = [c.eta_upper for c in curves]
        assert lows == sorted(lows) and lows[-1] > 1.5 * lows[0]
        assert max(highs) - min(highs) < 0.05 * highs[0]

    def test_no_window_gives_empty_curve(self):
        assert trace_boundary("semiclassical", 0, 0.1, [10.0], g=1).points == []
        with pytest.raises(ValueError):
            trace_boundary("neoclassical", 0, 0, [3.0, 1.0])
