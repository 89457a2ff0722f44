import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pbbsim.bright import ansatz_state, build
from pbbsim.mcwf import TrajectoryRecord
from pbbsim.model import PureState, SystemParams
from pbbsim.telegraph import (
    BRIGHT,
    DIM,
    TRANSIENT,
    SegmentationSettings,
    entropy_bits,
    mandel_q,
    mutual_information,
    pseudospin,
    pseudospin_from_density_matrix,
    qubit_density_from_expectations,
    quantile_reference_levels,
    segment,
    summarize,
)

from conftest import random_state


def square_wave(period, t_final, dt=0.1, low=0.0, high=10.0):
    t = np.arange(0, t_final, dt)
    x = np.where((t % period) < period / 2, high, low)
    return t, x


def fake_record(t, n, sigma=0.0, sigma_z=-1.0, variance=None, seed=0):
    size = t.size
    full = lambda v: np.broadcast_to(np.asarray(v), (size,)).copy()  # noqa: E731
    return TrajectoryRecord(
        seed=seed,
        params=SystemParams(g=1.0),
        n_max=10,
        t=t,
        n_mean=np.asarray(n, dtype=float),
        a_mean=full(0j),
        sigma_mean=full(complex(sigma)) if np.ndim(sigma) == 0 else np.asarray(sigma, dtype=complex),
        sigma_z_mean=full(float(sigma_z)) if np.ndim(sigma_z) == 0 else np.asarray(sigma_z, dtype=float),
        photon_variance=full(0.0) if variance is None else np.asarray(variance, dtype=float),
        norm_sq=full(1.0),
        jump_times=np.array([]),
        jump_channels=np.array([], dtype=np.int8),
    )


class TestSegmentation:
    def test_constant_dim_signal(self):
        t = np.arange(0, 100, 0.1)
        seg = segment(t, np.full(t.size, 0.3), 0.0, 10.0)
        assert seg.filling_factor == 0.0
        assert seg.transient_cut == 0.0
        assert len(seg.dwells) == 1

    def test_square_wave(self):
        t, x = square_wave(40.0, 400.0)
        seg = segment(t, x, 0.0, 10.0)
        assert abs(seg.filling_factor - 0.5) <= 1 / 10
        bright = [w for w in seg.dwells if w.label == BRIGHT]
        assert len(bright) == 10
        assert all(abs(w.duration - 20.0) < 1e-9 for w in bright)

    def test_noisy_square_wave(self, rng):
        t, x = square_wave(60.0, 600.0)
        x = x + rng.normal(scale=1.0, size=x.size)
        seg = segment(t, x, 0.0, 10.0)
        assert abs(seg.filling_factor - 0.5) < 0.02
        assert len(seg.dwells) == 20

    def test_short_blips_are_merged(self):
        t = np.arange(0, 100, 0.1)
        x = np.zeros(t.size)
        x[500:520] = 10.0  # 2/kappa spike, shorter than min_dwell
        seg = segment(t, x, 0.0, 10.0)
        assert seg.filling_factor == 0.0

    def test_transient_is_discarded(self):
        t = np.arange(0, 100, 0.1)
        x = np.full(t.size, 5.0)
        x[300:] = 10.0
        seg = segment(t, x, 0.0, 10.0)
        assert (seg.labels[:300] == TRANSIENT).all()
        assert seg.filling_factor == 1.0
        assert seg.transient_cut > 29.0

    def test_rejects_bad_input(self):
        t = np.arange(0, 10, 0.1)
        with pytest.raises(ValueError):
            segment(t, np.zeros(t.size), 0.0, 1.0)
        t = np.arange(0, 50, 0.1)
        with pytest.raises(ValueError):
            segment(t, np.zeros(t.size), 1.0, 1.0)
        with pytest.raises(ValueError):
            segment(t, np.zeros(t.size - 1), 0.0, 1.0)
        with pytest.raises(ValueError):
            SegmentationSettings(enter_bright=0.2, enter_dim=0.4)

    @given(
        st.lists(st.tuples(st.booleans(), st.integers(1, 300)), min_size=1, max_size=12),
        st.integers(0, 2**32 - 1),
    )
    def test_idempotent_and_bounded(self, runs, seed):
        rng = np.random.default_rng(seed)
        x = np.concatenate([np.full(k, 10.0 if b else 0.0) for b, k in runs] + [np.zeros(400)])
        x = x + rng.normal(scale=0.5, size=x.size)
        t = np.arange(x.size) * 0.1
        seg = segment(t, x, 0.0, 10.0)
        kept = seg.labels[seg.analyzed]
        assert set(np.unique(kept)) <= {DIM, BRIGHT}
        assert 0.0 <= seg.filling_factor <= 1.0
        clean = np.where(seg.labels == BRIGHT, 10.0, 0.0)
        again = segment(t[seg.analyzed], clean[seg.analyzed], 0.0, 10.0)
        assert np.array_equal(again.labels, kept)


class TestQubitMeasures:
    def test_pseudospin_examples(self):
        assert pseudospin(0.0, -1.0) == 1.0
        assert pseudospin(0.5, 0.0) == 1.0
        assert pseudospin(0.0, 0.0) == 0.0
        np.testing.assert_allclose(pseudospin(np.array([0.25j, 0]), np.array([0.0, 0.6])), [0.25, 0.36])

    def test_purity_identity(self, rng):
        for _ in range(200):
            x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            rho = x @ x.conj().T
            rho /= np.trace(rho)
            sigma, sz = rho[1, 0], (rho[1, 1] - rho[0, 0]).real
            assert abs(pseudospin(sigma, sz) - pseudospin_from_density_matrix(rho)) < 1e-12
            np.testing.assert_allclose(qubit_density_from_expectations(sigma, sz), rho, atol=1e-12)

    def test_mutual_information_limits(self, rng):
        n_max = 6
        product = np.zeros((2, n_max + 1), dtype=complex)
        product[:, :] = np.outer([0.6, 0.8], random_state(rng, n_max)[0] / np.linalg.norm(random_state(rng, n_max)[0]))
        product /= np.linalg.norm(product)
        assert abs(mutual_information(PureState(product))) < 1e-9

        bell = np.zeros((2, n_max + 1), dtype=complex)
        bell[0, 1] = bell[1, 0] = 1 / math.sqrt(2)
        assert abs(mutual_information(PureState(bell)) - 2.0) < 1e-12

        assert mutual_information(ansatz_state(build(100.0))) < 0.2
        with pytest.raises(ValueError):
            mutual_information(PureState(2 * bell))

    def test_entropy(self):
        assert entropy_bits([1.0, 0.0]) == 0.0
        assert math.copysign(1, entropy_bits([1.0])) == 1
        assert entropy_bits([0.5, 0.5]) == 1.0

    def test_mandel_q(self):
        alpha = 2.0
        assert mandel_q(alpha**2, alpha**2) == 0.0
        assert mandel_q(3.0, 0.0) == -1.0
        sample = np.random.default_rng(3).poisson(7.0, size=200_000)
        assert abs(mandel_q(sample.mean(), sample.var())) < 0.02
        with pytest.raises(ValueError):
            mandel_q(0.0, 0.0)


class TestSummary:
    def test_all_dim_ensemble(self):
        t = np.arange(0, 200, 0.1)
        recs = [fake_record(t, np.full(t.size, 0.2), seed=s) for s in range(3)]
        summ = summarize(recs, 0.0, 10.0)
        assert summ.filling_factor == 0.0
        assert math.isnan(summ.pseudospin_bright)
        assert abs(summ.pseudospin_dim - 1.0) < 1e-12
        assert summ.count_bright == 0 and summ.count_dim == 3

    def test_conditional_statistics(self):
        t, x = square_wave(40.0, 400.0)
        bright = x > 5
        sigma = np.where(bright, 0.1, 0.0)
        sz = np.where(bright, -0.2, -1.0)
        var = np.where(bright, 10.0, 0.0)
        summ = summarize([fake_record(t, x, sigma, sz, var)], 0.0, 10.0)
        assert abs(summ.filling_factor - 0.5) < 1e-9
        assert abs(summ.n_bright - 10.0) < 1e-12
        assert abs(summ.pseudospin_bright - (0.04 + 0.04)) < 1e-12
        assert abs(summ.mandel_q_bright) < 1e-12
        assert abs(summ.mean_dwell_bright - 20.0) < 1e-9
        row = summ.row()
        assert row["seg_min_dwell"] == 5.0 and "settings" not in row

    def test_averaging_order(self):
        # opposite phases average to zero polarization but each sample is pure
        t = np.arange(0, 100, 0.1)
        sigma = np.where(np.arange(t.size) % 2 == 0, 0.5, -0.5)
        summ = summarize([fake_record(t, np.full(t.size, 10.0), sigma, 0.0)], 0.0, 10.0)
        assert abs(summ.pseudospin_bright) < 1e-2
        assert abs(summ.pseudospin_bright_samplewise - 1.0) < 1e-12

    def test_requires_snapshots_for_mutual_information(self):
        t = np.arange(0, 100, 0.1)
        with pytest.raises(ValueError):
            summarize([fake_record(t, np.full(t.size, 10.0))], 0.0, 10.0, with_mutual_information=True)
        with pytest.raises(ValueError):
            summarize([], 0.0, 10.0)

    def test_quantile_levels(self):
        t, x = square_wave(40.0, 400.0)
        lo, hi = quantile_reference_levels([fake_record(t, x)])
        assert (lo, hi) == (0.0, 10.0)
