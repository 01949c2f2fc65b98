import math

import numpy as np
import pytest

from twostage.channel import SystemConfig, generate_channel, steering_vector
from twostage.numkit import RngState, sample_complex_gaussian
from twostage.stage2 import (
    HybridSounder,
    build_dictionary,
    design_sounder_omp,
    estimate_remaining,
    sound_and_recover_column,
)
from twostage.subspace import column_basis


# ---------------------------------------------------------------- dictionary


def test_two_element_dictionary_is_written_out():
    d = build_dictionary(2, 2)
    np.testing.assert_allclose(d.grid, [-1.0, 0.0])
    np.testing.assert_allclose(d.atoms[:, 0], np.array([1.0, np.exp(1j * np.pi)])
                               / math.sqrt(2), atol=1e-15)
    np.testing.assert_allclose(d.atoms[:, 1], np.array([1.0, 1.0])
                               / math.sqrt(2), atol=1e-15)


def test_atoms_have_unit_norm_and_constant_modulus():
    d = build_dictionary(16, 32)
    np.testing.assert_allclose(np.linalg.norm(d.atoms, axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose(np.abs(d.atoms), 1 / 4.0, atol=1e-12)


def test_grid_covers_the_sine_domain_uniformly():
    d = build_dictionary(8, 16)
    np.testing.assert_allclose(d.grid, -1.0 + 2.0 * np.arange(16) / 16)


@pytest.mark.parametrize("n", [4, 8, 16])
def test_mutual_coherence_matches_the_dirichlet_kernel_peak(n):
    # worst-case inner product of the critical grid in closed form
    d = build_dictionary(n, 2 * n)
    gram = np.abs(d.atoms.conj().T @ d.atoms)
    np.fill_diagonal(gram, 0.0)
    expected = 1.0 / (n * math.sin(math.pi / (2 * n)))
    np.testing.assert_allclose(gram.max(), expected, rtol=1e-12)


def test_dictionary_rejects_bad_sizes():
    with pytest.raises(ValueError):
        build_dictionary(0, 8)
    with pytest.raises(ValueError):
        build_dictionary(8, 0)


# -------------------------------------------------------------- greedy design


def test_a_single_atom_target_is_matched_exactly():
    d = build_dictionary(16, 32)
    s = design_sounder_omp(d.atoms[:, 9:10], d, 1)
    assert s.selected == (9,)
    assert s.residual <= 1e-10
    assert s.digital.shape == (1, 1)
    np.testing.assert_allclose(abs(s.digital[0, 0]), 1.0, atol=1e-10)


def test_an_orthonormalized_atom_pair_is_recovered():
    d = build_dictionary(16, 32)
    target = np.linalg.qr(d.atoms[:, [5, 20]])[0]
    s = design_sounder_omp(target, d, 2)
    assert sorted(s.selected) == [5, 20]
    assert s.residual <= 1e-8


def test_analog_part_is_phase_only():
    rng = RngState(20)
    target = column_basis(sample_complex_gaussian(rng, 16, 3, 1.0), 3)
    s = design_sounder_omp(target, build_dictionary(16, 32), 4)
    np.testing.assert_allclose(np.abs(s.analog), 1 / 4.0, atol=1e-12)
    np.testing.assert_allclose(s.product, s.analog @ s.digital, atol=1e-12)


def test_residual_path_never_increases_and_atoms_are_not_reused():
    rng = RngState(21)
    for trial in range(10):
        target = column_basis(
            sample_complex_gaussian(rng.split(trial), 16, 2, 1.0), 2)
        s = design_sounder_omp(target, build_dictionary(16, 32), 6)
        path = np.asarray(s.residual_path)
        assert len(path) == 6
        assert np.all(np.diff(path) <= 1e-12)
        assert len(set(s.selected)) == 6
        assert s.residual == path[-1]


def test_design_rejects_impossible_requests():
    d = build_dictionary(16, 32)
    target = d.atoms[:, :3]
    with pytest.raises(ValueError, match="need n_rf"):
        design_sounder_omp(target, d, 2)
    with pytest.raises(ValueError, match="fewer than"):
        design_sounder_omp(d.atoms[:, :1], build_dictionary(16, 4), 5)
    with pytest.raises(ValueError, match="row count"):
        design_sounder_omp(np.ones((8, 1)), d, 1)


def test_doubling_the_grid_never_hurts_a_single_steering_target():
    # the doubled grid contains the critical one, and with one chain the
    # greedy step picks the globally best atom, so refinement only helps
    rng = RngState(3)
    for trial in range(50):
        theta = rng.split(trial).generator.uniform(0, 2 * np.pi)
        t = steering_vector(theta, 16)[:, None]
        coarse = design_sounder_omp(t, build_dictionary(16, 32), 1).residual
        fine = design_sounder_omp(t, build_dictionary(16, 64), 1).residual
        assert fine <= coarse + 1e-12


def test_doubling_the_grid_usually_helps_a_two_path_subspace_target():
    # greedy selection is not monotone under refinement once n_rf > 1, so
    # this holds for most draws rather than all of them
    not_worse = 0
    for trial in range(50):
        cfg = SystemConfig(n_rx=16, n_tx=32, paths=2, n_rf=2, m=4,
                           noise_var=0.0, seed=11)
        real = generate_channel(cfg, RngState(11, (trial,)))
        target = column_basis(real.h, 2)
        coarse = design_sounder_omp(target, build_dictionary(16, 32), 2).residual
        fine = design_sounder_omp(target, build_dictionary(16, 64), 2).residual
        if fine <= coarse + 1e-12:
            not_worse += 1
    assert not_worse >= 45


# ------------------------------------------------------------ column recovery


def _column_setup(seed, n=8, cols=4):
    rng = RngState(seed)
    h = sample_complex_gaussian(rng.split(0), n, cols, 1.0)
    w = column_basis(sample_complex_gaussian(rng.split(1), n, 3, 1.0), 2)
    return h, w


def test_recovery_matches_an_independent_projector_computation():
    h, _ = _column_setup(30)
    w = sample_complex_gaussian(RngState(30).split(2), 8, 2, 1.0)  # not orthonormal
    est = sound_and_recover_column(h, 1, w, 0.3, RngState(31), "pseudo-inverse")
    noise = sample_complex_gaussian(RngState(31), 8, 1, 0.3)[:, 0]
    oracle = (w @ np.linalg.pinv(w)) @ (h[:, 1] + noise)
    np.testing.assert_allclose(est, oracle, atol=1e-9)


def test_in_span_columns_are_exact_without_noise():
    _, w = _column_setup(32)
    coeffs = sample_complex_gaussian(RngState(33), 2, 1, 1.0)[:, 0]
    h = (w @ coeffs)[:, None]
    for mode in ("pseudo-inverse", "paper-literal"):
        est = sound_and_recover_column(h, 0, w, 0.0, RngState(0), mode)
        np.testing.assert_allclose(est, h[:, 0], atol=1e-10)


def test_columns_orthogonal_to_the_combiner_recover_as_zero():
    _, w = _column_setup(38)
    full = np.linalg.svd(np.column_stack([w, w]))[0]
    h = full[:, 7:8]  # orthogonal complement of col(w)
    est = sound_and_recover_column(h, 0, w, 0.0, RngState(0))
    np.testing.assert_allclose(est, np.zeros(8), atol=1e-10)


def test_modes_agree_only_for_orthonormal_combiners():
    h, w = _column_setup(34)
    a = sound_and_recover_column(h, 0, w, 0.1, RngState(35), "pseudo-inverse")
    b = sound_and_recover_column(h, 0, w, 0.1, RngState(35), "paper-literal")
    np.testing.assert_allclose(a, b, atol=1e-10)
    skewed = w @ np.diag([2.0, 1.0])
    a = sound_and_recover_column(h, 0, skewed, 0.0, RngState(0), "pseudo-inverse")
    b = sound_and_recover_column(h, 0, skewed, 0.0, RngState(0), "paper-literal")
    assert np.linalg.norm(a - b) > 1e-3


def test_rank_deficient_combiner_is_reported():
    h, w = _column_setup(36)
    dup = np.column_stack([w[:, 0], w[:, 0]])
    with pytest.raises(ValueError, match="rank deficient"):
        sound_and_recover_column(h, 0, dup, 0.0, RngState(0))


def test_column_recovery_argument_errors():
    h, w = _column_setup(37)
    with pytest.raises(ValueError, match="unknown recovery mode"):
        sound_and_recover_column(h, 0, w, 0.1, RngState(0), "genie")
    with pytest.raises(ValueError, match="column index"):
        sound_and_recover_column(h, 4, w, 0.1, RngState(0))
    with pytest.raises(ValueError, match="non-negative"):
        sound_and_recover_column(h, 0, w, -0.1, RngState(0))
    with pytest.raises(ValueError, match="rows"):
        sound_and_recover_column(h, 0, w[:5], 0.1, RngState(0))


def test_hybrid_sounder_object_is_accepted_directly():
    d = build_dictionary(8, 16)
    s = design_sounder_omp(d.atoms[:, 3:4], d, 1)
    assert isinstance(s, HybridSounder)
    h = (d.atoms[:, 3] * 2.5)[:, None]
    est = sound_and_recover_column(h, 0, s, 0.0, RngState(0))
    np.testing.assert_allclose(est, h[:, 0], atol=1e-9)


# --------------------------------------------------------- remaining columns


def test_everything_sounded_in_stage_one_leaves_nothing_to_do():
    cfg = SystemConfig(n_rx=8, n_tx=16, paths=2, n_rf=2, m=16, noise_var=0.0)
    real = generate_channel(cfg, RngState(40))
    block, uses = estimate_remaining(real.h, column_basis(real.h, 2), cfg,
                                     RngState(41))
    assert block.shape == (8, 0)
    assert uses == 0


def test_each_remaining_column_costs_one_use():
    cfg = SystemConfig(n_rx=8, n_tx=16, paths=2, n_rf=2, m=5, noise_var=0.1)
    real = generate_channel(cfg, RngState(42))
    block, uses = estimate_remaining(real.h, column_basis(real.h, 2), cfg,
                                     RngState(43))
    assert block.shape == (8, 11)
    assert uses == 11


def test_ideal_mode_with_the_true_basis_is_exact_without_noise():
    cfg = SystemConfig(n_rx=8, n_tx=16, paths=2, n_rf=2, m=4, noise_var=0.0)
    real = generate_channel(cfg, RngState(44))
    block, _ = estimate_remaining(real.h, column_basis(real.h, 2), cfg,
                                  RngState(45), mode="ideal")
    np.testing.assert_allclose(block, real.h[:, 4:], atol=1e-9)


def test_remaining_estimation_rejects_underprovisioned_chains():
    cfg = SystemConfig(n_rx=8, n_tx=16, paths=2, n_rf=2, m=4, noise_var=0.0)
    real = generate_channel(cfg, RngState(46))
    basis = column_basis(real.h, 2)
    wide = np.column_stack([basis, basis, basis])  # 6 > n_rf
    with pytest.raises(ValueError, match="n_rf"):
        estimate_remaining(real.h, wide, cfg, RngState(0))
    with pytest.raises(ValueError, match="wider"):
        estimate_remaining(real.h[:, :3], basis, cfg, RngState(0))
