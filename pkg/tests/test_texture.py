"""Texture statistics: worked examples, invariants, oracle equivalence."""

import numpy as np
import pytest

from thermocad import (
    DIRECTIONS,
    EmptyPairsError,
    EmptyRoiError,
    NormalizationError,
    cooccurrence,
    extract_features,
    gray_level_non_uniformity,
    moment,
    normalize_cooccurrence,
    run_length_matrix,
    run_percentage,
)
from thermocad.texture import CooccurrenceMatrix, Offset, ProbabilityMatrix

from conftest import gray, random_image
from oracles import cooccurrence_oracle, run_length_oracle


def pm_from(entries, levels):
    probs = np.zeros((levels, levels))
    for (i, j), p in entries.items():
        probs[i, j] = p
    return ProbabilityMatrix(probs, levels)


class TestCooccurrence:
    def test_constant_3x3_horizontal(self):
        img = gray([[7] * 3] * 3, levels=256)
        cm = cooccurrence(img, Offset(1, 0))
        assert cm.counts[7, 7] == 6
        assert cm.total() == 6

    def test_checkerboard_2x2_vertical(self):
        img = gray([[0, 1], [1, 0]], levels=2)
        cm = cooccurrence(img, Offset(0, 1))
        assert cm.counts[0, 1] == 1
        assert cm.counts[1, 0] == 1
        assert cm.total() == 2

    def test_not_symmetrized(self):
        img = gray([[0, 1]], levels=2)
        cm = cooccurrence(img, Offset(1, 0))
        assert cm.counts[0, 1] == 1
        assert cm.counts[1, 0] == 0

    def test_zero_offset_rejected(self):
        with pytest.raises(ValueError):
            cooccurrence(gray([[1]]), Offset(0, 0))

    def test_single_pixel_roi_has_no_pairs(self):
        img = gray([[1, 2], [3, 4]], mask=[[True, False], [False, False]])
        with pytest.raises(EmptyPairsError):
            cooccurrence(img, Offset(1, 0))

    def test_offset_larger_than_image(self):
        with pytest.raises(EmptyPairsError):
            cooccurrence(gray([[1, 2]]), Offset(0, 1))

    def test_matches_oracle_on_random_images(self):
        rng = np.random.default_rng(42)
        offsets = [(0, 1), (1, 0), (1, -1), (-1, -1), (2, 1), (-2, 3)]
        for trial in range(150):
            img = random_image(rng, max_side=8, levels=4, masked=trial % 2 == 1)
            dx, dy = offsets[trial % len(offsets)]
            mask = None if img.mask is None else img.mask.tolist()
            expected = cooccurrence_oracle(
                img.pixels.tolist(), mask, img.levels, dx, dy
            )
            if sum(map(sum, expected)) == 0:
                with pytest.raises(EmptyPairsError):
                    cooccurrence(img, Offset(dx, dy))
            else:
                cm = cooccurrence(img, Offset(dx, dy))
                assert cm.counts.tolist() == expected


class TestNormalization:
    def test_two_entries(self):
        img = gray([[0, 1], [1, 0]], levels=2)
        pm = normalize_cooccurrence(cooccurrence(img, Offset(0, 1)))
        assert pm.probs[0, 1] == 0.5
        assert pm.probs[1, 0] == 0.5

    def test_single_entry(self):
        cm = CooccurrenceMatrix(
            np.eye(8, dtype=np.int64)[5][None].T * np.eye(8, dtype=np.int64)[5] * 6,
            8, Offset(1, 0),
        )
        assert cm.counts[5, 5] == 6
        pm = normalize_cooccurrence(cm)
        assert pm.probs[5, 5] == 1.0

    def test_all_zero_raises_distinct_error(self):
        cm = CooccurrenceMatrix(np.zeros((4, 4), dtype=np.int64), 4, Offset(1, 0))
        with pytest.raises(NormalizationError):
            normalize_cooccurrence(cm)

    def test_sums_to_one(self):
        rng = np.random.default_rng(3)
        for trial in range(50):
            img = random_image(rng, max_side=10, levels=8, masked=trial % 2 == 0)
            try:
                pm = normalize_cooccurrence(cooccurrence(img, Offset(0, 1)))
            except EmptyPairsError:
                continue
            assert abs(pm.probs.sum() - 1.0) <= 1e-9
            assert (pm.probs >= 0).all()


class TestMoment:
    def test_diagonal_mass_annihilates(self):
        pm = pm_from({(5, 5): 1.0}, 8)
        assert moment(pm, 1) == 0.0
        assert moment(pm, 3) == 0.0

    def test_single_off_diagonal_term(self):
        pm = pm_from({(0, 2): 1.0}, 4)
        assert moment(pm, 1) == -2.0
        assert moment(pm, 3) == -8.0

    def test_antisymmetric_cancellation(self):
        pm = pm_from({(0, 1): 0.5, (1, 0): 0.5}, 2)
        assert moment(pm, 1) == 0.0
        assert moment(pm, 3) == 0.0

    def test_symmetric_matrix_odd_moments_vanish(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            levels = int(rng.integers(2, 9))
            raw = rng.random((levels, levels))
            sym = raw + raw.T
            pm = ProbabilityMatrix(sym / sym.sum(), levels)
            assert abs(moment(pm, 1)) <= 1e-12
            assert abs(moment(pm, 3)) <= 1e-12

    def test_degree_validated(self):
        with pytest.raises(ValueError):
            moment(pm_from({(0, 0): 1.0}, 2), 0)


class TestRunLengthMatrix:
    def test_single_run(self):
        rlm = run_length_matrix(gray([[3, 3, 3, 3]], levels=4), 0)
        assert rlm.counts[3, 4] == 1
        assert rlm.total_runs() == 1
        assert rlm.n_pixels == 4

    def test_two_runs(self):
        rlm = run_length_matrix(gray([[1, 1, 2, 2]], levels=4), 0)
        assert rlm.counts[1, 2] == 1
        assert rlm.counts[2, 2] == 1
        assert rlm.total_runs() == 2

    def test_runs_are_maximal_not_nested(self):
        # A length-3 run counts once, not as extra length-1/2 runs.
        rlm = run_length_matrix(gray([[5, 5, 5]], levels=8), 0)
        assert rlm.counts[5, 3] == 1
        assert rlm.total_runs() == 1

    def test_mask_breaks_runs(self):
        img = gray([[1, 1, 1, 1]], levels=4, mask=[[True, True, False, True]])
        rlm = run_length_matrix(img, 0)
        assert rlm.counts[1, 2] == 1
        assert rlm.counts[1, 1] == 1
        assert rlm.n_pixels == 3

    def test_empty_roi(self):
        img = gray([[1, 2]], mask=[[False, False]])
        with pytest.raises(EmptyRoiError):
            run_length_matrix(img, 0)

    def test_direction_validated(self):
        with pytest.raises(ValueError):
            run_length_matrix(gray([[1]]), 30)

    @pytest.mark.parametrize("direction", DIRECTIONS)
    def test_matches_oracle_on_random_images(self, direction):
        rng = np.random.default_rng(100 + direction)
        for trial in range(80):
            img = random_image(rng, max_side=8, levels=4, masked=trial % 2 == 1)
            mask = None if img.mask is None else img.mask.tolist()
            expected = run_length_oracle(img.pixels.tolist(), mask, direction)
            rlm = run_length_matrix(img, direction)
            actual = {
                (i, l): int(rlm.counts[i, l])
                for i in range(rlm.levels)
                for l in range(rlm.max_len + 1)
                if rlm.counts[i, l]
            }
            assert actual == expected

    @pytest.mark.parametrize("direction", DIRECTIONS)
    def test_pixel_conservation(self, direction):
        rng = np.random.default_rng(200 + direction)
        for trial in range(60):
            img = random_image(rng, max_side=10, levels=4, masked=trial % 2 == 0)
            rlm = run_length_matrix(img, direction)
            lengths = np.arange(rlm.max_len + 1)
            assert int((rlm.counts * lengths).sum()) == img.roi_count()

    def test_length_zero_column_unused(self):
        rlm = run_length_matrix(gray([[1, 2], [2, 1]], levels=4), 45)
        assert (rlm.counts[:, 0] == 0).all()


class TestRunStatistics:
    def test_gln_one_run(self):
        rlm = run_length_matrix(gray([[3, 3, 3, 3]], levels=4), 0)
        assert gray_level_non_uniformity(rlm) == 1.0

    def test_gln_two_levels_one_run_each(self):
        rlm = run_length_matrix(gray([[1, 1, 2, 2]], levels=4), 0)
        assert gray_level_non_uniformity(rlm) == 1.0

    def test_gln_alternating(self):
        rlm = run_length_matrix(gray([[1, 2, 1, 2]], levels=4), 0)
        assert gray_level_non_uniformity(rlm) == 2.0

    def test_rp_one_run_over_four_pixels(self):
        rlm = run_length_matrix(gray([[3, 3, 3, 3]], levels=4), 0)
        assert run_percentage(rlm) == 0.25

    def test_rp_maximal_fragmentation(self):
        rlm = run_length_matrix(gray([[1, 2, 1, 2]], levels=4), 0)
        assert run_percentage(rlm) == 1.0

    def test_rp_bounds_and_unit_run_characterization(self):
        rng = np.random.default_rng(31)
        for trial in range(60):
            img = random_image(rng, max_side=9, levels=3, masked=trial % 3 == 0)
            for direction in DIRECTIONS:
                rlm = run_length_matrix(img, direction)
                rp = run_percentage(rlm)
                assert 0.0 < rp <= 1.0
                all_unit = rlm.counts[:, 2:].sum() == 0
                assert (rp == 1.0) == bool(all_unit)

    def test_gln_bounds(self):
        # total/levels <= GLN <= total runs (Cauchy-Schwarz both ways).
        rng = np.random.default_rng(32)
        for _ in range(60):
            img = random_image(rng, max_side=10, levels=4)
            for direction in DIRECTIONS:
                rlm = run_length_matrix(img, direction)
                gln = gray_level_non_uniformity(rlm)
                total = rlm.total_runs()
                assert total / rlm.levels - 1e-12 <= gln <= total + 1e-12


class TestExtractFeatures:
    def test_constant_4x4(self):
        img = gray([[9] * 4] * 4, levels=16)
        fv = extract_features(img, Offset(0, 1), "const", "normal")
        assert fv.m1 == 0.0
        assert fv.m3 == 0.0
        assert fv.rp_0 == 4 / 16
        assert fv.rp_90 == 4 / 16
        assert fv.rp_45 == 7 / 16
        assert fv.rp_135 == 7 / 16
        # Single gray level: non-uniformity equals the run total per
        # direction (4 row/column runs, 7 runs per diagonal family).
        assert fv.gln_0 == 4.0
        assert fv.gln_90 == 4.0
        assert fv.gln_45 == 7.0
        assert fv.gln_135 == 7.0

    def test_has_ten_numeric_features(self):
        img = gray([[1, 2], [3, 4]], levels=8)
        fv = extract_features(img, Offset(1, 0), "x", "finding")
        assert fv.values().shape == (10,)
        assert np.isfinite(fv.values()).all()

    def test_matches_composition_of_operations(self):
        rng = np.random.default_rng(77)
        img = gray(rng.integers(0, 8, size=(12, 12)), levels=8)
        fv = extract_features(img, Offset(0, 1), "c", "normal")
        pm = normalize_cooccurrence(cooccurrence(img, Offset(0, 1)))
        assert fv.m1 == moment(pm, 1)
        assert fv.m3 == moment(pm, 3)
        for direction, gln_name, rp_name in (
            (0, "gln_0", "rp_0"),
            (45, "gln_45", "rp_45"),
            (90, "gln_90", "rp_90"),
            (135, "gln_135", "rp_135"),
        ):
            rlm = run_length_matrix(img, direction)
            assert getattr(fv, gln_name) == gray_level_non_uniformity(rlm)
            assert getattr(fv, rp_name) == run_percentage(rlm)

    def test_errors_carry_sample_id(self):
        img = gray([[1, 2], [3, 4]], mask=[[False, False], [False, False]])
        with pytest.raises(EmptyRoiError, match="sample 'bad_image'"):
            extract_features(img, Offset(0, 1), "bad_image", "normal")
        one_pixel = gray([[1, 2], [3, 4]], mask=[[True, False], [False, False]])
        with pytest.raises(EmptyPairsError, match="sample 'lonely'"):
            extract_features(one_pixel, Offset(0, 1), "lonely", "normal")

    def test_gray_shift_invariance(self):
        # Adding a constant to every gray value must not move any feature.
        rng = np.random.default_rng(55)
        pixels = rng.integers(0, 4, size=(9, 7))
        base = extract_features(gray(pixels, levels=8), Offset(0, 1), "a", "normal")
        shifted = extract_features(
            gray(pixels + 3, levels=8), Offset(0, 1), "a", "normal"
        )
        # Identical up to summation order: entries sit at shifted matrix
        # positions, so the floating-point reduction may differ by an ulp.
        assert np.abs(base.values() - shifted.values()).max() <= 1e-12
