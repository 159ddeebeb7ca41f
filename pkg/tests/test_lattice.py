"""Tests para símplices en ℤⁿ, normas U¹, rejillas e incremento de densidad."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from src.core.lattice import (
    GridCube,
    LatticeSet,
    ScaleSequence,
    SimplexSpec,
    admissible_sequence,
    boundary_deficit,
    brute_force_copies,
    count_asymptotic_scan,
    density_increment,
    enumerate_copies,
    eval_M1_lattice,
    eval_N1_lattice,
    grid_cond_exp,
    guaranteed_levels,
    increment_step_bound,
    isometry_check,
    kvn_grid_decompose,
    lcm_range,
    normalization_exponent,
    q_epsilon,
    representation_counts,
    residue_densities,
    shifted_table,
    sigma_normalized,
    u1_norm,
    uniform_part_norm,
    uniformity_test,
    von_neumann_lattice_check,
)
from src.utils.errors import CapExceededError, InvalidParameterError, NoCopiesError

UNIT_SEGMENT_5 = SimplexSpec(n=5, points=((0, 0, 0, 0, 0), (1, 0, 0, 0, 0)))


def _stripes(side: int, width: int) -> np.ndarray:
    """±1 alternando en bloques de `width` puntos."""
    return 1.0 - 2.0 * ((np.arange(side) // width) % 2)


class TestSimplexSpec:
    """Tests para SimplexSpec."""

    def test_gram(self):
        spec = SimplexSpec(n=3, points=((0, 0, 0), (1, 1, 0), (0, 1, 1)))
        assert spec.gram == ((2, 1), (1, 2))
        assert spec.k == 3

    def test_degenerate_rejected(self):
        with pytest.raises(InvalidParameterError):
            SimplexSpec(n=2, points=((0, 0), (1, 1), (2, 2)))

    def test_origin_required(self):
        with pytest.raises(InvalidParameterError):
            SimplexSpec(n=2, points=((1, 0), (0, 1)))

    def test_save_and_load(self, tmp_path):
        spec = SimplexSpec.orthonormal(9)
        assert SimplexSpec.load(spec.save(tmp_path / "triangle.json")) == spec

    def test_normalization_exponent(self):
        assert normalization_exponent(UNIT_SEGMENT_5) == 3


class TestIsometryCheck:
    """Tests para isometry_check."""

    def test_dilate(self):
        spec = SimplexSpec.orthonormal(4)
        candidate = [tuple(2 * c for c in p) for p in spec.points]
        assert isometry_check(spec, candidate, 4)

    def test_signed_permutation(self):
        spec = SimplexSpec.orthonormal(4)
        candidate = [(0, 0, 0, 0), (0, 0, -1, 0), (0, 0, 0, 1)]
        assert isometry_check(spec, candidate, 1)

    def test_diagonal_segment(self):
        assert isometry_check(UNIT_SEGMENT_5, [(0, 0, 0, 0, 0), (1, 1, 0, 0, 0)], 2)

    def test_translation_invariant(self):
        assert isometry_check(UNIT_SEGMENT_5, [(3, 0, 0, 0, 1), (4, 1, 0, 0, 1)], 2)

    def test_rejects_wrong_length(self):
        assert not isometry_check(UNIT_SEGMENT_5, [(0, 0, 0, 0, 0), (1, 1, 1, 0, 0)], 2)


class TestEnumerateCopies:
    """Tests para enumerate_copies y sus oráculos."""

    def test_unit_vectors_in_z5(self):
        copies = enumerate_copies(UNIT_SEGMENT_5, 1)
        assert len(copies) == 10
        assert all(isometry_check(UNIT_SEGMENT_5, [(0,) * 5, m], 1) for (m,) in copies)

    def test_parity_obstruction(self):
        assert enumerate_copies(UNIT_SEGMENT_5, 1, q=2) == []

    def test_right_triangle_in_z9(self):
        assert len(enumerate_copies(SimplexSpec.orthonormal(9), 1)) == 18 * 16

    @pytest.mark.parametrize(
        "spec,lambda2",
        [
            (UNIT_SEGMENT_5, 9),
            (SimplexSpec.orthonormal(4), 2),
            (SimplexSpec.orthonormal(5), 4),
            (SimplexSpec(n=3, points=((0, 0, 0), (1, 1, 0), (0, 1, 1))), 4),
        ],
    )
    def test_matches_brute_force(self, spec, lambda2):
        assert sorted(enumerate_copies(spec, lambda2)) == brute_force_copies(spec, lambda2)

    def test_rescaling_bijection(self):
        for lambda2 in (1, 2, 3, 5):
            assert len(enumerate_copies(UNIT_SEGMENT_5, 4 * lambda2, q=2)) == len(
                enumerate_copies(UNIT_SEGMENT_5, lambda2)
            )

    def test_threads_preserve_order(self):
        spec = SimplexSpec.orthonormal(5)
        assert enumerate_copies(spec, 2, threads=3) == enumerate_copies(spec, 2, threads=1)

    def test_bound_too_small(self):
        with pytest.raises(InvalidParameterError):
            enumerate_copies(UNIT_SEGMENT_5, 9, bound=2)

    def test_lambda2_cap(self):
        with pytest.raises(CapExceededError):
            enumerate_copies(UNIT_SEGMENT_5, 10**6)

    def test_representation_counts(self):
        counts = representation_counts(10, 5)
        assert counts[0] == 1
        assert counts[1] == 10
        assert counts[2] == 40
        assert counts[9] == len(enumerate_copies(UNIT_SEGMENT_5, 9))


class TestCountingMeasure:
    """Tests para count_asymptotic_scan y sigma_normalized."""

    def test_scan_normalization(self):
        scan = count_asymptotic_scan(UNIT_SEGMENT_5, [1, 2, 3, 4])
        table = scan.table

        assert list(table["raw_count"]) == [10, 40, 80, 90]
        expected = table["raw_count"] / table["lambda2"].astype(float) ** 1.5
        assert np.allclose(table["normalized"], expected)
        assert scan.rho_hat == pytest.approx(float(table["normalized"].median()))

    def test_scan_bounded_oscillation(self):
        scan = count_asymptotic_scan(UNIT_SEGMENT_5, list(range(4, 401)))
        present = scan.table[scan.table["raw_count"] > 0]["normalized"]
        assert present.max() / present.min() <= 8.0

    def test_scan_enumerates_triangles(self):
        scan = count_asymptotic_scan(SimplexSpec.orthonormal(7), [1, 2])
        assert list(scan.table["raw_count"]) == [
            len(enumerate_copies(SimplexSpec.orthonormal(7), 1)),
            len(enumerate_copies(SimplexSpec.orthonormal(7), 2)),
        ]

    def test_sigma_weights(self):
        measure = sigma_normalized(UNIT_SEGMENT_5, 1)
        assert measure.raw_count == 10
        assert all(w == Fraction(1, 10) for w in measure.weights)
        assert measure.total() == 1
        assert measure.weight_array().sum() == pytest.approx(1.0)

    def test_sigma_deviation(self):
        measure = sigma_normalized(UNIT_SEGMENT_5, 1, rho_hat=5.0)
        assert measure.deviation == pytest.approx(1.0)

    def test_no_copies(self):
        with pytest.raises(NoCopiesError):
            sigma_normalized(UNIT_SEGMENT_5, 1, q=2)


class TestGridCubeAndSets:
    """Tests para GridCube y LatticeSet."""

    def test_divisibility_chain(self):
        with pytest.raises(InvalidParameterError):
            GridCube.origin(2, 12, q=3, L=4)

    def test_congruence_class(self):
        subset = LatticeSet.congruence_class(GridCube.origin(5, 8), 2)
        assert subset.density == pytest.approx(2**-5)

    def test_restrict_rescales(self):
        window = GridCube(n=2, corner=(1, 1), side=8)
        subset = LatticeSet.congruence_class(window, 2, residue=(0, 0))

        restricted, shift = subset.restrict(2, (0, 0))

        assert shift == (2, 2)
        assert restricted.window.side == 4
        assert restricted.density == 1.0

    def test_save_and_load(self, tmp_path):
        rng = np.random.Generator(np.random.PCG64(5))
        window = GridCube(n=2, corner=(3, -2), side=6)
        subset = LatticeSet(window=window, membership=rng.random(window.shape) < 0.5)

        loaded = LatticeSet.load(subset.save(tmp_path / "set.rle"))

        assert loaded.window == window
        assert np.array_equal(loaded.membership, subset.membership)

    def test_points_are_absolute(self):
        window = GridCube(n=1, corner=(10,), side=4)
        subset = LatticeSet(window=window, membership=np.array([False, True, False, True]))
        assert subset.points().reshape(-1).tolist() == [11, 13]

    def test_volume_cap(self):
        with pytest.raises(CapExceededError):
            GridCube.origin(3, 1000).check_cap()


class TestLatticeForms:
    """Tests para 𝒩¹, ℳ¹ y U¹."""

    @pytest.fixture
    def window(self):
        return GridCube.origin(5, 8)

    def test_shifted_table(self):
        assert shifted_table(np.arange(5.0), (1,)).tolist() == [1, 2, 3, 4, 0]
        assert shifted_table(np.arange(5.0), (-2,)).tolist() == [0, 0, 0, 1, 2]

    def test_ones_boundary(self, window):
        ones = [np.ones(window.shape)] * 2
        assert eval_N1_lattice(UNIT_SEGMENT_5, 1, window, ones) == pytest.approx(7 / 8)
        assert boundary_deficit(UNIT_SEGMENT_5, 1, window) == pytest.approx(1 / 8)

    def test_parity_obstruction(self, window):
        evens = LatticeSet.congruence_class(window, 2).indicator()
        assert eval_N1_lattice(UNIT_SEGMENT_5, 1, window, [evens, evens]) == 0.0

    def test_zero_function(self, window):
        tables = [np.ones(window.shape), np.zeros(window.shape)]
        assert eval_N1_lattice(UNIT_SEGMENT_5, 1, window, tables) == 0.0

    def test_threads_agree(self, window):
        rng = np.random.Generator(np.random.PCG64(8))
        tables = [rng.random(window.shape), rng.random(window.shape)]
        assert eval_N1_lattice(UNIT_SEGMENT_5, 2, window, tables, threads=4) == pytest.approx(
            eval_N1_lattice(UNIT_SEGMENT_5, 2, window, tables, threads=1)
        )

    def test_m1_ones(self):
        window = GridCube.origin(1, 10)
        value = eval_M1_lattice(4, window, [np.ones(10)])
        assert value == pytest.approx((8 + 2 * 2 / 3) / 10)

    def test_m1_lower_bound_random_sets(self):
        window = GridCube.origin(2, 60)

        for seed in range(50):
            rng = np.random.Generator(np.random.PCG64(seed))
            table = (rng.random(window.shape) < rng.random()).astype(float)
            delta = table.mean()

            value = eval_M1_lattice(4, window, [table, table])

            assert value >= delta**2 - 3 * 2 / 60 * 2, f"semilla {seed}"

    def test_u1_constant(self):
        window = GridCube.origin(1, 12)
        expected = 0.5 * math.sqrt((10 + 8 / 9) / 12)
        assert u1_norm(np.full(12, 0.5), window, 1, 3) == pytest.approx(expected)

    def test_u1_alternating_cells(self):
        window = GridCube.origin(1, 16)
        norm = u1_norm(0.5 * _stripes(16, 4), window, 1, 4)
        assert norm == pytest.approx(math.sqrt(1.1 / 16))
        assert norm > 0.2

    def test_u1_centred_window(self):
        # Cubo [x − 2, x + 2]: los dos últimos puntos también pesan sobre x = 4, 5
        window = GridCube.origin(1, 8)
        table = np.zeros(8)
        table[6:] = 1.0

        norm = u1_norm(table, window, 1, 4)

        assert norm == pytest.approx(math.sqrt(13 / 200))
        assert norm == pytest.approx(0.2550, abs=1e-4)

    def test_u1_requires_divisibility(self):
        with pytest.raises(InvalidParameterError):
            u1_norm(np.ones(12), GridCube.origin(1, 12), 2, 3)

    def test_von_neumann_parity(self, window):
        evens = LatticeSet.congruence_class(window, 2).indicator()

        check = von_neumann_lattice_check(UNIT_SEGMENT_5, 1, window, [evens, evens], 1, 2)

        assert check.count == 0.0
        assert check.excess == pytest.approx(-check.min_u1)

    def test_uniform_part_of_full_set(self):
        assert uniform_part_norm(LatticeSet.full(GridCube.origin(2, 8)), 2, 4) == 0.0


class TestGridDecomposition:
    """Tests para grid_cond_exp y kvn_grid_decompose."""

    def test_grid_cond_exp(self):
        expectation = grid_cond_exp(np.arange(8.0), GridCube.origin(1, 8), 2, 4)
        assert expectation.tolist() == [1, 2, 1, 2, 5, 6, 5, 6]

    def test_scale_sequence_validation(self):
        with pytest.raises(InvalidParameterError):
            ScaleSequence(eps=0.5, q0=1, q1=1, scales=(64, 48))
        with pytest.raises(InvalidParameterError):
            ScaleSequence(eps=0.5, q0=1, q1=1, scales=(256, 64, 4))
        with pytest.raises(InvalidParameterError):
            ScaleSequence(eps=0.5, q0=1, q1=1, scales=(256, 64, 32))
        with pytest.raises(InvalidParameterError):
            ScaleSequence(eps=1.0, q0=3, q1=1, scales=(64, 16, 4))

    def test_admissible_sequence(self):
        sequence = admissible_sequence(0.5, 1, 1, 4, 2)
        assert sequence.scales == (1024, 64, 4)
        assert sequence.J == 2

    def test_guaranteed_levels(self):
        assert guaranteed_levels(0.5, constant=1.0) == 4
        assert guaranteed_levels(0.1, constant=2.0) == 200

    def test_measurable_function_succeeds_at_level_one(self):
        window = GridCube.origin(1, 256)
        scales = ScaleSequence(eps=0.5, q0=1, q1=1, scales=(1024, 64, 4))

        result = kvn_grid_decompose(_stripes(256, 64), window, 0.5, scales, enforce_guarantee=False)

        assert result.succeeded
        assert result.level == 1
        assert result.residual == pytest.approx(0.0, abs=1e-12)

    def test_fine_structure_exhausts(self):
        window = GridCube.origin(1, 256)
        scales = ScaleSequence(eps=0.5, q0=1, q1=1, scales=(1024, 64, 2))

        result = kvn_grid_decompose(_stripes(256, 4), window, 0.5, scales, enforce_guarantee=False)

        assert result.status == "exhausted"
        assert result.level is None
        assert len(result.levels) == 1
        assert result.levels[0].residual == pytest.approx(math.sqrt(1286 / 2304))
        assert result.levels[0].residual > 0.5

    def test_two_scale_succeeds_at_level_two(self):
        # Media nula a escala L₁, estructurada a escala L₂
        eps = 0.2
        window = GridCube.origin(1, 80000)
        scales = ScaleSequence(eps=eps, q0=1, q1=2, scales=(8_000_000, 80000, 800, 8))
        table = _stripes(80000, 800)

        result = kvn_grid_decompose(table, window, eps, scales, enforce_guarantee=False)

        assert result.level == 2
        assert result.levels[0].residual > eps
        assert u1_norm(table - result.cond_exp, window, scales.modulus(3), scales.scales[3]) <= eps

    def test_energy_gain_after_failed_level(self):
        # 1_S − 1/2 para S = franjas pares de ancho 800
        eps = 0.2
        window = GridCube.origin(1, 80000)
        scales = ScaleSequence(eps=eps, q0=1, q1=2, scales=(8_000_000, 80000, 800, 8))

        result = kvn_grid_decompose(0.5 * _stripes(80000, 800), window, eps, scales, enforce_guarantee=False)

        assert result.level == 2
        for before, after in zip(result.levels, result.levels[1:]):
            assert before.residual > eps
            assert after.energy - before.energy >= eps**2 / 4
        assert result.levels[1].energy - result.levels[0].energy == pytest.approx(0.25)

    def test_short_sequence_rejected(self):
        window = GridCube.origin(1, 256)
        scales = ScaleSequence(eps=0.5, q0=1, q1=1, scales=(1024, 64, 4))
        with pytest.raises(InvalidParameterError):
            kvn_grid_decompose(_stripes(256, 64), window, 0.5, scales)

    def test_unbounded_function_rejected(self):
        window = GridCube.origin(1, 256)
        scales = ScaleSequence(eps=0.5, q0=1, q1=1, scales=(1024, 64, 4))
        with pytest.raises(InvalidParameterError):
            kvn_grid_decompose(np.full(256, 2.0), window, 0.5, scales)


class TestQEpsilon:
    """Tests para lcm_range y q_epsilon."""

    def test_lcm_range(self):
        assert lcm_range(6) == 60
        assert lcm_range(10) == 2520
        assert lcm_range(0) == 1

    def test_q_epsilon(self):
        assert q_epsilon(1.0, constant=10) == 2520
        assert q_epsilon(0.8) == 2520
        assert q_epsilon(1.0) == 1

    def test_monotone(self):
        values = [q_epsilon(eps) for eps in (1.0, 0.9, 0.8, 0.7)]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_desk_scale_cap(self):
        with pytest.raises(CapExceededError):
            q_epsilon(0.1)


class TestUniformityAndIncrement:
    """Tests para uniformity_test y density_increment."""

    def test_full_window_is_uniform(self):
        report = uniformity_test(LatticeSet.full(GridCube.origin(2, 6)), 0.5, 3)
        assert report.is_uniform
        assert report.ratio == pytest.approx(1.0)

    def test_even_points_not_uniform(self):
        subset = LatticeSet.congruence_class(GridCube.origin(5, 8), 2)

        report = uniformity_test(subset, 0.5, 2)

        assert not report.is_uniform
        assert report.worst_residue == (0, 0, 0, 0, 0)
        assert report.max_relative_density == pytest.approx(1.0)
        assert report.overall_density == pytest.approx(2**-5)

    def test_residues_are_absolute(self):
        window = GridCube(n=1, corner=(1,), side=6)
        subset = LatticeSet.congruence_class(window, 3, residue=(0,))

        densities = residue_densities(subset, 3)

        assert densities.tolist() == [1.0, 0.0, 0.0]

    def test_residue_densities_on_non_divisible_window(self):
        # Puntos 1..7: la clase 1 tiene tres puntos y las clases 0 y 2 dos
        window = GridCube(n=1, corner=(1,), side=7)
        mask = np.isin(np.arange(1, 8), [3, 4, 6])
        subset = LatticeSet(window=window, membership=mask)

        densities = residue_densities(subset, 3)

        assert densities.tolist() == pytest.approx([1.0, 1 / 3, 0.0])

    def test_residue_densities_window_too_small(self):
        with pytest.raises(InvalidParameterError):
            residue_densities(LatticeSet.full(GridCube.origin(1, 2)), 3)

    def test_uniform_set_takes_no_steps(self):
        result = density_increment(LatticeSet.full(GridCube.origin(2, 6)), 0.5, 3)
        assert result.steps == 0
        assert result.status == "uniform"

    def test_uniform_set_on_non_divisible_window(self):
        result = density_increment(LatticeSet.full(GridCube.origin(1, 7)), 0.5, 3)
        assert result.steps == 0
        assert result.status == "uniform"

    def test_non_uniform_set_on_non_divisible_window_exhausts(self):
        mask = np.isin(np.arange(7), [0, 3, 6])
        subset = LatticeSet(window=GridCube.origin(1, 7), membership=mask)

        result = density_increment(subset, 0.5, 3)

        assert result.steps == 0
        assert result.status == "window exhausted"
        assert result.final_set is subset

    def test_even_points_one_step(self):
        subset = LatticeSet.congruence_class(GridCube.origin(5, 8), 2)

        result = density_increment(subset, 0.5, 2)

        assert result.steps == 1
        assert result.status == "uniform"
        assert result.final_set.density == 1.0
        assert result.final_set.window.side == 4

    def test_concentrated_residue(self):
        # Arrange: clase 0 mod 3 completa más 11 puntos de la clase 1 (90 % en la clase)
        mask = np.arange(300) % 3 == 0
        mask[np.flatnonzero(np.arange(300) % 3 == 1)[:11]] = True
        subset = LatticeSet(window=GridCube.origin(1, 300), membership=mask)

        # Act
        result = density_increment(subset, 0.5, 3)

        # Assert
        assert result.steps == 1
        assert result.history[0].residue == (0,)
        assert result.status == "uniform"
        assert result.final_set.density / subset.density >= 2.7
        assert result.steps <= increment_step_bound(subset.density, 0.5)

    def test_step_bound(self):
        assert increment_step_bound(0.5, 0.5) == 4

    def test_empty_set_rejected(self):
        empty = LatticeSet(window=GridCube.origin(1, 6), membership=np.zeros(6, dtype=bool))
        with pytest.raises(InvalidParameterError):
            density_increment(empty, 0.5, 3)
