"""Tests para las formas de conteo y las normas caja."""

from __future__ import annotations

from itertools import product

import numpy as np
import pytest

from src.core.ff_core import FieldFunction, make_sphere
from src.core.forms import (
    ConfigurationSpace,
    EdgeFunctionFamily,
    box_norm,
    constant_family,
    counting_gap,
    eval_M,
    eval_N,
    fourier_count_d1,
    gowers_cs_check,
    indicator_family,
    random_family,
    uniform_family,
    von_neumann_check,
)
from src.core.hypergraph import BaseEdge, BundleSpec, Edge
from src.utils.errors import InvalidParameterError


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(2024))


def _d1_family(f1: FieldFunction, f2: FieldFunction) -> EdgeFunctionFamily:
    return EdgeFunctionFamily(
        spec=BundleSpec.rectangles(1),
        q=f1.q,
        functions={Edge(((1, 1),)): f1, Edge(((1, 2),)): f2},
    )


def _brute_force_box(f: FieldFunction) -> float:
    """Promedio caja k=2 por cuatro bucles anidados sobre F_q²."""
    q = f.q
    points = list(product(range(q), repeat=2))
    total = 0.0
    for x0, x1, y0, y1 in product(points, repeat=4):
        total += f.values[x0 + y0] * f.values[x0 + y1] * f.values[x1 + y0] * f.values[x1 + y1]
    return total / len(points) ** 4


class TestConfigurationSpace:
    """Tests para ConfigurationSpace."""

    def test_zero_scale_rejected(self):
        with pytest.raises(InvalidParameterError):
            ConfigurationSpace(q=5, d=2, t=(1, 5))

    def test_scale_length_checked(self):
        with pytest.raises(InvalidParameterError):
            ConfigurationSpace(q=5, d=2, t=(1,))


class TestEdgeFunctionFamily:
    """Tests para EdgeFunctionFamily."""

    def test_unbounded_function_rejected(self):
        with pytest.raises(InvalidParameterError):
            uniform_family(BundleSpec.rectangles(2), FieldFunction.constant(3, 4, 2.0))

    def test_wrong_dimension_rejected(self):
        with pytest.raises(InvalidParameterError):
            uniform_family(BundleSpec.rectangles(2), FieldFunction.constant(3, 2, 1.0))


class TestCountingForms:
    """Tests para eval_N y eval_M."""

    def test_constants_factor_out(self):
        # Arrange
        space = ConfigurationSpace(q=5, d=2, t=(1, 2))
        fam = constant_family(BundleSpec.rectangles(2), 5)
        expected = make_sphere(5, 1).mean() * make_sphere(5, 2).mean()

        # Act / Assert
        assert eval_N(space, fam) == pytest.approx(expected)
        assert eval_M(fam) == pytest.approx(1.0)

    def test_product_indicator_m(self, rng):
        # Arrange
        s1 = rng.random((3, 3)) < 0.5
        s2 = rng.random((3, 3)) < 0.5
        s1[0, 0] = s2[0, 0] = True
        mask = s1[:, :, None, None] & s2[None, None, :, :]
        fam = indicator_family(BundleSpec.rectangles(2), 3, mask)

        # Act / Assert
        expected = s1.mean() ** 2 * s2.mean() ** 2
        assert eval_M(fam) == pytest.approx(expected)
        assert eval_M(fam, method="direct") == pytest.approx(expected)

    def test_annihilation(self):
        spec = BundleSpec.rectangles(2)
        functions = dict(constant_family(spec, 3).functions)
        functions[Edge(((1, 1), (2, 2)))] = FieldFunction.constant(3, 4, 0.0)
        assert eval_M(EdgeFunctionFamily(spec=spec, q=3, functions=functions)) == 0.0

    def test_direct_matches_einsum(self, rng):
        space = ConfigurationSpace(q=3, d=2, t=(1, 2))
        fam = random_family(BundleSpec.rectangles(2), 3, rng, "uniform")
        assert eval_N(space, fam, method="direct", threads=2) == pytest.approx(eval_N(space, fam), abs=1e-12)

    def test_dimension_mismatch(self):
        space = ConfigurationSpace(q=5, d=2, t=(1, 1))
        fam = constant_family(BundleSpec.rectangles(2), 3)
        with pytest.raises(InvalidParameterError):
            eval_N(space, fam)


class TestFourierIdentity:
    """Tests para fourier_count_d1."""

    def test_matches_direct_sum_q3(self):
        mask = np.zeros((3, 3), dtype=bool)
        mask[0, 0] = mask[0, 1] = True
        f = FieldFunction.indicator(3, mask)
        space = ConfigurationSpace(q=3, d=1, t=(1,))

        direct = eval_N(space, _d1_family(f, f), method="direct")
        assert fourier_count_d1(3, 1, f, f) == pytest.approx(direct, abs=1e-9)

    def test_random_functions(self, rng):
        f1 = FieldFunction.random_uniform(5, 2, rng)
        f2 = FieldFunction.random_uniform(5, 2, rng)
        space = ConfigurationSpace(q=5, d=1, t=(3,))
        fam = _d1_family(f1, f2)

        assert eval_N(space, fam, method="fft") == pytest.approx(eval_N(space, fam), abs=1e-9)

    def test_constants_give_sphere_mean(self):
        one = FieldFunction.constant(7, 2, 1.0)
        assert fourier_count_d1(7, 2, one, one) == pytest.approx(make_sphere(7, 2).mean())

    def test_translate_matches_shifted_autocorrelation(self, rng):
        f = FieldFunction.random_uniform(5, 2, rng)
        v = (2, 1)
        sphere = make_sphere(5, 3).table.values
        points = list(product(range(5), repeat=2))

        expected = 0.0
        for x in points:
            for y in points:
                shifted = ((y[0] + v[0] - x[0]) % 5, (y[1] + v[1] - x[1]) % 5)
                expected += f.values[x] * f.values[y] * sphere[shifted]
        expected /= len(points) ** 2

        assert fourier_count_d1(5, 3, f, f.shifted(v)) == pytest.approx(expected, abs=1e-9)


class TestBoxNorm:
    """Tests para box_norm y las desigualdades asociadas."""

    def test_constant(self):
        assert box_norm(FieldFunction.constant(3, 4, -0.5), BaseEdge((1, 2))) == pytest.approx(0.5)

    def test_k1_is_absolute_mean(self, rng):
        f = FieldFunction.random_uniform(5, 2, rng)
        assert box_norm(f, BaseEdge((1,))) == pytest.approx(abs(f.mean()))

    def test_matches_brute_force(self, rng):
        mask = rng.random((3, 3, 3, 3)) < 0.4
        f = FieldFunction(q=3, m=4, values=mask - mask.mean())

        norm = box_norm(f, BaseEdge((1, 2)))

        assert norm < 1.0
        assert norm == pytest.approx(_brute_force_box(f) ** 0.25)

    def test_gowers_cauchy_schwarz(self, rng):
        ones = gowers_cs_check(constant_family(BundleSpec.rectangles(2), 3))
        assert ones.lhs == pytest.approx(1.0)
        assert ones.rhs == pytest.approx(1.0)
        assert ones.holds

        assert gowers_cs_check(random_family(BundleSpec.rectangles(2), 3, rng)).holds

    def test_von_neumann_constants(self):
        space = ConfigurationSpace(q=5, d=2, t=(1, 1))
        check = von_neumann_check(space, constant_family(BundleSpec.rectangles(2), 5))
        assert check.count == pytest.approx(0.64)
        assert check.min_box == pytest.approx(1.0)
        assert check.excess < 0


class TestCountingGap:
    """Tests para counting_gap."""

    def test_full_set(self):
        space = ConfigurationSpace(q=5, d=2, t=(1, 1))
        result = counting_gap(space, np.ones((5,) * 4, dtype=bool))
        assert result.M == pytest.approx(1.0)
        assert result.lower_bound == pytest.approx(1.0)
        assert result.gap == pytest.approx(1 - 0.64)

    def test_empty_set(self):
        space = ConfigurationSpace(q=3, d=2, t=(1, 1))
        result = counting_gap(space, np.zeros((3,) * 4, dtype=bool))
        assert result.N == 0.0
        assert result.M == 0.0
        assert result.lower_bound == 0.0

    def test_lower_bound_random_half(self, rng):
        space = ConfigurationSpace(q=5, d=2, t=(1, 2))
        flat = np.zeros(5**4, dtype=bool)
        flat[rng.permutation(5**4)[: 5**4 // 2]] = True
        subset = flat.reshape((5,) * 4)

        result = counting_gap(space, subset)

        assert result.M >= result.lower_bound - 1e-12
        assert result.lower_bound == pytest.approx(subset.mean() ** 4)

    @pytest.mark.parametrize("q", [3, 5])
    def test_lower_bound_d1(self, rng, q):
        for _ in range(5):
            subset = rng.random((q, q)) < rng.random()
            result = counting_gap(ConfigurationSpace(q=q, d=1, t=(1,)), subset)
            assert result.M >= result.lower_bound - 1e-12

    def test_shape_checked(self):
        with pytest.raises(InvalidParameterError):
            counting_gap(ConfigurationSpace(q=3, d=2, t=(1, 1)), np.ones((3, 3), dtype=bool))
