"""Tests para la generación de conjuntos."""

from __future__ import annotations

import numpy as np
import pytest

from src.core.lattice import GridCube
from src.services.generators import SetGenerator, exact_density_mask, make_rng
from src.utils.errors import InvalidParameterError


class TestMakeRng:
    """Tests para make_rng."""

    def test_same_seed_same_stream(self):
        assert np.array_equal(make_rng(7).random(5), make_rng(7).random(5))

    def test_named_algorithm(self):
        assert isinstance(make_rng(1, "Philox").bit_generator, np.random.Philox)

    def test_unknown_algorithm(self):
        with pytest.raises(InvalidParameterError):
            make_rng(1, "Mersenne")

    def test_seed_range(self):
        with pytest.raises(InvalidParameterError):
            make_rng(2**64)


class TestSetGenerator:
    """Tests para SetGenerator."""

    @pytest.fixture
    def generator(self):
        return SetGenerator(seed=42)

    def test_exact_density(self):
        mask = exact_density_mask((10, 10), 0.37, make_rng(0))
        assert mask.sum() == 37

    def test_invalid_density(self):
        with pytest.raises(InvalidParameterError):
            exact_density_mask((4,), 1.5, make_rng(0))

    def test_random_density_reproducible(self):
        window = GridCube.origin(2, 12)
        first = SetGenerator(3).random_density(window, 0.25)
        second = SetGenerator(3).random_density(window, 0.25)
        assert np.array_equal(first.membership, second.membership)
        assert first.count == 36

    def test_congruence_concentration(self, generator):
        subset = generator.congruence_class(GridCube.origin(1, 300), 3, (0,), 0.9)
        in_class = subset.membership[::3].sum()
        assert in_class == 100
        assert subset.count == 111

    def test_pure_congruence_class(self, generator):
        subset = generator.congruence_class(GridCube(n=1, corner=(1,), side=6), 3, (0,))
        assert subset.points().reshape(-1).tolist() == [3, 6]

    def test_invalid_concentration(self, generator):
        with pytest.raises(InvalidParameterError):
            generator.congruence_class(GridCube.origin(1, 30), 3, concentration=0.0)

    def test_planted_product(self, generator):
        subset = generator.planted_product(GridCube.origin(2, 10), [0.5, 0.3])
        assert subset.count == 5 * 3
        rows = subset.membership.any(axis=1)
        assert np.array_equal(subset.membership, np.outer(rows, subset.membership.any(axis=0)))

    def test_planted_product_needs_two_axes(self, generator):
        with pytest.raises(InvalidParameterError):
            generator.planted_product(GridCube.origin(1, 10), [0.5, 0.5])

    def test_two_scale(self, generator):
        subset = generator.two_scale(GridCube.origin(2, 16), 4)
        assert subset.density == 0.5
        assert subset.membership[:4].all()
        assert not subset.membership[4:8].any()

    def test_two_scale_divisibility(self, generator):
        with pytest.raises(InvalidParameterError):
            generator.two_scale(GridCube.origin(1, 12), 4)

    def test_ff_random_subset(self, generator):
        subset = generator.ff_random_subset(5, 2, 0.5)
        assert subset.shape == (5, 5, 5, 5)
        assert subset.sum() == round(0.5 * 625)

    def test_ff_planted_product(self, generator):
        subset = generator.ff_planted_product(3, 2, [4 / 9, 1 / 3])
        first = subset.any(axis=(2, 3))
        second = subset.any(axis=(0, 1))
        assert first.sum() == 4
        assert second.sum() == 3
        assert np.array_equal(subset, first[:, :, None, None] & second[None, None, :, :])

    def test_ff_planted_product_length(self, generator):
        with pytest.raises(InvalidParameterError):
            generator.ff_planted_product(3, 2, [0.5])
