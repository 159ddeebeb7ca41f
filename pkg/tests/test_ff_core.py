"""Tests para aritmética en F_q, esferas y transformada de Fourier."""

from __future__ import annotations

import math

import numpy as np
import pytest

from src.core.ff_core import (
    FieldFunction,
    PrimeField,
    ValueKind,
    dft,
    idft,
    is_prime,
    is_square_symmetric,
    make_sphere,
    parseval_gap,
    primes_up_to,
    sphere_decay,
    sphere_size,
)
from src.utils.errors import InvalidParameterError


class TestPrimeField:
    """Tests para PrimeField y utilidades de primos."""

    def test_primes_up_to(self):
        assert primes_up_to(20) == [3, 5, 7, 11, 13, 17, 19]
        assert primes_up_to(20, start=2)[0] == 2

    def test_is_prime(self):
        assert is_prime(101)
        assert not is_prime(91)
        assert not is_prime(1)

    @pytest.mark.parametrize("q", [2, 4, 9, 15])
    def test_rejects_non_odd_primes(self, q):
        with pytest.raises(InvalidParameterError):
            PrimeField(q)

    def test_require_nonzero(self):
        field = PrimeField(7)
        assert field.require_nonzero(9) == 2
        with pytest.raises(InvalidParameterError):
            field.require_nonzero(14)


class TestFieldFunction:
    """Tests para FieldFunction."""

    @pytest.fixture
    def rng(self):
        return np.random.Generator(np.random.PCG64(7))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(InvalidParameterError):
            FieldFunction(q=5, m=2, values=np.zeros((5, 4)))

    def test_values_are_read_only(self):
        f = FieldFunction.constant(5, 2, 1.0)
        with pytest.raises(ValueError):
            f.values[0, 0] = 3.0

    def test_real_complex_mix_rejected(self, rng):
        real = FieldFunction.random_uniform(5, 1, rng)
        complex_ = dft(real)
        with pytest.raises(InvalidParameterError):
            _ = real + complex_

    def test_shifted(self):
        f = FieldFunction.delta(5, 1)
        moved = f.shifted((2,))
        assert moved.support() == [(2,)]

    @pytest.mark.parametrize("fmt", ["csv", "bin"])
    def test_save_and_load(self, tmp_path, rng, fmt):
        # Arrange
        f = FieldFunction.random_uniform(5, 2, rng)

        # Act
        loaded = FieldFunction.load(f.save(tmp_path / f"f.{fmt}", fmt=fmt))

        # Assert
        assert loaded.kind is ValueKind.REAL
        assert np.array_equal(loaded.values, f.values)


class TestSphere:
    """Tests para σ_t."""

    @pytest.mark.parametrize("q,expected", [(5, 4), (7, 8), (13, 12), (11, 12)])
    def test_sphere_size(self, q, expected):
        # q ≡ 1 mod 4 da q−1 puntos, q ≡ 3 mod 4 da q+1
        assert sphere_size(q, 1) == expected

    def test_sphere_rejects_zero_radius(self):
        with pytest.raises(InvalidParameterError):
            make_sphere(5, 5)

    def test_sphere_mean(self):
        sphere = make_sphere(5, 1)
        assert sphere.mean() == pytest.approx(4 / 5)

    def test_sphere_is_square_symmetric(self):
        assert is_square_symmetric(make_sphere(7, 3).table)

    def test_sphere_decay_within_weil_bound(self):
        for q in (5, 7, 11, 13):
            for t in range(1, q):
                decay = sphere_decay(q, t)
                assert decay.max_decay_const <= 2.0 + 1e-9
                assert decay.mean_deviation == pytest.approx(1 / math.sqrt(q))

    def test_sphere_decay_q3_exact(self):
        decay = sphere_decay(3, 1)

        assert decay.mean_deviation == pytest.approx(math.sqrt(3) / 3)
        assert decay.max_decay_const == pytest.approx(2 / math.sqrt(3))


class TestFourier:
    """Tests para la DFT."""

    @pytest.fixture
    def f(self):
        rng = np.random.Generator(np.random.PCG64(11))
        return FieldFunction.random_uniform(5, 2, rng)

    def test_methods_agree(self, f):
        fast = dft(f, method="fast")
        assert fast.allclose(dft(f, method="matrix"))
        assert fast.allclose(dft(f, method="naive"))

    def test_delta_transform_is_one(self):
        transform = dft(FieldFunction.delta(7, 2))
        assert np.allclose(transform.values, 1.0)

    def test_inverse(self, f):
        assert idft(dft(f)).real_part().allclose(f)

    def test_parseval(self, f):
        assert parseval_gap(f) < 1e-12

    def test_unknown_method(self, f):
        with pytest.raises(InvalidParameterError):
            dft(f, method="bogus")
