"""Lattice and spectral-product tests against a brute-force convolution oracle."""

import numpy as np
import numpy.testing as npt
import pytest

from capwave.errors import SupportOverflowError, UndefinedSymbolError
from capwave.lattice import (
    FrequencyLattice,
    LatticeField,
    SurfaceState,
    abs_derivative,
    apply_multiplier,
    divergence,
    gradient,
    inner_product,
    laplacian,
    pointwise_product,
    sobolev_norm,
)


def convolve_modes(modes_a, modes_b, dim):
    """Independent oracle: exact convolution of two sparse mode dictionaries."""
    out = {}
    for ka, ca in modes_a.items():
        for kb, cb in modes_b.items():
            if dim == 1:
                key = ka + kb
            else:
                key = (ka[0] + kb[0], ka[1] + kb[1])
            out[key] = out.get(key, 0.0) + ca * cb
    return out


def random_modes(rng, dim, n_modes, extent, real=False):
    """Sparse random field with per-axis support inside +-extent."""
    modes = {}
    for _ in range(n_modes):
        if dim == 1:
            k = int(rng.integers(-extent, extent + 1))
        else:
            k = (int(rng.integers(-extent, extent + 1)), int(rng.integers(-extent, extent + 1)))
        c = complex(rng.normal(), rng.normal())
        modes[k] = modes.get(k, 0.0) + c
    if real:
        herm = {}
        for k, c in modes.items():
            kk = -k if dim == 1 else (-k[0], -k[1])
            herm[k] = herm.get(k, 0.0) + 0.5 * c
            herm[kk] = herm.get(kk, 0.0) + 0.5 * np.conj(c)
        modes = herm
    return modes


def grid(dim, size=64):
    return FrequencyLattice(dim, size)


class TestLatticeBasics:
    def test_axes_are_fft_ordered_integers(self):
        lat = grid(1, 8)
        npt.assert_array_equal(lat.axes[0], [0, 1, 2, 3, -4, -3, -2, -1])

    def test_nyquist_mask_marks_unpaired_row_and_column(self):
        lat = grid(2, 8)
        assert lat.nyquist_mask[4, :].all()
        assert lat.nyquist_mask[:, 4].all()
        assert lat.nyquist_mask.sum() == 8 + 8 - 1

    def test_sizing_rule_covers_padded_max_frequency(self):
        lat = FrequencyLattice.for_max_frequency(2, 4 * 16, pad_factor=1.5)
        assert lat.size == 256
        assert lat.size / 2 >= 1.5 * 64
        lat = FrequencyLattice.for_max_frequency(1, 6 * 16, pad_factor=2.0)
        assert lat.size == 512

    def test_from_physical_roundtrip(self):
        lat = grid(2, 32)
        rng = np.random.default_rng(7)
        values = rng.normal(size=lat.shape)
        field = LatticeField.from_physical(lat, values)
        # the random grid excites the Nyquist slots, which are dropped
        back = LatticeField.from_physical(lat, field.physical())
        npt.assert_allclose(back.hat, field.hat, atol=1e-12)
        assert field.real

    def test_mode_roundtrip_exact(self):
        lat = grid(1, 64)
        field = LatticeField.from_modes(lat, {3: 0.5, -3: 0.5}, real=True)
        x = 2 * np.pi * np.arange(64) / 64
        npt.assert_allclose(field.physical(), np.cos(3 * x), atol=1e-12)

    def test_support_extent(self):
        lat = grid(2, 64)
        field = LatticeField.from_modes(lat, {(3, -7): 1.0, (-11, 2): 2.0})
        assert field.support_extent() == (11, 7)
        assert LatticeField.zeros(lat).support_extent() == (0, 0)


class TestMultipliers:
    def test_unknown_name_raises(self):
        lat = grid(1, 16)
        f = LatticeField.from_modes(lat, {1: 1.0})
        with pytest.raises(UndefinedSymbolError, match="nonsense"):
            apply_multiplier(f, "nonsense")

    def test_abs_derivative_on_cosine(self):
        lat = grid(1, 64)
        f = LatticeField.from_modes(lat, {5: 0.5, -5: 0.5}, real=True)
        x = 2 * np.pi * np.arange(64) / 64
        npt.assert_allclose(abs_derivative(f).physical(), 5 * np.cos(5 * x), atol=1e-12)
        npt.assert_allclose(abs_derivative(f, 0.5).physical(), np.sqrt(5) * np.cos(5 * x), atol=1e-12)

    def test_abs_derivative_kills_mean(self):
        lat = grid(1, 16)
        f = LatticeField.from_modes(lat, {0: 2.5, 1: 1.0})
        g = abs_derivative(f)
        assert g.hat[0] == 0.0
        assert g.hat[1] == 1.0

    def test_laplacian_mode(self):
        lat = grid(2, 64)
        f = LatticeField.from_modes(lat, {(3, 4): 1.0})
        g = laplacian(f)
        npt.assert_allclose(g.hat[3, 4], -25.0)

    def test_gradient_divergence_compose_to_laplacian(self):
        lat = grid(2, 32)
        rng = np.random.default_rng(3)
        f = LatticeField.from_modes(lat, random_modes(rng, 2, 8, 10, real=True), real=True)
        g = divergence(gradient(f))
        npt.assert_allclose(g.hat, laplacian(f).hat, atol=1e-12)

    def test_gradient_of_real_field_is_real(self):
        lat = grid(1, 32)
        f = LatticeField.from_modes(lat, {2: 0.5, -2: 0.5}, real=True)
        (fx,) = gradient(f)
        assert fx.real
        x = 2 * np.pi * np.arange(32) / 32
        npt.assert_allclose(fx.physical(), -2 * np.sin(2 * x), atol=1e-12)


class TestProducts:
    def test_cosine_square_product_to_sum(self):
        lat = grid(1, 64)
        c = LatticeField.from_modes(lat, {4: 0.5, -4: 0.5}, real=True)
        p = pointwise_product(c, c)
        expect = LatticeField.from_modes(lat, {0: 0.5, 8: 0.25, -8: 0.25}, real=True)
        npt.assert_allclose(p.hat, expect.hat, atol=1e-13)

    def test_zero_factor_gives_zero(self):
        lat = grid(2, 32)
        f = LatticeField.from_modes(lat, {(1, 2): 1.0})
        z = pointwise_product(f, LatticeField.zeros(lat))
        assert not z.hat.any()

    @pytest.mark.parametrize("dim", [1, 2])
    def test_matches_convolution_oracle(self, dim):
        rng = np.random.default_rng(11 + dim)
        lat = grid(dim, 64)
        for _ in range(5):
            ma = random_modes(rng, dim, 8, 12)
            mb = random_modes(rng, dim, 8, 12)
            a = LatticeField.from_modes(lat, ma)
            b = LatticeField.from_modes(lat, mb)
            p = pointwise_product(a, b)
            expect = LatticeField.from_modes(lat, convolve_modes(ma, mb, dim))
            npt.assert_allclose(p.hat, expect.hat, atol=1e-12)

    def test_bilinear_and_commutative(self):
        rng = np.random.default_rng(5)
        lat = grid(2, 32)
        a = LatticeField.from_modes(lat, random_modes(rng, 2, 6, 7))
        b = LatticeField.from_modes(lat, random_modes(rng, 2, 6, 7))
        c = LatticeField.from_modes(lat, random_modes(rng, 2, 6, 7))
        left = pointwise_product(a + 2.0 * b, c)
        right = pointwise_product(a, c) + 2.0 * pointwise_product(b, c)
        npt.assert_allclose(left.hat, right.hat, atol=1e-13)
        npt.assert_allclose(
            pointwise_product(a, b).hat, pointwise_product(b, a).hat, atol=1e-13
        )

    def test_real_inputs_flag_real_output(self):
        rng = np.random.default_rng(9)
        lat = grid(1, 64)
        a = LatticeField.from_modes(lat, random_modes(rng, 1, 6, 10, real=True), real=True)
        b = LatticeField.from_modes(lat, random_modes(rng, 1, 6, 10, real=True), real=True)
        p = pointwise_product(a, b)
        assert p.real
        # Hermitian symmetry of the coefficients
        sym = p.hat - np.conj(p.hat[(-np.arange(64)) % 64])
        npt.assert_allclose(sym, 0, atol=1e-14)

    def test_overflow_rejected_with_axis_and_extent(self):
        lat = grid(1, 64)
        a = LatticeField.from_modes(lat, {20: 1.0})
        b = LatticeField.from_modes(lat, {15: 1.0})
        with pytest.raises(SupportOverflowError, match=r"20 \+ 15 = 35"):
            pointwise_product(a, b)

    def test_overflow_checked_per_axis(self):
        lat = grid(2, 64)
        a = LatticeField.from_modes(lat, {(2, 20): 1.0})
        b = LatticeField.from_modes(lat, {(3, -14): 1.0})
        with pytest.raises(SupportOverflowError, match="axis 1"):
            pointwise_product(a, b)
        # swapping the long axis to axis 0 must also trip
        a = LatticeField.from_modes(lat, {(20, 2): 1.0})
        b = LatticeField.from_modes(lat, {(-14, 3): 1.0})
        with pytest.raises(SupportOverflowError, match="axis 0"):
            pointwise_product(a, b)

    def test_chained_products_keep_exact_support(self):
        # roundoff outside the support box must not accumulate across a chain
        rng = np.random.default_rng(17)
        lat = grid(1, 256)
        a = LatticeField.from_modes(lat, random_modes(rng, 1, 8, 10))
        p = pointwise_product(a, a)
        assert p.support_extent()[0] <= 20
        q = pointwise_product(p, a)
        assert q.support_extent()[0] <= 30


class TestNormsAndPairings:
    def test_sobolev_single_mode(self):
        lat = grid(2, 64)
        f = LatticeField.from_modes(lat, {(3, 4): 2.0})
        npt.assert_allclose(sobolev_norm(f, 1.5), 2.0 * 26.0**0.75)

    def test_sobolev_s0_is_coefficient_l2(self):
        rng = np.random.default_rng(2)
        lat = grid(1, 64)
        f = LatticeField.from_modes(lat, random_modes(rng, 1, 10, 20))
        npt.assert_allclose(sobolev_norm(f, 0.0), np.linalg.norm(f.hat))

    def test_sobolev_region_restriction(self):
        lat = grid(1, 64)
        f = LatticeField.from_modes(lat, {2: 1.0, 10: 1.0})
        mask = lat.radius >= 5
        npt.assert_allclose(sobolev_norm(f, 0.0, mask), 1.0)

    def test_inner_product_matches_physical_pairing(self):
        rng = np.random.default_rng(4)
        lat = grid(2, 32)
        a = LatticeField.from_modes(lat, random_modes(rng, 2, 6, 9))
        b = LatticeField.from_modes(lat, random_modes(rng, 2, 6, 9))
        spectral = inner_product(a, b)
        physical = np.sum(a.physical() * np.conj(b.physical())) / lat.size**2
        npt.assert_allclose(spectral, physical, atol=1e-12)


class TestSurfaceState:
    def test_arithmetic(self):
        lat = grid(1, 16)
        s = SurfaceState(
            LatticeField.from_modes(lat, {1: 1.0}), LatticeField.from_modes(lat, {2: 1.0})
        )
        t = 2.0 * s + s
        npt.assert_allclose(t.height.hat[1], 3.0)
        npt.assert_allclose(t.potential.hat[2], 3.0)

    def test_lattice_mismatch_rejected(self):
        with pytest.raises(ValueError):
            SurfaceState(
                LatticeField.zeros(grid(1, 16)), LatticeField.zeros(grid(1, 32))
            )
