"""Normal-velocity expansion terms: closed vs recursive, and exact small cases."""

import numpy as np
import numpy.testing as npt
import pytest

from capwave.dno import dn_series, dn_term, dn_term_recursive, g2_bilinear
from capwave.lattice import (
    FrequencyLattice,
    LatticeField,
    abs_derivative,
    inner_product,
    sobolev_norm,
)

from test_lattice import random_modes


def field_pair(dim, rng, extent=8, size=64, real=True):
    lat = FrequencyLattice(dim, size)
    h = LatticeField.from_modes(lat, random_modes(rng, dim, 8, extent, real=real), real=real)
    psi = LatticeField.from_modes(lat, random_modes(rng, dim, 8, extent, real=real), real=real)
    return h, psi


def rel_err(a, b):
    scale = max(np.abs(a.hat).max(), np.abs(b.hat).max(), 1e-300)
    return np.abs(a.hat - b.hat).max() / scale


class TestSmallCases:
    def test_order0_is_abs_derivative(self):
        lat = FrequencyLattice(1, 64)
        psi = LatticeField.from_modes(lat, {3: 0.5, -3: 0.5}, real=True)
        h = LatticeField.from_modes(lat, {1: 0.5, -1: 0.5}, real=True)
        out = dn_term(0, h, psi)
        npt.assert_allclose(out.hat, abs_derivative(psi).hat, atol=1e-14)

    def test_first_order_cos_pair_cancels(self):
        # h = cos x, psi = cos 2x: transport and smoothing parts cancel exactly
        lat = FrequencyLattice(1, 64)
        h = LatticeField.from_modes(lat, {1: 0.5, -1: 0.5}, real=True)
        psi = LatticeField.from_modes(lat, {2: 0.5, -2: 0.5}, real=True)
        out = dn_term(1, h, psi)
        npt.assert_allclose(out.hat, 0, atol=1e-10)

    def test_first_order_cos_pair_swapped(self):
        # h = cos 2x, psi = cos x gives exactly -cos x
        lat = FrequencyLattice(1, 64)
        h = LatticeField.from_modes(lat, {2: 0.5, -2: 0.5}, real=True)
        psi = LatticeField.from_modes(lat, {1: 0.5, -1: 0.5}, real=True)
        out = dn_term(1, h, psi)
        x = 2 * np.pi * np.arange(64) / 64
        npt.assert_allclose(out.physical(), -np.cos(x), atol=1e-10)

    def test_flat_surface_kills_higher_orders(self):
        lat = FrequencyLattice(2, 32)
        h = LatticeField.zeros(lat)
        psi = LatticeField.from_modes(lat, {(2, 1): 1.0})
        for n in (1, 2):
            assert not dn_term(n, h, psi).hat.any()
        for n in (1, 2, 3):
            assert not dn_term_recursive(n, h, psi).hat.any()


class TestRecursionMatchesClosed:
    @pytest.mark.parametrize("dim", [1, 2])
    @pytest.mark.parametrize("order", [1, 2])
    def test_random_fields(self, dim, order):
        rng = np.random.default_rng(100 + dim + order)
        for _ in range(10):
            h, psi = field_pair(dim, rng)
            closed = dn_term(order, h, psi)
            rec = dn_term_recursive(order, h, psi)
            assert rel_err(closed, rec) < 1e-12

    def test_order_cap(self):
        lat = FrequencyLattice(1, 64)
        h = LatticeField.from_modes(lat, {1: 1.0})
        psi = LatticeField.from_modes(lat, {2: 1.0})
        with pytest.raises(ValueError):
            dn_term_recursive(4, h, psi)
        with pytest.raises(ValueError):
            dn_term(3, h, psi)


class TestStructure:
    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_homogeneity_in_height(self, order):
        rng = np.random.default_rng(40 + order)
        h, psi = field_pair(2, rng, extent=6)
        alpha = 0.37
        scaled = dn_term_recursive(order, alpha * h, psi)
        plain = alpha**order * dn_term_recursive(order, h, psi)
        assert rel_err(scaled, plain) < 1e-12

    def test_linearity_in_potential(self):
        rng = np.random.default_rng(44)
        h, psi_a = field_pair(2, rng, extent=6)
        _, psi_b = field_pair(2, rng, extent=6)
        lhs = dn_term(2, h, psi_a + 3.0 * psi_b)
        rhs = dn_term(2, h, psi_a) + 3.0 * dn_term(2, h, psi_b)
        assert rel_err(lhs, rhs) < 1e-12

    @pytest.mark.parametrize("order", [0, 1])
    def test_self_adjoint(self, order):
        rng = np.random.default_rng(50 + order)
        lat = FrequencyLattice(2, 64)
        h = LatticeField.from_modes(lat, random_modes(rng, 2, 6, 8, real=True), real=True)
        psi = LatticeField.from_modes(lat, random_modes(rng, 2, 6, 8, real=True), real=True)
        phi = LatticeField.from_modes(lat, random_modes(rng, 2, 6, 8, real=True), real=True)
        left = inner_product(dn_term(order, h, psi), phi)
        right = inner_product(psi, dn_term(order, h, phi))
        scale = max(abs(left), abs(right), 1.0)
        assert abs(left - right) / scale < 1e-10

    def test_order0_positive_semidefinite(self):
        rng = np.random.default_rng(60)
        lat = FrequencyLattice(1, 64)
        for _ in range(10):
            psi = LatticeField.from_modes(lat, random_modes(rng, 1, 8, 20, real=True), real=True)
            h = LatticeField.zeros(lat)
            val = inner_product(dn_term(0, h, psi), psi)
            assert val.real >= -1e-13
            assert abs(val.imag) < 1e-13

    def test_bilinear_polarization_diagonal(self):
        rng = np.random.default_rng(70)
        h, psi = field_pair(2, rng, extent=7)
        diag = g2_bilinear(h, h, psi)
        direct = dn_term(2, h, psi)
        assert rel_err(diag, direct) < 1e-12

    def test_bilinear_symmetry(self):
        rng = np.random.default_rng(71)
        ha, psi = field_pair(1, rng, extent=7)
        hb, _ = field_pair(1, rng, extent=7)
        ab = g2_bilinear(ha, hb, psi)
        ba = g2_bilinear(hb, ha, psi)
        assert rel_err(ab, ba) < 1e-13

    def test_series_sums_terms(self):
        rng = np.random.default_rng(72)
        h, psi = field_pair(1, rng, extent=5)
        total = dn_series(h, psi, 3)
        manual = dn_term_recursive(0, h, psi)
        for n in (1, 2, 3):
            manual = manual + dn_term_recursive(n, h, psi)
        npt.assert_allclose(total.hat, manual.hat, atol=1e-13)

    def test_reality_preserved(self):
        rng = np.random.default_rng(73)
        h, psi = field_pair(2, rng, extent=6)
        out = dn_term(2, h, psi)
        assert out.real
        assert sobolev_norm(out, 0.0) > 0
