"""Graded expansion of the Dirichlet-Neumann operator in surface height.

The normal-velocity operator of the water problem expands as a series
G(h) = sum_n G_n(h) with G_n homogeneous of degree n in the height h.  The
first closed forms are

    G_0 psi = |D| psi
    G_1(h) psi = -div(h grad psi) - |D|(h |D| psi)
    G_2(h) psi = 1/2 Lap(h^2 |D| psi) + 1/2 |D|(h^2 Lap psi)
                 + |D|(h |D|(h |D| psi))

and the whole family obeys the recursion

    G_n(h) psi = -|D|^{n-1} div((h^n / n!) grad psi)
                 - sum_{l<n} |D|^{n-l} ((h^{n-l} / (n-l)!) G_l(h) psi),

implemented here up to order 3.  Both routes are kept so each can check the
other.
"""

from __future__ import annotations

from math import factorial

from .lattice import (
    LatticeField,
    abs_derivative,
    divergence,
    gradient,
    laplacian,
    pointwise_product,
)

MAX_ORDER = 3


def _neg_div_scaled_grad(f: LatticeField, psi: LatticeField, pad: float) -> LatticeField:
    """-div(f grad psi)."""
    comps = [pointwise_product(f, c, pad) for c in gradient(psi)]
    return -1.0 * divergence(comps)


def _height_power(h: LatticeField, n: int, pad: float) -> LatticeField:
    """h^n / n! by repeated products."""
    out = h
    for _ in range(n - 1):
        out = pointwise_product(out, h, pad)
    return (1.0 / factorial(n)) * out


def dn_term(order: int, h: LatticeField, psi: LatticeField, pad_factor: float = 1.5) -> LatticeField:
    """Closed form of the degree-`order` expansion term (orders 0 to 2)."""
    if order == 0:
        return abs_derivative(psi)
    if order == 1:
        transport = _neg_div_scaled_grad(h, psi, pad_factor)
        smoothed = abs_derivative(pointwise_product(h, abs_derivative(psi), pad_factor))
        return transport - smoothed
    if order == 2:
        h2 = pointwise_product(h, h, pad_factor)
        a = laplacian(pointwise_product(h2, abs_derivative(psi), pad_factor))
        b = abs_derivative(pointwise_product(h2, laplacian(psi), pad_factor))
        inner = pointwise_product(h, abs_derivative(psi), pad_factor)
        c = abs_derivative(
            pointwise_product(h, abs_derivative(inner), pad_factor)
        )
        return 0.5 * a + 0.5 * b + c
    raise ValueError(f"no closed form for order {order}; use dn_term_recursive (max {MAX_ORDER})")


def dn_term_recursive(
    order: int, h: LatticeField, psi: LatticeField, pad_factor: float = 1.5
) -> LatticeField:
    """Expansion term of degree `order` built from the recursion (orders 0 to 3)."""
    if order < 0 or order > MAX_ORDER:
        raise ValueError(f"order must be between 0 and {MAX_ORDER}, got {order}")
    if order == 0:
        return abs_derivative(psi)
    lead = abs_derivative(
        _neg_div_scaled_grad(_height_power(h, order, pad_factor), psi, pad_factor),
        power=order - 1,
    )
    total = lead
    for low in range(order):
        weight = _height_power(h, order - low, pad_factor)
        prev = dn_term_recursive(low, h, psi, pad_factor)
        total = total - abs_derivative(
            pointwise_product(weight, prev, pad_factor), power=order - low
        )
    return total


def g2_bilinear(
    ha: LatticeField, hb: LatticeField, psi: LatticeField, pad_factor: float = 1.5
) -> LatticeField:
    """Symmetric bilinear polarization of the degree-2 term; diagonal recovers it."""
    hh = pointwise_product(ha, hb, pad_factor)
    a = laplacian(pointwise_product(hh, abs_derivative(psi), pad_factor))
    b = abs_derivative(pointwise_product(hh, laplacian(psi), pad_factor))

    def chain(outer, inner):
        core = pointwise_product(inner, abs_derivative(psi), pad_factor)
        return abs_derivative(pointwise_product(outer, abs_derivative(core), pad_factor))

    return 0.5 * a + 0.5 * b + 0.5 * chain(ha, hb) + 0.5 * chain(hb, ha)


def dn_series(h: LatticeField, psi: LatticeField, order: int, pad_factor: float = 1.5) -> LatticeField:
    """Truncated operator sum_{n<=order} G_n(h) psi via the recursion."""
    total = dn_term_recursive(0, h, psi, pad_factor)
    for n in range(1, order + 1):
        total = total + dn_term_recursive(n, h, psi, pad_factor)
    return total
