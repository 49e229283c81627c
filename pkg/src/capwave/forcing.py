"""Variation forcings of the water problem around the flat rest state.

With the solution map expanded in the size of the data, the alpha-derivatives
of the nonlinearity at zero give the forcing terms driving each Duhamel
iterate.  The second variation at a first-order pair (h1, psi1) is

    height row:    -2 div(h1 grad psi1) - 2 |D|(h1 |D| psi1)
    potential row: (|D| psi1)^2 - |grad psi1|^2

and the third variation splits into a mixed piece pairing first and second
order pairs,

    height row:    -div(h1 grad psi2) - |D|(h1 |D| psi2)  + (1 <-> 2)
    potential row: |D| psi1 |D| psi2 - grad psi1 . grad psi2,

taken with overall weight 3 in two dimensions and 6 in one dimension, plus a
pure piece cubic in (h1, psi1) whose potential row carries the surface-tension
(curvature) contribution -3 tau div(grad h1 |grad h1|^2).  The pure height row
equals six times the degree-2 normal-velocity term.
"""

from __future__ import annotations

from .dno import dn_term
from .errors import ConfigError
from .lattice import (
    LatticeField,
    SurfaceState,
    abs_derivative,
    divergence,
    gradient,
    laplacian,
    pointwise_product,
)


def quadratic_forcing(h1: LatticeField, psi1: LatticeField, pad_factor: float = 1.5) -> SurfaceState:
    """Second variation of the nonlinearity at the pair (h1, psi1)."""
    row_h = 2.0 * dn_term(1, h1, psi1, pad_factor)
    absd = abs_derivative(psi1)
    row_p = pointwise_product(absd, absd, pad_factor)
    for comp in gradient(psi1):
        row_p = row_p - pointwise_product(comp, comp, pad_factor)
    return SurfaceState(row_h, row_p)


def mixed_cubic_forcing(
    h1: LatticeField,
    psi1: LatticeField,
    h2: LatticeField,
    psi2: LatticeField,
    pad_factor: float = 1.5,
) -> SurfaceState:
    """Bilinear third-variation piece pairing first and second order pairs.

    The dimensional weight (3 or 6) is not applied here; see third_variation.
    """
    row_h = dn_term(1, h1, psi2, pad_factor) + dn_term(1, h2, psi1, pad_factor)
    row_p = pointwise_product(abs_derivative(psi1), abs_derivative(psi2), pad_factor)
    for c1, c2 in zip(gradient(psi1), gradient(psi2)):
        row_p = row_p - pointwise_product(c1, c2, pad_factor)
    return SurfaceState(row_h, row_p)


def curvature_cubic(h1: LatticeField, tension: float, pad_factor: float = 2.0, form: str = "expanded") -> LatticeField:
    """Cubic curvature term of the potential row.

    form="expanded" uses the written-out second-derivative products;
    form="divergence" uses -3 tau div(grad h |grad h|^2).  The two agree.
    """
    lat = h1.lattice
    if form == "divergence":
        grads = gradient(h1)
        speed_sq = pointwise_product(grads[0], grads[0], pad_factor)
        for comp in grads[1:]:
            speed_sq = speed_sq + pointwise_product(comp, comp, pad_factor)
        flux = [pointwise_product(comp, speed_sq, pad_factor) for comp in grads]
        return -3.0 * tension * divergence(flux)
    if form != "expanded":
        raise ConfigError(f"unknown curvature form {form!r}")

    def prod3(a, b, c):
        return pointwise_product(pointwise_product(a, b, pad_factor), c, pad_factor)

    if lat.dim == 1:
        (hx,) = gradient(h1)
        (hxx,) = gradient(hx)
        return -9.0 * tension * prod3(hxx, hx, hx)
    hx, hy = gradient(h1)
    hxx, hxy = gradient(hx)
    _, hyy = gradient(hy)
    out = 3.0 * prod3(hxx, hx, hx)
    out = out + 3.0 * prod3(hyy, hy, hy)
    out = out + 4.0 * prod3(hy, hx, hxy)
    out = out + prod3(hx, hx, hyy)
    out = out + prod3(hy, hy, hxx)
    return -3.0 * tension * out


def pure_cubic_forcing(
    h1: LatticeField, psi1: LatticeField, tension: float, pad_factor: float = 2.0
) -> SurfaceState:
    """Third-variation piece cubic in the first-order pair."""
    row_h = 6.0 * dn_term(2, h1, psi1, pad_factor)
    bracket = pointwise_product(h1, laplacian(psi1), pad_factor) + abs_derivative(
        pointwise_product(h1, abs_derivative(psi1), pad_factor)
    )
    row_p = -6.0 * pointwise_product(bracket, abs_derivative(psi1), pad_factor)
    if tension != 0.0:
        row_p = row_p + curvature_cubic(h1, tension, pad_factor)
    return SurfaceState(row_h, row_p)


def mixed_weight(dim: int) -> float:
    """Dimensional weight of the mixed piece in the third variation."""
    if dim == 2:
        return 3.0
    if dim == 1:
        return 6.0
    raise ConfigError(f"dim must be 1 or 2, got {dim}")


def third_variation(
    h1: LatticeField,
    psi1: LatticeField,
    h2: LatticeField,
    psi2: LatticeField,
    tension: float,
    pad_factor: float = 2.0,
) -> SurfaceState:
    """Full third variation: weighted mixed piece plus pure cubic piece."""
    w = mixed_weight(h1.lattice.dim)
    mixed = mixed_cubic_forcing(h1, psi1, h2, psi2, pad_factor)
    pure = pure_cubic_forcing(h1, psi1, tension, pad_factor)
    return w * mixed + pure
