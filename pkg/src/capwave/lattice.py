"""Periodic frequency lattice, spectral fields, and exact pointwise products.

Fields live on the integer frequency lattice of the torus [0, 2*pi)^d and are
stored spectrally: ``hat[k]`` is the coefficient of exp(i k.x), with axes in
numpy fft ordering.  The forward map divides by M^d so coefficients are
amplitude-like, i.e. a field equal to cos(k.x) has two coefficients of 1/2.

Products are evaluated in physical space through zero-padded transforms.  A
strict per-axis support check (extent_a + extent_b <= M/2 - 1) guarantees that
the circular convolution agrees with the true one, so products here are exact
up to roundoff; after each product every coefficient outside the provable
support box is reset to exactly zero so that chained products keep sharp
supports.  The unpaired Nyquist slot -M/2 is always kept at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SupportOverflowError, UndefinedSymbolError

_NAMED_SYMBOLS = {
    "identity": lambda r: np.ones_like(r),
    "abs": lambda r: r,
    "abs_sq": lambda r: r * r,
    "laplacian": lambda r: -(r * r),
    "bracket": lambda r: np.sqrt(1.0 + r * r),
}


class FrequencyLattice:
    """Integer frequency lattice of a d-dimensional periodic grid of size M."""

    def __init__(self, dim: int, size: int):
        if dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {dim}")
        if size < 4 or size % 2:
            raise ValueError(f"size must be even and >= 4, got {size}")
        self.dim = dim
        self.size = size
        self.shape = (size,) * dim
        axis = np.fft.fftfreq(size, 1.0 / size).astype(np.int64)
        self.axes = (axis,) * dim
        if dim == 1:
            self.kx = axis.astype(np.float64)
            self.ky = np.zeros_like(self.kx)
        else:
            self.kx, self.ky = np.meshgrid(axis, axis, indexing="ij")
            self.kx = self.kx.astype(np.float64)
            self.ky = self.ky.astype(np.float64)
        self.radius = np.hypot(self.kx, self.ky)
        # slots with any axis at -M/2 have no conjugate partner; kept at zero
        self.nyquist_mask = np.zeros(self.shape, dtype=bool)
        for j in range(dim):
            idx = [slice(None)] * dim
            idx[j] = size // 2
            self.nyquist_mask[tuple(idx)] = True
        self.max_extent = size // 2 - 1

    @classmethod
    def for_max_frequency(cls, dim: int, kmax: float, pad_factor: float = 1.5):
        """Smallest power-of-two lattice whose Nyquist covers pad_factor * kmax."""
        need = pad_factor * kmax
        size = 8
        while size / 2 < need:
            size *= 2
        return cls(dim, size)

    def __eq__(self, other):
        return (
            isinstance(other, FrequencyLattice)
            and self.dim == other.dim
            and self.size == other.size
        )

    def __repr__(self):
        return f"FrequencyLattice(dim={self.dim}, size={self.size})"


class LatticeField:
    """A scalar field stored by its Fourier coefficients on a FrequencyLattice.

    ``real=True`` records that the physical-space field is real valued, which
    every operation preserves when it can; physical() then returns the real
    part so roundoff never leaks an imaginary component.
    """

    __slots__ = ("lattice", "hat", "real")

    def __init__(self, lattice: FrequencyLattice, hat: np.ndarray, real: bool = False):
        if hat.shape != lattice.shape:
            raise ValueError(f"hat shape {hat.shape} != lattice shape {lattice.shape}")
        self.lattice = lattice
        self.hat = np.asarray(hat, dtype=np.complex128)
        self.real = bool(real)

    @classmethod
    def zeros(cls, lattice: FrequencyLattice, real: bool = True):
        return cls(lattice, np.zeros(lattice.shape, dtype=np.complex128), real=real)

    @classmethod
    def from_modes(cls, lattice: FrequencyLattice, modes: dict, real: bool = False):
        """Build a field from {frequency: coefficient}; 1d keys may be ints."""
        hat = np.zeros(lattice.shape, dtype=np.complex128)
        half = lattice.size // 2
        for key, coeff in modes.items():
            ks = (key,) if np.isscalar(key) else tuple(key)
            if len(ks) != lattice.dim:
                raise ValueError(f"mode {key} has wrong dimension")
            if any(abs(k) > half - 1 for k in ks):
                raise ValueError(f"mode {key} outside representable range +-{half - 1}")
            hat[tuple(int(k) % lattice.size for k in ks)] += coeff
        return cls(lattice, hat, real=real)

    @classmethod
    def from_physical(cls, lattice: FrequencyLattice, values: np.ndarray):
        values = np.asarray(values)
        real = not np.iscomplexobj(values)
        hat = np.fft.fftn(values) / values.size
        hat[lattice.nyquist_mask] = 0.0
        return cls(lattice, hat, real=real)

    def physical(self) -> np.ndarray:
        out = np.fft.ifftn(self.hat) * self.hat.size
        return out.real if self.real else out

    def copy(self):
        return LatticeField(self.lattice, self.hat.copy(), real=self.real)

    def support_extent(self):
        """Per-axis maximum |frequency| carrying a nonzero coefficient."""
        nz = self.hat != 0
        if not nz.any():
            return (0,) * self.lattice.dim
        extents = []
        for j, axis in enumerate(self.lattice.axes):
            other = tuple(i for i in range(self.lattice.dim) if i != j)
            line = nz.any(axis=other) if other else nz
            extents.append(int(np.abs(axis[line]).max()))
        return tuple(extents)

    def __add__(self, other):
        self._check_mate(other)
        return LatticeField(self.lattice, self.hat + other.hat, real=self.real and other.real)

    def __sub__(self, other):
        self._check_mate(other)
        return LatticeField(self.lattice, self.hat - other.hat, real=self.real and other.real)

    def __mul__(self, scalar):
        if isinstance(scalar, LatticeField):
            raise TypeError("use pointwise_product for field products")
        real = self.real and not isinstance(scalar, complex)
        return LatticeField(self.lattice, self.hat * scalar, real=real)

    __rmul__ = __mul__

    def __neg__(self):
        return LatticeField(self.lattice, -self.hat, real=self.real)

    def _check_mate(self, other):
        if not isinstance(other, LatticeField) or other.lattice != self.lattice:
            raise ValueError("fields live on different lattices")


def apply_multiplier(field: LatticeField, symbol, real_even: bool | None = None) -> LatticeField:
    """Multiply the coefficients by a radial named symbol or an explicit array.

    Named symbols are real and even, so they preserve reality.  For explicit
    arrays pass real_even=True to keep the reality flag.
    """
    lat = field.lattice
    if isinstance(symbol, str):
        try:
            values = _NAMED_SYMBOLS[symbol](lat.radius)
        except KeyError:
            known = ", ".join(sorted(_NAMED_SYMBOLS))
            raise UndefinedSymbolError(f"unknown multiplier {symbol!r}; known: {known}") from None
        preserves = True
    else:
        values = np.asarray(symbol)
        if values.shape != lat.shape:
            raise ValueError(f"symbol shape {values.shape} != lattice shape {lat.shape}")
        preserves = bool(real_even)
    hat = field.hat * values
    hat[lat.nyquist_mask] = 0.0
    return LatticeField(lat, hat, real=field.real and preserves)


def abs_derivative(field: LatticeField, power: float = 1.0) -> LatticeField:
    """|D|^power: coefficients scale by |k|^power, with the k=0 slot sent to zero."""
    r = field.lattice.radius
    with np.errstate(divide="ignore"):
        sym = np.where(r > 0, r, 1.0) ** power
    sym = np.where(r > 0, sym, 0.0 if power != 0 else 1.0)
    return apply_multiplier(field, sym, real_even=True)


def gradient(field: LatticeField):
    """Tuple of partial derivatives (one per axis)."""
    lat = field.lattice
    comps = []
    for mesh in (lat.kx, lat.ky)[: lat.dim]:
        hat = field.hat * (1j * mesh)
        hat[lat.nyquist_mask] = 0.0
        comps.append(LatticeField(lat, hat, real=field.real))
    return tuple(comps)


def divergence(fields) -> LatticeField:
    """Sum of partial derivatives of the vector components."""
    fields = tuple(fields)
    lat = fields[0].lattice
    if len(fields) != lat.dim:
        raise ValueError(f"expected {lat.dim} components, got {len(fields)}")
    hat = np.zeros(lat.shape, dtype=np.complex128)
    real = True
    for comp, mesh in zip(fields, (lat.kx, lat.ky)):
        hat += comp.hat * (1j * mesh)
        real = real and comp.real
    hat[lat.nyquist_mask] = 0.0
    return LatticeField(lat, hat, real=real)


def laplacian(field: LatticeField) -> LatticeField:
    return apply_multiplier(field, "laplacian")


def _embed_indices(size: int, padded: int) -> np.ndarray:
    return np.fft.fftfreq(size, 1.0 / size).astype(np.int64) % padded


def pointwise_product(a: LatticeField, b: LatticeField, pad_factor: float = 1.5) -> LatticeField:
    """Physical-space product of two fields, exact on the stored lattice.

    Raises SupportOverflowError if on any axis the summed support extents
    exceed M/2 - 1, since then the result would not be representable without
    aliasing.  Coefficients outside the summed support box come out as exact
    zeros, so products can be chained without roundoff widening supports.
    """
    a._check_mate(b)
    lat = a.lattice
    ext_a = a.support_extent()
    ext_b = b.support_extent()
    box = []
    for j in range(lat.dim):
        total = ext_a[j] + ext_b[j]
        if total > lat.max_extent:
            raise SupportOverflowError(
                f"product support {ext_a[j]} + {ext_b[j]} = {total} on axis {j} "
                f"exceeds the representable extent {lat.max_extent} "
                f"(lattice size {lat.size})"
            )
        box.append(total)

    padded = max(lat.size, 2 * math.ceil(pad_factor * lat.size / 2))
    idx = _embed_indices(lat.size, padded)
    sel = np.ix_(*([idx] * lat.dim)) if lat.dim == 2 else (idx,)
    shape = (padded,) * lat.dim

    def lift(hat):
        out = np.zeros(shape, dtype=np.complex128)
        out[sel] = hat
        return np.fft.ifftn(out) * out.size

    prod = lift(a.hat) * lift(b.hat)
    hat_p = np.fft.fftn(prod) / prod.size
    hat = np.ascontiguousarray(hat_p[sel])

    # outside the convolution support box everything is roundoff; make it exact
    for j, limit in enumerate(box):
        axis = lat.axes[j]
        outside = np.abs(axis) > limit
        if lat.dim == 2:
            shaped = outside.reshape((-1, 1)) if j == 0 else outside.reshape((1, -1))
            hat[np.broadcast_to(shaped, lat.shape)] = 0.0
        else:
            hat[outside] = 0.0
    hat[lat.nyquist_mask] = 0.0
    return LatticeField(lat, hat, real=a.real and b.real)


def inner_product(a: LatticeField, b: LatticeField) -> complex:
    """Frequency-side pairing sum_k hat_a[k] * conj(hat_b[k])."""
    a._check_mate(b)
    return complex(np.vdot(b.hat, a.hat))


def sobolev_norm(field: LatticeField, s: float, region_mask: np.ndarray | None = None) -> float:
    """H^s norm (sum_k <k>^{2s} |hat[k]|^2)^{1/2}, optionally over a mask."""
    weight = (1.0 + field.lattice.radius**2) ** s
    density = weight * np.abs(field.hat) ** 2
    if region_mask is not None:
        density = density[region_mask]
    return float(np.sqrt(density.sum()))


@dataclass
class SurfaceState:
    """Height and velocity-potential pair on a common lattice."""

    height: LatticeField
    potential: LatticeField

    def __post_init__(self):
        if self.height.lattice != self.potential.lattice:
            raise ValueError("height and potential live on different lattices")

    @property
    def lattice(self):
        return self.height.lattice

    @classmethod
    def zeros(cls, lattice: FrequencyLattice):
        return cls(LatticeField.zeros(lattice), LatticeField.zeros(lattice))

    def __add__(self, other):
        return SurfaceState(self.height + other.height, self.potential + other.potential)

    def __mul__(self, scalar):
        return SurfaceState(self.height * scalar, self.potential * scalar)

    __rmul__ = __mul__
