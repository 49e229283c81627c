"""Interaction symbols of the quadratic and cubic forcing terms.

Writing zeta = xi - eta (quadratic) and a = xi - eta - nu (cubic), the
frequency-side forcing integrands factor through real polynomial symbols:

    transport(xi, eta)     = xi.eta - |xi||eta|                     (<= 0)
    bernoulli(xi, eta)     = ((xi-eta).eta + |xi-eta||eta|) / 2     (>= 0)

pair hat_h(zeta) hat_psi(eta), respectively hat_psi(zeta) hat_psi(eta), and

    cubic_height(xi,nu,eta)    = -3|xi||eta|(|xi| + |eta| - 2|xi-nu|)
    cubic_bernoulli(xi,nu,eta) = 6|eta|(|nu|^2 - |xi-eta||nu|)
    curvature(xi,nu,eta)       = -9 tau (a1 n1 e1^2 + a2 n2 e2^2)
                                 -3 tau (a1 n1 e2^2 + a2 n2 e1^2)
                                 -12 tau (a1 n2 e1 e2)

pair (h,h,psi), (h,psi,psi) and (h,h,h) slots.  The curvature symbol is the
slot representative of -3 tau div(grad h |grad h|^2); symmetrized over its
three height slots it agrees with -3 tau (xi.a)(nu.eta).

All functions take cartesian components (y parts zero in one dimension) and
broadcast like numpy.  transport and cubic_height are homogeneous of degree 2
and 3, bernoulli and cubic_bernoulli of degree 2 and 3, curvature of degree 4.
"""

from __future__ import annotations

import numpy as np


def transport_symbol(xi_x, xi_y, eta_x, eta_y):
    """xi.eta - |xi||eta|; zero iff the two frequencies are parallel."""
    dot = xi_x * eta_x + xi_y * eta_y
    return dot - np.hypot(xi_x, xi_y) * np.hypot(eta_x, eta_y)


def bernoulli_symbol(xi_x, xi_y, eta_x, eta_y):
    """((xi-eta).eta + |xi-eta||eta|)/2; zero iff xi-eta and eta anti-align."""
    zx = xi_x - eta_x
    zy = xi_y - eta_y
    dot = zx * eta_x + zy * eta_y
    return 0.5 * (dot + np.hypot(zx, zy) * np.hypot(eta_x, eta_y))


def cubic_height_symbol(xi_x, xi_y, nu_x, nu_y, eta_x, eta_y):
    """-3|xi||eta|(|xi| + |eta| - 2|xi - nu|)."""
    r_xi = np.hypot(xi_x, xi_y)
    r_eta = np.hypot(eta_x, eta_y)
    r_mix = np.hypot(xi_x - nu_x, xi_y - nu_y)
    return -3.0 * r_xi * r_eta * (r_xi + r_eta - 2.0 * r_mix)


def cubic_bernoulli_symbol(xi_x, xi_y, nu_x, nu_y, eta_x, eta_y):
    """6|eta|(|nu|^2 - |xi - eta||nu|)."""
    r_eta = np.hypot(eta_x, eta_y)
    r_nu = np.hypot(nu_x, nu_y)
    r_mix = np.hypot(xi_x - eta_x, xi_y - eta_y)
    return 6.0 * r_eta * (r_nu * r_nu - r_mix * r_nu)


def curvature_symbol(xi_x, xi_y, nu_x, nu_y, eta_x, eta_y, tension):
    """Cubic surface-tension symbol; degree 4, strictly negative on aligned triples."""
    ax = xi_x - eta_x - nu_x
    ay = xi_y - eta_y - nu_y
    return (
        -9.0 * tension * (ax * nu_x * eta_x**2 + ay * nu_y * eta_y**2)
        - 3.0 * tension * (ax * nu_x * eta_y**2 + ay * nu_y * eta_x**2)
        - 12.0 * tension * (ax * nu_y * eta_x * eta_y)
    )
