"""Independent reference implementations used as test oracles.

Everything here deliberately avoids the package's recurrence/transform code
paths: Legendre functions come from exact rational differentiation of the
Rodrigues polynomial, and sphere integrals from a dense composite-Simpson
rule in colatitude with a uniform longitude sum.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def legendre_poly_coeffs(n: int) -> list[Fraction]:
    """Exact rational coefficients of the Legendre polynomial P_n (index = power)."""
    poly = [Fraction(0)] * (2 * n + 1)
    for k in range(n + 1):
        poly[2 * k] = Fraction(math.comb(n, k)) * Fraction((-1) ** (n - k))
    for _ in range(n):
        poly = [poly[i + 1] * (i + 1) for i in range(len(poly) - 1)]
    denom = Fraction(2**n) * math.factorial(n)
    return [c / denom for c in poly]


def plm_reference(n: int, m: int, s):
    """P_n^m(s) with Condon-Shortley phase; P_n^{-m} = (-1)^m (n-m)!/(n+m)! P_n^m."""
    ma = abs(m)
    coeffs = legendre_poly_coeffs(n)
    for _ in range(ma):
        coeffs = [coeffs[i + 1] * (i + 1) for i in range(len(coeffs) - 1)]
    s = np.asarray(s, dtype=float)
    value = np.zeros_like(s)
    for c in reversed([float(c) for c in coeffs]):
        value = value * s + c
    out = (-1.0) ** ma * (1.0 - s * s) ** (ma / 2.0) * value
    if np.ndim(out) == 0:
        out = float(out)
    if m < 0:
        out *= (-1.0) ** ma * math.factorial(n - ma) / math.factorial(n + ma)
    return out


def ynm_reference(n: int, m: int, theta, phi):
    """Orthonormal Y_n^m from plm_reference and the explicit normalization."""
    ma = abs(m)
    norm = math.sqrt(
        (2 * n + 1) / (4.0 * math.pi) * math.factorial(n - ma) / math.factorial(n + ma)
    )
    base = norm * plm_reference(n, ma, np.cos(theta)) * np.exp(1j * ma * np.asarray(phi))
    if m >= 0:
        return base
    return (-1.0) ** ma * np.conj(base)


def sphere_integral_simpson(fn, n_theta: int = 2001, n_phi: int = 256):
    """Integral over the sphere of fn(theta, phi); Simpson x uniform-longitude."""
    if n_theta % 2 == 0:
        n_theta += 1
    theta = np.linspace(0.0, math.pi, n_theta)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    vals = fn(theta[:, None], phi[None, :])
    integrand = vals * np.sin(theta)[:, None]
    phi_integral = integrand.sum(axis=1) * (2.0 * math.pi / n_phi)
    h = math.pi / (n_theta - 1)
    weights = np.ones(n_theta)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return (phi_integral @ weights) * h / 3.0
