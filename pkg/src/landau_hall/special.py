"""Hermite polynomials and normalized oscillator eigenfunctions."""

from __future__ import annotations

import math

import numpy as np

from .errors import HermiteRangeError

N_MAX = 64


def _check_order(n: int, n_max: int) -> None:
    if n < 0 or int(n) != n:
        raise HermiteRangeError(f"Hermite order must be a non-negative integer, got {n!r}")
    if n > n_max:
        raise HermiteRangeError(f"Hermite order {n} exceeds n_max = {n_max}")


def hermite_poly(n: int, x, n_max: int = N_MAX):
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence."""
    _check_order(n, n_max)
    x = np.asarray(x)
    h_prev = np.ones_like(x, dtype=np.result_type(x, float))
    if n == 0:
        return h_prev if h_prev.ndim else h_prev[()]
    h = 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h if np.ndim(h) else h[()]


def hermite_function(n: int, xi, inv_length_sq: float = 1.0, n_max: int = N_MAX):
    """phi_n(xi) = (2^n n!)^(-1/2) (m w / pi hbar)^(1/4) exp(-xi^2/2) H_n(xi).

    ``inv_length_sq`` is ``m w / hbar``. The recurrence runs on the
    normalized functions so that neither 2^n n! nor H_n is ever formed;
    ``xi`` may be complex (used for derivatives in complex time).
    """
    _check_order(n, n_max)
    xi = np.asarray(xi)
    prefactor = inv_length_sq**0.25 * math.pi**-0.25
    f_prev = np.exp(-0.5 * xi * xi)
    if n == 0:
        out = prefactor * f_prev
        return out if out.ndim else out[()]
    f = math.sqrt(2.0) * xi * f_prev
    for k in range(1, n):
        f_prev, f = f, math.sqrt(2.0 / (k + 1)) * xi * f - math.sqrt(k / (k + 1)) * f_prev
    out = prefactor * f
    return out if out.ndim else out[()]


def hermite_functions(n_top: int, xi, inv_length_sq: float = 1.0, n_max: int = N_MAX) -> np.ndarray:
    """All phi_0 .. phi_{n_top} stacked along a new leading axis."""
    _check_order(n_top, n_max)
    xi = np.asarray(xi)
    prefactor = inv_length_sq**0.25 * math.pi**-0.25
    out = np.empty((n_top + 1,) + xi.shape, dtype=np.result_type(xi, float))
    out[0] = np.exp(-0.5 * xi * xi)
    if n_top >= 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for k in range(1, n_top):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * xi * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return prefactor * out
