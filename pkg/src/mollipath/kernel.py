"""Compactly supported mollifier kernels on [-1, 1].

A :class:`Kernel` bundles the normalized bump ``phi``, its analytic
derivatives, the primitives ``Phi(x) = int_{-1}^x phi`` and
``M(x) = int_{-1}^x u phi(u) du`` and the sup-norms of ``phi`` and
``phi'``.  Every closed-form convolution against a polyline reduces to
these few quantities.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import BPoly, PPoly
from scipy.optimize import minimize_scalar

__all__ = [
    "Kernel",
    "KernelConstructionError",
    "build_bump_kernel",
    "eval_phi",
    "eval_phi_deriv",
    "eval_scaled",
    "cdf",
    "moment",
]

# exp(-1/(1-x^2)) underflows long before this; avoids overflow in the exponent
BOUNDARY_CUTOFF = 1e-12

_GAUSS_ORDER = 24
_MIN_INTERVALS = 64
_MAX_INTERVALS = 1 << 15
_TAIL_THRESHOLD = 1e-6


class KernelConstructionError(RuntimeError):
    """Raised when the kernel tables cannot be built to the requested tolerance."""


def _as_output(x, value):
    if np.ndim(x) == 0:
        return float(value)
    return value


class BumpProfile:
    """Unnormalized bump ``exp(-1/(1-x^2))`` and its derivatives.

    The n-th derivative is ``exp(-1/(1-x^2)) * N_n(x) / (1-x^2)^(2n)`` with
    polynomial numerators generated by
    ``N_{n+1} = N_n' (1-x^2)^2 + 4 n x (1-x^2) N_n - 2 x N_n``.
    """

    even = True

    def __init__(self):
        self._numerators = [Polynomial([1.0])]

    def _numerator(self, order: int) -> Polynomial:
        one_minus = Polynomial([1.0, 0.0, -1.0])
        x = Polynomial([0.0, 1.0])
        while len(self._numerators) <= order:
            n = len(self._numerators) - 1
            prev = self._numerators[-1]
            nxt = prev.deriv() * one_minus**2 + 4 * n * x * one_minus * prev - 2 * x * prev
            self._numerators.append(nxt)
        return self._numerators[order]

    def __call__(self, x, order: int = 0):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < 1.0 - BOUNDARY_CUTOFF
        xs = np.where(inside, x, 0.0)
        w = 1.0 - xs * xs
        out = np.exp(-1.0 / w)
        if order:
            out = out * self._numerator(order)(xs) / w ** (2 * order)
        return np.where(inside, out, 0.0)


class _UniformTable:
    """Piecewise quintic Hermite interpolant on a uniform grid.

    Built with :class:`scipy.interpolate.BPoly`, evaluated by Horner's rule
    on the equivalent local power basis, which is several times faster for
    the large batched queries the mollifier makes.
    """

    def __init__(self, nodes, values, d1, d2):
        bp = BPoly.from_derivatives(nodes, np.stack([values, d1, d2], axis=1))
        self._coef = PPoly.from_bernstein_basis(bp).c
        self._start = nodes[0]
        self._step = nodes[1] - nodes[0]
        self._last = nodes.size - 2
        self._end = nodes[-1]
        self._end_value = values[-1]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        i = np.clip(((x - self._start) / self._step).astype(int), 0, self._last)
        s = x - (self._start + i * self._step)
        c = self._coef
        out = c[0, i]
        for row in c[1:]:
            out = out * s + row[i]
        return np.where(x >= self._end, self._end_value, out)


class Kernel:
    """An even, nonnegative mollifier supported on [-1, 1].

    ``profile(x, order)`` must return the ``order``-th derivative of an
    unnormalized even bump.  The normalization constant, the CDF and
    first-moment tables and both sup-norms are computed here; none of them
    are hardcoded.

    The tables store ``Phi`` and ``M`` on [-1, 0] only as quintic Hermite
    interpolants (values plus exact first and second derivatives, which are
    available analytically).  The right half follows from evenness:
    ``Phi(x) = 1 - Phi(-x)`` and ``M(x) = M(-x)``.  The grid is refined by
    doubling until the midpoint interpolation error is below ``tolerance``.
    """

    support_radius = 1.0

    def __init__(self, profile: Callable, tolerance: float = 1e-12, even: bool = True,
                 name: str = "kernel"):
        if not tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {tolerance!r}")
        if not even:
            raise ValueError("only even kernels are supported")
        probe = np.linspace(0.05, 0.95, 19)
        if not np.allclose(profile(probe), profile(-probe), rtol=1e-13, atol=0.0):
            raise ValueError("kernel profile is not even")
        self.name = name
        self.even = True
        self.quadrature_tolerance = float(tolerance)
        self._profile = profile

        gx, gw = leggauss(_GAUSS_ORDER)
        self._gauss = (gx, gw)

        n = _MIN_INTERVALS
        while True:
            nodes = np.linspace(-1.0, 0.0, n + 1)
            pieces = self._interval_integrals(nodes)
            if pieces is not None:
                half_mass = pieces[0].sum()
                self.normalization = 0.5 / half_mass
                err = self._build_tables(nodes, pieces)
                if err < tolerance:
                    break
            n *= 2
            if n > _MAX_INTERVALS:
                raise KernelConstructionError(
                    f"could not reach tolerance {tolerance:g} with {_MAX_INTERVALS} intervals")
        self.table_intervals = n

        self.sup_phi = self._sup_norm(0)
        self.sup_phi_prime = self._sup_norm(1)

    # -- construction helpers -------------------------------------------------

    def _gauss_integrals(self, lo, hi):
        gx, gw = self._gauss
        half = 0.5 * (hi - lo)[:, None]
        mid = 0.5 * (hi + lo)[:, None]
        u = mid + half * gx[None, :]
        f = self._profile(u)
        mass = (half * f * gw).sum(axis=1)
        first = (half * u * f * gw).sum(axis=1)
        return mass, first

    def _interval_integrals(self, nodes):
        lo, hi = nodes[:-1], nodes[1:]
        mass, first = self._gauss_integrals(lo, hi)
        # two half-interval rules must agree, otherwise the grid is too coarse
        mid = 0.5 * (lo + hi)
        m1, f1 = self._gauss_integrals(lo, mid)
        m2, f2 = self._gauss_integrals(mid, hi)
        scale = max(mass.sum(), 1e-300)
        if (np.abs(m1 + m2 - mass).max() > 1e-3 * self.quadrature_tolerance * scale
                or np.abs(f1 + f2 - first).max() > 1e-3 * self.quadrature_tolerance * scale):
            return None
        return mass, first

    def _build_tables(self, nodes, pieces):
        c = self.normalization
        mass, first = pieces
        phi_nodes = c * self._profile(nodes)
        dphi_nodes = c * self._profile(nodes, 1)
        cdf_nodes = np.concatenate([[0.0], np.cumsum(c * mass)])
        cdf_nodes[-1] = 0.5
        mom_nodes = np.concatenate([[0.0], np.cumsum(c * first)])
        self._cdf_table = _UniformTable(nodes, cdf_nodes, phi_nodes, dphi_nodes)
        self._moment_table = _UniformTable(
            nodes, mom_nodes, nodes * phi_nodes, phi_nodes + nodes * dphi_nodes)
        self._nodes = nodes
        self._cdf_nodes = cdf_nodes
        # where phi is this small the quintic can wiggle below zero slope;
        # there Phi is summed directly, which is monotone because phi
        # increases on [-1, 0] and Gauss weights are positive
        big = np.nonzero(phi_nodes >= _TAIL_THRESHOLD * phi_nodes[-1])[0]
        self._tail_edge = nodes[big[0]] if big.size else 0.0

        # interpolation error at interval midpoints against direct quadrature
        lo = nodes[:-1]
        mid = 0.5 * (nodes[:-1] + nodes[1:])
        m_half, f_half = self._gauss_integrals(lo, mid)
        exact_cdf = cdf_nodes[:-1] + c * m_half
        exact_mom = mom_nodes[:-1] + c * f_half
        return max(np.abs(self._cdf_table(mid) - exact_cdf).max(),
                   np.abs(self._moment_table(mid) - exact_mom).max())

    def _sup_norm(self, order):
        grid = np.linspace(-1.0, 1.0, 20001)
        vals = np.abs(self.deriv(grid, order))
        i = int(np.argmax(vals))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        res = minimize_scalar(lambda x: -abs(float(self.deriv(x, order))),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        return max(float(vals[i]), -float(res.fun))

    # -- evaluation -----------------------------------------------------------

    def __call__(self, x):
        return _as_output(x, self.normalization * self._profile(x))

    def deriv(self, x, order: int = 1):
        """``order``-th derivative of phi; ``order=0`` is phi itself."""
        if order < 0:
            raise ValueError("derivative order must be nonnegative")
        return _as_output(x, self.normalization * self._profile(x, order))

    def scaled(self, eps: float, x, order: int = 0):
        """``phi_eps^(order)(x) = eps^(-1-order) * phi^(order)(x / eps)``."""
        if not eps > 0:
            raise ValueError(f"eps must be positive, got {eps!r}")
        x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        return eps ** (-1 - order) * self.deriv(x / eps, order)

    def cdf(self, x):
        """``Phi(x) = int_{-1}^x phi``, 0 below -1 and 1 above 1."""
        xa = np.asarray(x, dtype=float)
        neg = -np.abs(xa)
        inner = neg > -1.0
        left = np.zeros(xa.shape)
        if np.any(inner):
            v = neg[inner]
            vals = self._cdf_table(v)
            tail = v < self._tail_edge
            if np.any(tail):
                vals[tail] = self._tail_cdf(v[tail])
            left[inner] = vals
        out = np.where(xa <= 0.0, left, 1.0 - left)
        return _as_output(x, out)

    def _tail_cdf(self, x):
        nodes = self._nodes
        h = nodes[1] - nodes[0]
        i = np.clip(np.floor((x + 1.0) / h).astype(int), 0, nodes.size - 2)
        mass, _ = self._gauss_integrals(nodes[i], x)
        return self._cdf_nodes[i] + self.normalization * mass

    def moment(self, x):
        """``M(x) = int_{-1}^x u phi(u) du``; zero outside (-1, 1)."""
        xa = np.asarray(x, dtype=float)
        neg = -np.abs(xa)
        inner = neg > -1.0
        out = np.zeros(xa.shape)
        if np.any(inner):
            out[inner] = self._moment_table(neg[inner])
        return _as_output(x, out)

    def __repr__(self):
        return (f"Kernel(name={self.name!r}, normalization={self.normalization:.12g}, "
                f"tolerance={self.quadrature_tolerance:g})")


def build_bump_kernel(tolerance: float = 1e-12) -> Kernel:
    """The standard bump ``c1 * exp(-1/(1-x^2))`` on (-1, 1)."""
    return Kernel(BumpProfile(), tolerance=tolerance, name="bump")


# functional aliases


def eval_phi(k: Kernel, x):
    return k(x)


def eval_phi_deriv(k: Kernel, x, order: int = 1):
    return k.deriv(x, order)


def eval_scaled(k: Kernel, eps: float, x, order: int = 0):
    return k.scaled(eps, x, order)


def cdf(k: Kernel, x):
    return k.cdf(x)


def moment(k: Kernel, x):
    return k.moment(x)
