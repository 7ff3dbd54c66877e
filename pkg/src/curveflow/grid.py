"""Spectral calculus on uniform periodic grids.

Everything downstream (curve functionals, the flow engine, the inequality
suites) is built on the four operations in this module: differentiation,
quadrature, the periodic antiderivative, and two-thirds dealiasing.  All of
them act on the trigonometric interpolant of the samples through the real
FFT, so they are exact to round-off for band-limited data and they satisfy
the discrete summation-by-parts identity

    integrate(f * deriv(g, 1)) == -integrate(deriv(f, 1) * g)

exactly in exact arithmetic.  That identity is what makes the nonlocal
constraint and the energy-rate checks in the flow engine testable at
1e-10 rather than at truncation level.

Conventions: nodes s_j = j*L/N, wavenumbers q_m = 2*pi*m/L for
m = 0..N/2, and odd-order derivatives zero the Nyquist mode (the standard
choice that keeps real input real without an asymmetric residue).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GridFunction",
    "MeanNotZeroError",
    "MEAN_ZERO_TOL",
    "deriv",
    "integrate",
    "antideriv",
    "dealias",
]

# Relative tolerance deciding whether a function counts as mean-zero.  Loose
# enough for accumulated round-off, tight enough to catch a wrong constraint
# value upstream.
MEAN_ZERO_TOL = 1e-10

MIN_NODES = 16


class MeanNotZeroError(ValueError):
    """Raised when a periodic antiderivative is requested for input with
    nonzero mean.  No periodic primitive exists in that case; for the flow
    engine this signals a broken nonlocal constraint."""


@dataclass(frozen=True)
class GridFunction:
    """Samples of a real periodic function at N uniform nodes on [0, L).

    Instances are immutable: the sample array is copied on construction and
    marked read-only, so values are safe to share between threads.
    """

    samples: np.ndarray
    domain_length: float

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float, copy=True)
        if arr.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        n = arr.size
        if n < MIN_NODES or n % 2 != 0:
            raise ValueError(f"need an even node count >= {MIN_NODES}, got {n}")
        if not np.isfinite(self.domain_length) or self.domain_length <= 0:
            raise ValueError(f"domain_length must be positive, got {self.domain_length}")
        if not np.isfinite(arr).all():
            raise ValueError("samples contain non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "domain_length", float(self.domain_length))

    @property
    def n_nodes(self) -> int:
        return self.samples.size

    def nodes(self) -> np.ndarray:
        """Node coordinates s_j = j*L/N."""
        n = self.samples.size
        return np.arange(n) * (self.domain_length / n)

    def with_samples(self, samples: np.ndarray) -> "GridFunction":
        """New function on the same grid."""
        return GridFunction(samples, self.domain_length)


# ---------------------------------------------------------------------------
# array-level kernels, shared with the flow engine's per-run workspace
# ---------------------------------------------------------------------------

def wavenumbers(n: int, length: float) -> np.ndarray:
    """rfft wavenumbers q_m = 2*pi*m/L, m = 0..N/2."""
    return np.arange(n // 2 + 1) * (2.0 * np.pi / length)


def deriv_multiplier(q: np.ndarray, order: int) -> np.ndarray:
    """Fourier multiplier of the order-th derivative; Nyquist zeroed when odd."""
    mult = (1j * q) ** order
    if order % 2 == 1:
        mult[-1] = 0.0
    return mult


def deriv_samples(arr: np.ndarray, length: float, order: int) -> np.ndarray:
    n = arr.size
    spec = np.fft.rfft(arr)
    spec *= deriv_multiplier(wavenumbers(n, length), order)
    return np.fft.irfft(spec, n=n)


def integrate_samples(arr: np.ndarray, length: float) -> float:
    # Rectangle rule; on a uniform periodic grid this is the trapezoidal rule
    # and is spectrally accurate.
    return (length / arr.size) * float(arr.sum())


def antideriv_samples(arr: np.ndarray, length: float) -> np.ndarray:
    n = arr.size
    q = wavenumbers(n, length)
    spec = np.fft.rfft(arr)
    out = np.zeros_like(spec)
    out[1:] = spec[1:] / (1j * q[1:])
    out[-1] = 0.0  # Nyquist, as for odd-order derivatives
    prim = np.fft.irfft(out, n=n)
    return prim - prim[0]


def dealias_samples(arr: np.ndarray) -> np.ndarray:
    n = arr.size
    spec = np.fft.rfft(arr)
    spec[n // 3 + 1:] = 0.0
    return np.fft.irfft(spec, n=n)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def deriv(f: GridFunction, order: int) -> GridFunction:
    """Spectral derivative of the trigonometric interpolant.

    Exact to round-off for band-limited input.  order = 0 is rejected; the
    identity is not a derivative and asking for it usually indicates a bug
    in the caller.
    """
    if order < 1:
        raise ValueError(f"derivative order must be >= 1, got {order}")
    return f.with_samples(deriv_samples(f.samples, f.domain_length, order))


def integrate(f: GridFunction) -> float:
    """Integral over one period, (L/N) * sum of samples."""
    return integrate_samples(f.samples, f.domain_length)


def mean_residual(f: GridFunction) -> float:
    """|integral| measured against the mean-zero tolerance scale."""
    return abs(integrate(f)) / (1.0 + float(np.abs(f.samples).max()) * f.domain_length)


def antideriv(f: GridFunction) -> GridFunction:
    """The periodic primitive F with F(0) = 0 and F' = f at interpolant level.

    Only mean-zero input has a periodic primitive; input whose mean exceeds
    MEAN_ZERO_TOL (relative to 1 + max|f|*L) raises MeanNotZeroError.
    """
    if mean_residual(f) > MEAN_ZERO_TOL:
        raise MeanNotZeroError(
            f"no periodic primitive: mean residual {mean_residual(f):.3e} "
            f"exceeds {MEAN_ZERO_TOL:.1e}"
        )
    return f.with_samples(antideriv_samples(f.samples, f.domain_length))


def dealias(f: GridFunction) -> GridFunction:
    """Zero all modes with index above N/3 (two-thirds rule).  Idempotent."""
    return f.with_samples(dealias_samples(f.samples))
