"""Exact arithmetic on truncated Fourier series over a period ``[0, L]``.

Conventions
-----------
A function is represented by its coefficients in the orthonormal basis

    e_n(x) = L**-0.5 * exp(2j*pi*n*x/L),   n = -N..N,

stored in a single complex array indexed ``i = n + N``.  Everything in this
module is pure coefficient arithmetic: products of functions never happen on
grids, derivatives are multipliers, and point evaluation means the symmetric
partial sum (which at a jump converges to the mean of the one-sided limits).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BandwidthError, PeriodMismatchError

# Relative tolerance used throughout for identities that hold exactly in
# infinite precision.
DEFAULT_RTOL = 1e-10


def sobolev_weights(L, modes, s):
    """Squared-norm weights ``1 + |2*pi*n/L|**(2s)`` for the given modes.

    For ``s == 0`` the weight is identically 1 so that the order-0 norm is
    the plain L2 norm.
    """
    modes = np.asarray(modes)
    if s == 0:
        return np.ones(modes.shape)
    return 1.0 + np.abs(2.0 * np.pi * modes / L) ** (2.0 * s)


def lambda_modes(lam, modes, L):
    """Shifted mode frequencies ``lam + 2j*pi*n/L``.

    These are the decay rates of the elementary exponential profiles; their
    real part is ``lam`` for every mode, so the returned values never vanish
    for ``lam > 0``.
    """
    if lam <= 0:
        raise ValueError(f"decay parameter must be positive, got {lam}")
    return lam + 2j * np.pi * np.asarray(modes) / L


@dataclass(frozen=True)
class FourierVector:
    """Truncated two-sided coefficient vector of a function on ``[0, L]``.

    Parameters
    ----------
    L : float
        Period length, positive.
    N : int
        Truncation order; coefficients cover modes ``-N..N``.
    coeffs : ndarray
        Complex array of length ``2*N + 1``; entry ``i`` is the coefficient
        of mode ``i - N``.
    real_valued : bool
        Declared (not inferred) flag; when set, conjugate symmetry
        ``c[-n] == conj(c[n])`` is verified at construction.
    """

    L: float
    N: int
    coeffs: np.ndarray = field(repr=False)
    real_valued: bool = False

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError(f"period must be positive, got {self.L}")
        if self.N < 0:
            raise ValueError(f"truncation order must be >= 0, got {self.N}")
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (2 * self.N + 1,):
            raise ValueError(
                f"expected {2 * self.N + 1} coefficients, got shape {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        if self.real_valued:
            scale = max(np.max(np.abs(c)), 1.0)
            if self.conjugate_defect() > 1e-10 * scale:
                raise ValueError(
                    "coefficients declared real-valued but are not "
                    "conjugate-symmetric"
                )

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, L, N, real_valued=False):
        return cls(L, N, np.zeros(2 * N + 1, dtype=complex), real_valued)

    @classmethod
    def basis(cls, L, N, n, amplitude=1.0):
        """The single-mode vector ``amplitude * e_n``."""
        if abs(n) > N:
            raise BandwidthError(f"mode {n} outside truncation {N}")
        c = np.zeros(2 * N + 1, dtype=complex)
        c[n + N] = amplitude
        return cls(L, N, c, real_valued=(n == 0 and np.isreal(amplitude)))

    # -- accessors ---------------------------------------------------------

    @property
    def modes(self):
        return np.arange(-self.N, self.N + 1)

    def coeff(self, n):
        if abs(n) > self.N:
            return 0.0 + 0.0j
        return complex(self.coeffs[n + self.N])

    def conjugate_defect(self):
        """Max deviation from the conjugate symmetry of a real function."""
        return float(np.max(np.abs(self.coeffs[::-1] - np.conj(self.coeffs))))

    # -- resizing ----------------------------------------------------------

    def padded(self, N_new):
        """Zero-padded copy at a (weakly) larger truncation order."""
        if N_new < self.N:
            raise ValueError("padding target smaller than current order")
        c = np.zeros(2 * N_new + 1, dtype=complex)
        c[N_new - self.N : N_new + self.N + 1] = self.coeffs
        return FourierVector(self.L, N_new, c, self.real_valued)

    def truncated(self, N_new):
        """Copy restricted to modes ``-N_new..N_new``."""
        if N_new >= self.N:
            return self.padded(N_new)
        lo = self.N - N_new
        return FourierVector(
            self.L, N_new, self.coeffs[lo : lo + 2 * N_new + 1], self.real_valued
        )

    # -- small algebra (used for projections and test states) ---------------

    def __add__(self, other):
        _check_periods(self, other)
        N = max(self.N, other.N)
        a, b = self.padded(N), other.padded(N)
        return FourierVector(
            self.L, N, a.coeffs + b.coeffs, self.real_valued and other.real_valued
        )

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        return FourierVector(
            self.L,
            self.N,
            self.coeffs * scalar,
            self.real_valued and bool(np.isreal(scalar)),
        )

    __rmul__ = __mul__


def _check_periods(f, g):
    if abs(f.L - g.L) > 1e-12 * max(f.L, g.L):
        raise PeriodMismatchError(f"periods differ: {f.L} vs {g.L}")


def convolve(f, g):
    """Periodic convolution, i.e. the coefficientwise product ``f_n * g_n``.

    The result is truncated to ``min(f.N, g.N)``; widening, when wanted, is
    the caller's job via :meth:`FourierVector.padded`.
    """
    _check_periods(f, g)
    N = min(f.N, g.N)
    a = f.truncated(N).coeffs * g.truncated(N).coeffs
    return FourierVector(f.L, N, a, f.real_valued and g.real_valued)


def sobolev_norm(f, s):
    """Periodic Sobolev norm of order ``s >= 0`` of the truncated series."""
    if s < 0:
        raise ValueError(f"order must be non-negative, got {s}")
    w = sobolev_weights(f.L, f.modes, s)
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


def derivative(f, order=1):
    """Coefficientwise derivative: multiplier ``(2j*pi*n/L)**order``."""
    if order < 0:
        raise ValueError(f"order must be non-negative, got {order}")
    mult = (2j * np.pi * f.modes / f.L) ** order
    return FourierVector(f.L, f.N, mult * f.coeffs, f.real_valued)


def lambda_profile(lam, n, L, N):
    """Truncated coefficient vector of the elementary exponential profile.

    The underlying function is ``sqrt(L)/(1 - exp(-lam*L)) * exp(-(lam +
    2j*pi*n/L) * x)`` on ``[0, L)``; its coefficient at mode ``p`` is exactly
    ``1 / (lam + 2j*pi*(n+p)/L)``, which is what gets stored.  Sampling the
    truncation converges to the exponential away from the jump at ``x = 0``.
    """
    p = np.arange(-N, N + 1)
    c = 1.0 / lambda_modes(lam, n + p, L)
    return FourierVector(L, N, c, real_valued=(n == 0))


def eval_at(f, x):
    """Symmetric partial sum ``sum_{|n|<=N} f_n e_n(x)``.

    At a jump of the underlying function this approximates the mean of the
    one-sided limits (Dirichlet mean); one-sided traces are never produced
    here.
    """
    x = np.asarray(x, dtype=float)
    phase = np.exp((2j * np.pi / f.L) * np.outer(f.modes, x))
    out = (f.coeffs @ phase) / np.sqrt(f.L)
    return complex(out) if out.ndim == 0 or out.size == 1 else out


def sample_values(f, M):
    """Values of the truncated series on the uniform grid ``x_j = j*L/M``.

    Requires ``M >= 2*N + 1``; uses an inverse FFT, so this is exact for the
    truncated series (up to rounding).
    """
    if M < 2 * f.N + 1:
        raise ValueError(f"grid of {M} points cannot hold {2 * f.N + 1} modes")
    spectrum = np.zeros(M, dtype=complex)
    spectrum[f.modes % M] = f.coeffs
    return np.fft.ifft(spectrum) * (M / np.sqrt(f.L))
