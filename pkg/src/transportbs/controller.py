"""Controller ingestion: exact Fourier coefficients, growth certification,
jump coefficients and the exponential gauge transform.

A controller is one of three spec variants:

* :class:`PiecewisePoly` -- one polynomial per breakpoint interval;
  coefficients are computed in closed form (repeated integration by parts),
  no quadrature.
* :class:`SpectralProfile` -- a named rule ``n -> phi_n``.
* :class:`RawCoefficients` -- a coefficient vector passed through as-is.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicSpline

from .errors import ControllabilityError, DegenerateJumpsError
from .spectral import FourierVector, eval_at, sobolev_weights

_ZERO_COEFF_RTOL = 1e-14


@dataclass(frozen=True)
class PiecewisePoly:
    """Piecewise polynomial on ``[0, L]``.

    ``breakpoints`` is the full partition ``0 = s_0 < s_1 < ... < s_{d+1} = L``
    and ``pieces`` holds one ascending-order coefficient tuple per interval.
    """

    L: float
    breakpoints: tuple
    pieces: tuple
    real_valued: bool = True

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp[0] != 0.0 or abs(bp[-1] - self.L) > 1e-12 * self.L:
            raise ValueError("breakpoints must run from 0 to L")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if len(self.pieces) != len(bp) - 1:
            raise ValueError("need exactly one polynomial per interval")
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in bp))
        object.__setattr__(
            self, "pieces", tuple(tuple(float(c) for c in p) for p in self.pieces)
        )

    def polynomials(self):
        return [Polynomial(p) for p in self.pieces]

    def differentiated(self, order):
        """The piecewise polynomial ``d^order(phi)`` (per piece)."""
        polys = [p.deriv(order) if order > 0 else p for p in self.polynomials()]
        return PiecewisePoly(
            self.L,
            self.breakpoints,
            tuple(tuple(p.coef) for p in polys),
            self.real_valued,
        )

    def one_sided_values(self, order):
        """Traces of ``d^order(phi)``: value at 0+, at L-, and the pair
        (left, right) at every interior breakpoint."""
        polys = [p.deriv(order) if order > 0 else p for p in self.polynomials()]
        bp = self.breakpoints
        at_zero = polys[0](bp[0])
        at_L = polys[-1](bp[-1])
        interior = [
            (polys[j - 1](bp[j]), polys[j](bp[j])) for j in range(1, len(bp) - 1)
        ]
        return at_zero, at_L, interior


@dataclass(frozen=True)
class SpectralProfile:
    """Closed-form coefficient rule.  Supported rules:

    * ``"critical"``: ``phi_n = amplitude / sqrt(1 + |2 pi n / L|**(2*order))``,
      the profile whose growth constants coincide.
    """

    L: float
    rule: str
    params: dict
    real_valued: bool = True

    def coefficients(self, modes):
        modes = np.asarray(modes)
        if self.rule == "critical":
            amp = float(self.params["amplitude"])
            order = int(self.params["order"])
            return amp / np.sqrt(sobolev_weights(self.L, modes, order)) + 0j
        raise ValueError(f"unknown spectral profile rule {self.rule!r}")


@dataclass(frozen=True)
class RawCoefficients:
    """Coefficients supplied directly; no analytic tail information."""

    vector: FourierVector

    @property
    def L(self):
        return self.vector.L

    @property
    def real_valued(self):
        return self.vector.real_valued


def _poly_oscillatory_integrals(poly, a, b, omega):
    """Exact ``int_a^b poly(x) exp(-i w x) dx`` for every frequency in
    ``omega`` (all nonzero), by repeated integration by parts."""
    omega = np.asarray(omega, dtype=float)
    deriv_a = []
    deriv_b = []
    p = poly
    for _ in range(poly.degree() + 1):
        deriv_a.append(p(a))
        deriv_b.append(p(b))
        p = p.deriv()
    inv = 1.0 / (-1j * omega)
    s_a = np.zeros_like(omega, dtype=complex)
    s_b = np.zeros_like(omega, dtype=complex)
    power = inv.copy()
    for k, (da, db) in enumerate(zip(deriv_a, deriv_b)):
        sign = (-1.0) ** k
        s_a += sign * da * power
        s_b += sign * db * power
        power = power * inv
    return np.exp(-1j * omega * b) * s_b - np.exp(-1j * omega * a) * s_a


def fourier_coefficients(spec, N):
    """Coefficient vector of a controller spec, truncated at order ``N``.

    Piecewise polynomials are integrated in closed form (exact to rounding);
    spectral profiles evaluate their rule; raw coefficients pass through
    (zero-padded or truncated to ``N``).
    """
    if isinstance(spec, RawCoefficients):
        return spec.vector.truncated(N)
    modes = np.arange(-N, N + 1)
    if isinstance(spec, SpectralProfile):
        return FourierVector(spec.L, N, spec.coefficients(modes), spec.real_valued)
    if not isinstance(spec, PiecewisePoly):
        raise TypeError(f"unsupported controller spec {type(spec).__name__}")

    L = spec.L
    nz = modes[modes != 0]
    omega = 2.0 * np.pi * nz / L
    coeffs = np.zeros(2 * N + 1, dtype=complex)
    bp = spec.breakpoints
    for j, poly in enumerate(spec.polynomials()):
        a, b = bp[j], bp[j + 1]
        coeffs[nz + N] += _poly_oscillatory_integrals(poly, a, b, omega)
        anti = poly.integ()
        coeffs[N] += anti(b) - anti(a)
    coeffs /= np.sqrt(L)
    return FourierVector(L, N, coeffs, spec.real_valued)


@dataclass(frozen=True)
class GrowthCertificate:
    """Optimal constants of the two-sided coefficient growth condition.

    ``c <= |phi_n| * sqrt(1 + |2 pi n/L|**(2m)) <= C`` holds with equality at
    modes ``n_min`` and ``n_max`` over the checked range ``|n| <= N_checked``.
    ``tail`` records whether anything is known beyond that range.
    """

    m: int
    c: float
    C: float
    n_min: int
    n_max: int
    N_checked: int
    tail: str = "finite-range"
    tail_bounds: tuple = None
    assumptions: tuple = ()

    def as_dict(self):
        return {
            "m": self.m,
            "c": self.c,
            "C": self.C,
            "attained_min_mode": self.n_min,
            "attained_max_mode": self.n_max,
            "N_checked": self.N_checked,
            "tail": self.tail,
            "tail_bounds": list(self.tail_bounds) if self.tail_bounds else None,
            "assumptions": list(self.assumptions),
        }


def growth_certificate(phi, m, spec=None):
    """Certify the order-``m`` growth condition on a coefficient vector.

    Raises :class:`ControllabilityError` naming the first vanishing mode.
    When the originating ``spec`` is supplied, analytic tail information is
    attached (jump moduli for piecewise polynomials, the rule limit for
    spectral profiles); raw coefficients get a finite-range certificate only.
    """
    if m < 1:
        raise ValueError(f"order must be >= 1, got {m}")
    mags = np.abs(phi.coeffs)
    scale = float(np.max(mags))
    dead = np.flatnonzero(mags <= _ZERO_COEFF_RTOL * scale)
    if dead.size:
        modes_dead = dead - phi.N
        worst = int(modes_dead[np.argmin(np.abs(modes_dead))])
        raise ControllabilityError(
            f"controller coefficient vanishes at mode {worst}", mode=worst
        )
    values = mags * np.sqrt(sobolev_weights(phi.L, phi.modes, m))
    i_min, i_max = int(np.argmin(values)), int(np.argmax(values))

    tail, tail_bounds, assumptions = "finite-range", None, ()
    if isinstance(spec, PiecewisePoly):
        try:
            tau = jump_coefficients(spec, m, min(phi.N, 512))
            tail, tail_bounds = "analytic", (tau.C1, tau.C2)
        except DegenerateJumpsError:
            assumptions = ("no order-m jumps: growth condition fails in the tail",)
    elif isinstance(spec, SpectralProfile):
        far = spec.coefficients(np.array([10**6, 10**7]))
        lim = np.abs(far) * np.sqrt(
            sobolev_weights(spec.L, np.array([10**6, 10**7]), m)
        )
        tail, tail_bounds = "analytic", (float(lim.min()), float(lim.max()))
    elif isinstance(spec, RawCoefficients) or spec is None:
        assumptions = (
            "piecewise order-m regularity not verifiable from finitely many "
            "coefficients; certificate is finite-range only",
        )
    return GrowthCertificate(
        m=m,
        c=float(values[i_min]),
        C=float(values[i_max]),
        n_min=int(i_min - phi.N),
        n_max=int(i_max - phi.N),
        N_checked=phi.N,
        tail=tail,
        tail_bounds=tail_bounds,
        assumptions=assumptions,
    )


@dataclass(frozen=True)
class JumpCoefficients:
    """Jump functional of order ``m``: translation-weighted sums of the
    one-sided jumps of the (m-1)-th derivative, plus the square-summable
    remainder linking them to the coefficient tail."""

    m: int
    L: float
    N: int
    values: np.ndarray
    C1: float
    C2: float
    remainder: np.ndarray

    def value(self, n):
        if abs(n) > self.N:
            raise ValueError(f"mode {n} outside stored range {self.N}")
        return complex(self.values[n + self.N])


def jump_coefficients(spec, m, N):
    """Assemble the order-``m`` jump coefficients of a piecewise polynomial.

    Also returns the remainder sequence (the coefficients of the interior
    m-th derivative), so callers can verify that
    ``phi_n + tau_n / (2j*pi*n/L)**m`` decays square-summably faster than
    ``|n|**-m``.
    """
    if not isinstance(spec, PiecewisePoly):
        raise TypeError("jump coefficients require a piecewise polynomial spec")
    at_zero, at_L, interior = spec.one_sided_values(m - 1)
    endpoint = at_L - at_zero
    interior_jumps = np.array([left - right for left, right in interior])
    sigma = np.asarray(spec.breakpoints[1:-1])
    all_jumps = np.concatenate(([endpoint], interior_jumps))
    scale = max(np.max(np.abs(all_jumps)), 1e-300)
    if np.all(np.abs(all_jumps) <= 1e-12 * max(1.0, scale)) or scale <= 1e-300:
        raise DegenerateJumpsError(
            f"derivative of order {m - 1} is continuous and periodic: "
            "all jumps vanish"
        )
    modes = np.arange(-N, N + 1)
    phases = np.exp(-2j * np.pi * np.outer(modes, sigma) / spec.L)
    values = (endpoint + phases @ interior_jumps) / np.sqrt(spec.L)
    remainder = fourier_coefficients(spec.differentiated(m), N).coeffs
    mags = np.abs(values)
    return JumpCoefficients(
        m=m,
        L=spec.L,
        N=N,
        values=values,
        C1=float(mags.min()),
        C2=float(mags.max()),
        remainder=remainder,
    )


def _potential_antiderivative(a, L, antiderivative=None):
    """Return callables ``(a_eval, A)`` with ``A' = a`` and ``A(0) = 0``."""
    if isinstance(a, Polynomial):
        A = a.integ()
        return a, lambda x: A(x) - A(0.0)
    if isinstance(a, np.ndarray) or (
        not callable(a) and np.iterable(a)
    ):
        samples = np.asarray(a, dtype=float)
        if not np.all(np.isfinite(samples)):
            raise ValueError("potential samples must be finite")
        grid = np.linspace(0.0, L, samples.size)
        spline = CubicSpline(grid, samples)
        A = spline.antiderivative()
        return spline, lambda x: A(x) - A(0.0)
    if callable(a):
        if antiderivative is not None:
            A0 = antiderivative(0.0)
            return a, lambda x: antiderivative(x) - A0
        grid = np.linspace(0.0, L, 8193)
        samples = np.asarray(a(grid), dtype=float)
        if not np.all(np.isfinite(samples)):
            raise ValueError("potential samples must be finite")
        spline = CubicSpline(grid, samples)
        A = spline.antiderivative()
        return spline, lambda x: A(x) - A(0.0)
    raise TypeError(f"unsupported potential description {type(a).__name__}")


def gauge_transform(a, spec, N, oversample=8, antiderivative=None):
    """Remove a zero-order potential by the exponential change of variables.

    Returns ``(mu, phi)`` where ``mu`` is the integral of ``a`` over one
    period and ``phi`` has the coefficients of
    ``exp(int_0^x a(s) ds - mu*x) * phi_tilde(x)``, computed by composite
    Gauss-Legendre quadrature on a grid oversampled by ``oversample`` times
    the target bandwidth.  ``a = None`` is the identity gauge.
    """
    if a is None:
        return 0.0, fourier_coefficients(spec, N)
    L = spec.L
    a_eval, A = _potential_antiderivative(a, L, antiderivative)
    mu = float(A(L))

    if isinstance(spec, PiecewisePoly):
        segments = [
            (spec.breakpoints[j], spec.breakpoints[j + 1], poly)
            for j, poly in enumerate(spec.polynomials())
        ]
    else:
        base = fourier_coefficients(spec, N)
        segments = [(0.0, L, lambda x, v=base: eval_at(v, x))]

    q_nodes, q_weights = np.polynomial.legendre.leggauss(12)
    xs, ws, vals = [], [], []
    for lo, hi, func in segments:
        panels = max(2, int(np.ceil(oversample * N * (hi - lo) / L)))
        edges = np.linspace(lo, hi, panels + 1)
        half = np.diff(edges) / 2.0
        mid = (edges[:-1] + edges[1:]) / 2.0
        x = (mid[:, None] + half[:, None] * q_nodes[None, :]).ravel()
        w = (half[:, None] * q_weights[None, :]).ravel()
        xs.append(x)
        ws.append(w)
        vals.append(np.asarray(func(x)))
    x = np.concatenate(xs)
    w = np.concatenate(ws)
    v = np.concatenate(vals) * np.exp(A(x) - mu * x)
    if not np.all(np.isfinite(v)):
        raise ValueError("gauge weight produced non-finite values")

    modes = np.arange(-N, N + 1)
    coeffs = np.zeros(2 * N + 1, dtype=complex)
    weighted = w * v
    block = max(1, int(2e6 // max(x.size, 1)))
    for start in range(0, modes.size, block):
        blk = modes[start : start + block]
        phase = np.exp(-2j * np.pi * np.outer(blk, x) / L)
        coeffs[start : start + blk.size] = phase @ weighted
    coeffs /= np.sqrt(L)
    real = getattr(spec, "real_valued", False)
    return mu, FourierVector(L, N, coeffs, real)
