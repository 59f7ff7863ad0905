"""Synthesis and evaluation of the stabilizing scalar feedback law.

The law is determined by the controller coefficients and the requested decay
shift: ``F_n = -K(lam) / conj(phi_n)`` with the scalar gain
``K(lam) = (2/L) * (1 - exp(-lam*L)) / (1 + exp(-lam*L))``.  The coefficients
grow like ``|n|**m``, so the law is an unbounded linear form; it splits into
a bounded part plus a boundary-trace part driven by the jump coefficients.
"""

from dataclasses import dataclass

import numpy as np

from .controller import growth_certificate
from .errors import BandwidthError, DegenerateJumpsError
from .spectral import (
    FourierVector,
    derivative,
    eval_at,
    sobolev_norm,
    sobolev_weights,
)


def gain(lam, L):
    """Scalar gain ``(2/L)(1 - e^{-lam L})/(1 + e^{-lam L})``.

    Strictly increasing in ``lam`` with range ``(0, 2/L)``; this is the
    normalization that makes the weak transform-fixes-controller limit come
    out to exactly 1.
    """
    if lam <= 0 or L <= 0:
        raise ValueError(f"gain needs lam > 0 and L > 0, got lam={lam}, L={L}")
    e = np.exp(-lam * L)
    return float(2.0 / L * (1.0 - e) / (1.0 + e))


@dataclass(frozen=True)
class FeedbackLaw:
    """Feedback coefficients ``F_n`` for ``|n| <= N`` plus their metadata.

    ``certificate`` is the growth certificate of the controller the law was
    synthesized from; it fixes the two-sided ``m``-growth constants of the
    law itself (``K/C`` and ``K/c``).
    """

    lam: float
    L: float
    m: int
    K: float
    coeffs: np.ndarray
    certificate: object = None

    @property
    def N(self):
        return (len(self.coeffs) - 1) // 2

    @property
    def modes(self):
        return np.arange(-self.N, self.N + 1)

    def coeff(self, n):
        if abs(n) > self.N:
            raise BandwidthError(f"mode {n} outside synthesized range {self.N}")
        return complex(self.coeffs[n + self.N])

    def controller_coeffs(self, N=None):
        """Recover the controller coefficients ``phi_n = -K / conj(F_n)``."""
        N = self.N if N is None else N
        if N > self.N:
            raise BandwidthError(f"law only stores modes up to {self.N}")
        lo = self.N - N
        return FourierVector(
            self.L,
            N,
            -self.K / np.conj(self.coeffs[lo : lo + 2 * N + 1]),
            real_valued=True,
        )


def synthesize_feedback(phi, lam, m, spec=None):
    """Build the feedback law for a controller coefficient vector.

    The growth certificate is computed first; a vanishing coefficient
    surfaces as :class:`ControllabilityError` before any coefficient of the
    law exists.
    """
    cert = growth_certificate(phi, m, spec=spec)
    K = gain(lam, phi.L)
    coeffs = -K / np.conj(phi.coeffs)
    return FeedbackLaw(
        lam=lam, L=phi.L, m=m, K=K, coeffs=coeffs, certificate=cert
    )


def evaluate_feedback(alpha, law):
    """Truncated pairing ``sum_{|n| <= alpha.N} conj(F_n) alpha_n``.

    The sum runs at the state's own bandwidth; no extrapolation is attempted
    (for rough states the full series would diverge).  The result is real up
    to rounding when state and controller are real-valued.
    """
    if alpha.N > law.N:
        raise BandwidthError(
            f"state bandwidth {alpha.N} exceeds law range {law.N}"
        )
    lo = law.N - alpha.N
    return complex(
        np.conj(law.coeffs[lo : lo + 2 * alpha.N + 1]) @ alpha.coeffs
    )


@dataclass(frozen=True)
class FeedbackSplit:
    """Decomposition ``F = regular + h`` where ``h`` carries the full
    ``|n|**m`` growth through the jump coefficients and the regular part has
    coefficients smaller by a square-summable factor."""

    law: FeedbackLaw
    tau: object
    regular: np.ndarray

    @property
    def N(self):
        return (len(self.regular) - 1) // 2

    def singular_coeffs(self, modes=None):
        """``h_n = (-1)**m * (K / tau_{-n}) * (2j*pi*n/L)**m``."""
        law = self.law
        modes = self.law.modes if modes is None else np.asarray(modes)
        tau_neg = self.tau.values[-modes + self.tau.N]
        return (
            (-1.0) ** law.m
            * (law.K / tau_neg)
            * (2j * np.pi * modes / law.L) ** law.m
        )

    def tail_profile(self):
        """Dyadic partial sums of ``|regular_n / (2j*pi*n/L)**m|**2``.

        Square-summability shows up as (roughly) geometrically decreasing
        block sums; block boundaries are powers of two.
        """
        N = self.N
        modes = np.arange(-N, N + 1)
        weights = np.zeros(2 * N + 1)
        nz = modes != 0
        weights[nz] = np.abs(
            self.regular[nz] / (2j * np.pi * modes[nz] / self.law.L) ** self.law.m
        ) ** 2
        blocks = []
        k = 1
        while 2**k <= N:
            lo, hi = 2 ** (k - 1), min(2**k - 1, N)
            mask = (np.abs(modes) >= lo) & (np.abs(modes) <= hi)
            blocks.append((lo, hi, float(weights[mask].sum())))
            k += 1
        return blocks


def split_feedback(law, tau):
    """Split a law into regular and singular parts using jump coefficients.

    ``tau`` must come from the same controller at the same order ``m``.
    """
    if tau.m != law.m:
        raise ValueError(f"jump order {tau.m} does not match law order {law.m}")
    if tau.N < law.N:
        raise BandwidthError("jump coefficients cover fewer modes than the law")
    if tau.C2 == 0.0:
        raise DegenerateJumpsError("jump coefficients are identically zero")
    tau_neg = tau.values[-law.modes + tau.N]
    h = (
        (-1.0) ** law.m
        * (law.K / tau_neg)
        * (2j * np.pi * law.modes / law.L) ** law.m
    )
    return FeedbackSplit(law=law, tau=tau, regular=law.coeffs - h)


def regular_part(alpha, split):
    """Pairing of a state with the bounded part of the law."""
    if alpha.N > split.N:
        raise BandwidthError("state exceeds split range")
    lo = split.N - alpha.N
    return complex(
        np.conj(split.regular[lo : lo + 2 * alpha.N + 1]) @ alpha.coeffs
    )


def singular_part(alpha, split):
    """Boundary-trace form of the singular part.

    Evaluates ``sqrt(L) * K/2 * (d^m((tau^-1) alpha)(0) + d^m(...)(L))`` with
    symmetric partial-sum traces; on band-limited states this equals the
    finite coefficient sum ``sum alpha_n conj(h_n)`` exactly.
    """
    law = split.law
    if alpha.N > split.tau.N:
        raise BandwidthError("state exceeds jump-coefficient range")
    tau_vals = split.tau.values[alpha.modes + split.tau.N]
    beta = FourierVector(alpha.L, alpha.N, alpha.coeffs / tau_vals)
    trace = derivative(beta, law.m)
    return complex(
        np.sqrt(law.L)
        * 0.5
        * law.K
        * (eval_at(trace, 0.0) + eval_at(trace, law.L))
    )


@dataclass(frozen=True)
class ProbeResult:
    """Tail-vector ratios used to witness (un)boundedness of the law."""

    sigma: float
    s: float
    Ns: tuple
    ratios: tuple
    slope: float
    fit_count: int
    bandwidth: int


def tail_ratio_probe(law, sigma, s, N_list, bandwidth_factor=16):
    """Ratios ``|<gamma^(N), F>| / ||gamma^(N)||_{m+sigma}`` for tail vectors
    ``gamma^(N) = sum_{|n| >= N} e_n / (conj(F_n) (1 + |n|**(1+s)))``.

    Below the continuity threshold (``sigma < 1/2``) the ratios grow like
    ``N**(1/2 - sigma)``; at ``sigma = s > 1/2`` they stay bounded.  Vectors
    are truncated at ``bandwidth_factor`` times the largest requested ``N``;
    the log-log slope is fitted with the two largest ``N`` discarded to keep
    truncation bias out of the fit.
    """
    if s <= 0.5:
        raise ValueError(f"tail exponent must satisfy s > 1/2, got {s}")
    if law.m + sigma < 0:
        raise ValueError(f"sigma must be >= -m, got {sigma}")
    N_list = sorted(int(N) for N in N_list)
    B = bandwidth_factor * N_list[-1]
    if B > law.N:
        raise BandwidthError(
            f"probe needs the law out to mode {B}, have {law.N}"
        )
    modes = law.modes
    absn = np.abs(modes)
    gamma_full = np.zeros(2 * law.N + 1, dtype=complex)
    inside = absn <= B
    gamma_full[inside] = 1.0 / (
        np.conj(law.coeffs[inside]) * (1.0 + absn[inside] ** (1.0 + s))
    )
    ratios = []
    for N in N_list:
        g = np.where(absn >= N, gamma_full, 0.0)
        vec = FourierVector(law.L, law.N, g)
        pairing = np.conj(law.coeffs) @ g
        ratios.append(float(np.abs(pairing)) / sobolev_norm(vec, law.m + sigma))
    fit_count = len(N_list) - 2 if len(N_list) > 3 else len(N_list)
    slope = float(
        np.polyfit(np.log(N_list[:fit_count]), np.log(ratios[:fit_count]), 1)[0]
    )
    return ProbeResult(
        sigma=sigma,
        s=s,
        Ns=tuple(N_list),
        ratios=tuple(ratios),
        slope=slope,
        fit_count=fit_count,
        bandwidth=B,
    )


def project_to_kernel(alpha, law):
    """Project a state onto the hyperplane ``<alpha, F> = 0`` by adjusting
    its mean component."""
    value = evaluate_feedback(alpha, law)
    direction = FourierVector.basis(alpha.L, alpha.N, 0, np.sqrt(alpha.L))
    denom = evaluate_feedback(direction, law)
    r = value / denom
    if alpha.real_valued and abs(r.imag) <= 1e-12 * (abs(r) + 1.0):
        r = r.real
    return alpha - r * direction
