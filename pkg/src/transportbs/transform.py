"""The Fredholm backstepping transformation and its inverse.

On coefficients the forward map factors as

    (T alpha)_p = K * phi_p * sum_n (alpha_n / phi_n) / lambda_{p-n},

i.e. divide by the controller (a Fourier multiplier), apply the Toeplitz
matrix with symbol ``1/lambda_k`` (pointwise multiplication by the
elementary exponential profile), multiply back by ``K * phi``.  That factored
path is the production path; summing kernel vectors directly is kept as a
test oracle.

The inverse works on the same window by solving the Toeplitz system (Levinson
recursion plus one step of iterative refinement).  For a state that came out
of the forward map at this window the solve is exact to rounding, which is
what the round-trip and conjugation accuracy contracts require.  A
closed-form inverse-symbol path (``method="symbol"``) is kept for
diagnostics; being a plain truncation of the inverse multiplication
operator, its interior error decays only like 1/bandwidth.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .controller import fourier_coefficients
from .errors import BandwidthError
from .feedback import FeedbackLaw, synthesize_feedback
from .spectral import FourierVector, lambda_modes, sobolev_weights


@dataclass(frozen=True)
class BacksteppingTransform:
    """Forward/inverse transform pair at a fixed working bandwidth.

    ``N_work`` should exceed the bandwidth of the states it will see by the
    stored ``margin`` (default 4x): Toeplitz truncation pollutes the edge
    modes, so accuracy statements hold on the interior.
    """

    lam: float
    m: int
    phi: FourierVector
    law: FeedbackLaw
    N_work: int
    margin: int = 4

    @classmethod
    def build(cls, controller, lam, m, N_state, margin=4):
        """Construct from a controller spec (or a wide coefficient vector)
        sized for states of bandwidth ``N_state``."""
        N_work = margin * N_state
        if isinstance(controller, FourierVector):
            if controller.N < N_work:
                raise BandwidthError(
                    f"controller vector covers {controller.N} modes, "
                    f"need {N_work}; pass the spec or a wider vector"
                )
            phi = controller.truncated(N_work)
            spec = None
        else:
            phi = fourier_coefficients(controller, N_work)
            spec = controller
        law = synthesize_feedback(phi, lam, m, spec=spec)
        return cls(lam=lam, m=m, phi=phi, law=law, N_work=N_work, margin=margin)

    # -- metadata ------------------------------------------------------------

    @property
    def L(self):
        return self.phi.L

    @property
    def K(self):
        return self.law.K

    @property
    def growth_c(self):
        return self.law.certificate.c

    @property
    def growth_C(self):
        return self.law.certificate.C

    @property
    def forward_bound(self):
        """A-priori operator norm bound ``C K sqrt(L) / (c (1 - e^{-lam L}))``."""
        decay = 1.0 - np.exp(-self.lam * self.L)
        return self.growth_C * self.K * np.sqrt(self.L) / (self.growth_c * decay)

    @property
    def inverse_bound(self):
        """A-priori bound ``C (1 - e^{-lam L}) e^{lam L} / (c K sqrt(L))``."""
        decay = 1.0 - np.exp(-self.lam * self.L)
        return (
            self.growth_C
            * decay
            * np.exp(self.lam * self.L)
            / (self.growth_c * self.K * np.sqrt(self.L))
        )

    def interior_modes(self, fraction=0.75):
        """Symmetric mode range regarded as truncation-clean."""
        cut = int(np.floor(fraction * self.N_work))
        return -cut, cut

    # -- kernel family ---------------------------------------------------------

    def kernel(self, n):
        """Kernel vector ``k_{n} = -conj(F_{-n}) * (profile_n convolved with
        the controller)``; coefficient at ``p`` is
        ``-conj(F_{-n}) phi_p / lambda_{n+p}``."""
        scale = -np.conj(self.law.coeff(-n))
        lam_np = lambda_modes(self.lam, n + self.phi.modes, self.L)
        return FourierVector(self.L, self.N_work, scale * self.phi.coeffs / lam_np)

    def _profile_taps(self, half):
        return 1.0 / lambda_modes(self.lam, np.arange(-half, half + 1), self.L)

    # -- forward / inverse -------------------------------------------------------

    def apply(self, alpha):
        """Forward transform, exact on all stored modes for band-limited
        input (every output coefficient is a finite closed-form sum)."""
        Ns = alpha.N
        if Ns > self.N_work:
            raise BandwidthError(
                f"state bandwidth {Ns} exceeds working bandwidth {self.N_work}"
            )
        lo = self.N_work - Ns
        u = alpha.coeffs / self.phi.coeffs[lo : lo + 2 * Ns + 1]
        taps = self._profile_taps(self.N_work + Ns)
        conv = np.convolve(u, taps)
        out = self.K * self.phi.coeffs * conv[2 * Ns : 2 * Ns + 2 * self.N_work + 1]
        return FourierVector(
            self.L,
            self.N_work,
            out,
            real_valued=alpha.real_valued and self.phi.real_valued,
        )

    def apply_by_kernels(self, alpha):
        """Definitional sum over kernel vectors; O(N^2) test oracle."""
        out = FourierVector.zeros(self.L, self.N_work)
        for n, a in zip(alpha.modes, alpha.coeffs):
            out = out + complex(a) * self.kernel(-n)
        return out

    def invert(self, z, method="solve", refine=True):
        """Inverse transform on the working window.

        ``method="solve"`` (production) solves the window's Toeplitz system;
        ``method="symbol"`` applies the truncated closed-form inverse symbol
        ``(1 - e^{-lam L})(e^{lam L} - 1)/(L * lambda_{-k})``.
        """
        if z.N > self.N_work:
            raise BandwidthError(
                f"state bandwidth {z.N} exceeds working bandwidth {self.N_work}"
            )
        Nw = self.N_work
        w = z.padded(Nw).coeffs / (self.K * self.phi.coeffs)
        if method == "solve":
            col = 1.0 / lambda_modes(self.lam, np.arange(0, 2 * Nw + 1), self.L)
            row = 1.0 / lambda_modes(self.lam, -np.arange(0, 2 * Nw + 1), self.L)
            v = scipy.linalg.solve_toeplitz((col, row), w)
            if refine:
                taps = self._profile_taps(2 * Nw)
                resid = w - np.convolve(v, taps)[2 * Nw : 4 * Nw + 1]
                v = v + scipy.linalg.solve_toeplitz((col, row), resid)
        elif method == "symbol":
            nu = (1.0 - np.exp(-self.lam * self.L)) * (
                np.exp(self.lam * self.L) - 1.0
            ) / self.L
            g = nu / (
                self.L
                * lambda_modes(self.lam, -np.arange(-2 * Nw, 2 * Nw + 1), self.L)
            )
            v = np.convolve(w, g)[2 * Nw : 4 * Nw + 1]
        else:
            raise ValueError(f"unknown inverse method {method!r}")
        out = self.phi.coeffs * v
        return FourierVector(
            self.L,
            Nw,
            out,
            real_valued=z.real_valued and self.phi.real_valued,
        )

    # -- kernel as a 2-D object ----------------------------------------------------

    def kernel_matrix(self):
        """Coefficient matrix ``Khat[p, n]`` of ``k(x, y) = sum Khat e_p(x)
        e_n(y)`` over the working window."""
        Nw = self.N_work
        lam_all = lambda_modes(self.lam, np.arange(-2 * Nw, 2 * Nw + 1), self.L)
        idx = np.add.outer(np.arange(2 * Nw + 1), np.arange(2 * Nw + 1))
        f_neg = np.conj(self.law.coeffs[::-1])
        return -f_neg[None, :] * self.phi.coeffs[:, None] / lam_all[idx]

    def kernel_ode_residual(self, P):
        """Max relative residual of the projected kernel transport identity
        ``(2j*pi*p/L + lambda_n) k_{n,p} + conj(F_{-n}) phi_p = 0`` over
        ``|n|, |p| <= P``."""
        if P > self.N_work:
            raise BandwidthError(f"check range {P} exceeds window {self.N_work}")
        modes = np.arange(-P, P + 1)
        lo = self.N_work - P
        sl = slice(lo, lo + 2 * P + 1)
        phi_p = self.phi.coeffs[sl]
        f_neg = np.conj(self.law.coeffs[sl][::-1])
        lam_np = lambda_modes(
            self.lam, np.add.outer(modes, modes), self.L
        )
        kmat = -f_neg[None, :] * phi_p[:, None] / lam_np
        mult = 2j * np.pi * modes / self.L
        resid = (mult[:, None] + lambda_modes(self.lam, modes, self.L)[None, :]) * kmat
        resid = resid + phi_p[:, None] * f_neg[None, :]
        scale = np.max(np.abs(phi_p[:, None] * f_neg[None, :]))
        return float(np.max(np.abs(resid)) / scale)

    def kernel_grid(self, Mx, My):
        """Sample ``k(x, y)`` on a uniform ``Mx x My`` grid over ``[0, L)^2``."""
        khat = self.kernel_matrix()
        x = np.linspace(0.0, self.L, Mx, endpoint=False)
        y = np.linspace(0.0, self.L, My, endpoint=False)
        modes = self.phi.modes
        ex = np.exp(2j * np.pi * np.outer(x, modes) / self.L) / np.sqrt(self.L)
        ey = np.exp(2j * np.pi * np.outer(y, modes) / self.L) / np.sqrt(self.L)
        return ex @ khat @ ey.T

    # -- empirical operator norms ------------------------------------------------

    def weighted_matrix(self, s=None):
        """Matrix of the forward map in the orthonormal basis of the order-s
        periodic Sobolev space, over the working window."""
        s = self.m if s is None else s
        Nw = self.N_work
        if 2 * Nw + 1 > 4200:
            raise ValueError(
                "dense norm matrix over this window would be too large; "
                "build the transform with a smaller working bandwidth"
            )
        lam_all = lambda_modes(self.lam, np.arange(-2 * Nw, 2 * Nw + 1), self.L)
        idx = np.subtract.outer(np.arange(2 * Nw + 1), np.arange(2 * Nw + 1))
        toe = 1.0 / lam_all[idx + 2 * Nw]
        w = np.sqrt(sobolev_weights(self.L, self.phi.modes, s))
        left = self.K * self.phi.coeffs * w
        right = 1.0 / (self.phi.coeffs * w)
        return left[:, None] * toe * right[None, :]

    def norm_estimates(self, s=None):
        """Empirical operator norms ``(forward, inverse)`` on the window via
        the extreme singular values of the weighted matrix."""
        sv = np.linalg.svd(self.weighted_matrix(s), compute_uv=False)
        return float(sv[0]), float(1.0 / sv[-1])
