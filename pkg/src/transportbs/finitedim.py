"""Finite-dimensional mirror of the backstepping construction.

For a controllable pair ``(A, B)`` and a controllable target ``(Atilde, B)``
there is a unique ``(T, K)`` with ``T A + B K = Atilde T`` and ``T B = B``;
the closed loop ``A + B K`` is then similar to ``Atilde`` through ``T``.
This module solves that system two ways (an eigenbasis construction and a
dense stacked solve) and cross-checks the infinite-horizon Gramian feedback
against the same conjugation identity.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ControllabilityError

_MAX_DIM = 50


def controllability_matrix(A, B):
    n = A.shape[0]
    cols = [B]
    for _ in range(n - 1):
        cols.append(A @ cols[-1])
    return np.hstack(cols)


def is_controllable(A, B):
    return np.linalg.matrix_rank(controllability_matrix(A, B)) == A.shape[0]


@dataclass(frozen=True)
class FiniteSystem:
    """Plant matrix ``A``, input column ``B`` and target matrix ``Atilde``."""

    A: np.ndarray
    B: np.ndarray
    Atilde: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        At = np.atleast_2d(np.asarray(self.Atilde, dtype=complex))
        B = np.asarray(self.B, dtype=complex).reshape(A.shape[0], 1)
        if A.shape[0] != A.shape[1] or A.shape != At.shape:
            raise ValueError("A and Atilde must be square and equally sized")
        if A.shape[0] > _MAX_DIM:
            raise ValueError(f"dimension capped at {_MAX_DIM}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "Atilde", At)
        if not is_controllable(A, B):
            raise ControllabilityError("(A, B) fails the Kalman rank test")
        if not is_controllable(At, B):
            raise ControllabilityError("(Atilde, B) fails the Kalman rank test")

    @property
    def n(self):
        return self.A.shape[0]


@dataclass(frozen=True)
class BacksteppingSolution:
    T: np.ndarray
    K: np.ndarray
    method: str
    residual_op: float
    residual_b: float
    cond_T: float
    spectrum_defect: float


def _spectrum_defect(A_closed, Atilde):
    """Worst matched distance between the two spectra."""
    ev_c = np.linalg.eigvals(A_closed)
    ev_t = np.linalg.eigvals(Atilde)
    cost = np.abs(ev_c[:, None] - ev_t[None, :])
    from scipy.optimize import linear_sum_assignment

    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def _solve_spectral(sys):
    evals, E = np.linalg.eig(sys.A)
    ev_t = np.linalg.eigvals(sys.Atilde)
    gap = np.min(np.abs(evals[:, None] - ev_t[None, :]))
    if gap < 1e-8 * max(1.0, np.max(np.abs(evals))):
        raise ValueError("shared eigenvalue between plant and target")
    n = sys.n
    F = np.empty((n, n), dtype=complex)
    ident = np.eye(n)
    for i in range(n):
        F[:, i] = np.linalg.solve(sys.Atilde - evals[i] * ident, sys.B).ravel()
    b = np.linalg.solve(E, sys.B).ravel()
    if np.min(np.abs(b)) < 1e-12 * max(1.0, np.max(np.abs(b))):
        raise ControllabilityError("input has no component on an eigenvector")
    kappa = np.linalg.solve(F, sys.B).ravel() / b
    E_inv = np.linalg.inv(E)
    K = kappa @ E_inv
    T = (F * kappa[None, :]) @ E_inv
    return T, K.reshape(1, n)


def _solve_direct(sys):
    n = sys.n
    ident = np.eye(n)
    top = np.hstack(
        [
            np.kron(sys.A.T, ident) - np.kron(ident, sys.Atilde),
            np.kron(ident, sys.B),
        ]
    )
    bottom = np.hstack(
        [np.kron(sys.B.T, ident), np.zeros((n, n), dtype=complex)]
    )
    big = np.vstack([top, bottom])
    rhs = np.concatenate([np.zeros(n * n, dtype=complex), sys.B.ravel()])
    sol = np.linalg.solve(big, rhs)
    T = sol[: n * n].reshape(n, n, order="F")
    K = sol[n * n :].reshape(1, n)
    return T, K


def solve_backstepping(sys, method="auto"):
    """Unique ``(T, K)`` with ``T A + B K = Atilde T`` and ``T B = B``.

    ``method`` is ``"spectral"`` (eigenbasis construction), ``"direct"``
    (stacked dense solve) or ``"auto"``, which tries the spectral path and
    falls back to the direct one on a shared eigenvalue or a defective
    plant.
    """
    used = method
    if method == "spectral":
        T, K = _solve_spectral(sys)
    elif method == "direct":
        T, K = _solve_direct(sys)
    elif method == "auto":
        try:
            T, K = _solve_spectral(sys)
            used = "spectral"
        except (ValueError, np.linalg.LinAlgError):
            T, K = _solve_direct(sys)
            used = "direct"
    else:
        raise ValueError(f"unknown method {method!r}")

    scale = max(np.linalg.norm(sys.A), np.linalg.norm(sys.Atilde), 1.0)
    res_op = np.linalg.norm(
        T @ sys.A + sys.B @ K - sys.Atilde @ T
    ) / (scale * max(np.linalg.norm(T), 1e-300))
    res_b = np.linalg.norm(T @ sys.B - sys.B) / max(
        np.linalg.norm(sys.B), 1e-300
    )
    closed = sys.A + sys.B @ K
    return BacksteppingSolution(
        T=T,
        K=K,
        method=used,
        residual_op=float(res_op),
        residual_b=float(res_b),
        cond_T=float(np.linalg.cond(T)),
        spectrum_defect=_spectrum_defect(closed, sys.Atilde),
    )


def gramian_feedback_check(A, B, omega, panels=64, nodes=10, horizon=None):
    """Infinite-horizon Gramian feedback and its conjugation identity.

    Computes ``C = int_0^inf exp(-2 w t) exp(-tA) B B* exp(-tA*) dt`` by
    composite Gauss-Legendre quadrature (convergence requires
    ``min Re(eig A) + w > 0``), the feedback ``K = -B* C^{-1}``, and reports
    the residuals of the stationarity identity
    ``(A + wI) C + C (A + wI)* = B B*``, of the quadrature against a direct
    Lyapunov solve, and of the similarity
    ``C^{-1} (A + B K) = (-A* - 2 w I) C^{-1}``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    B = np.asarray(B, dtype=complex).reshape(A.shape[0], 1)
    if np.allclose(B, 0):
        raise ControllabilityError("zero input column: Gramian is singular")
    gamma = float(np.min(np.real(np.linalg.eigvals(A)))) + omega
    if gamma <= 0:
        raise ValueError(
            f"integral diverges: min Re(eig A) + omega = {gamma:.3e} <= 0"
        )
    T_h = horizon if horizon is not None else 40.0 / gamma

    q_nodes, q_weights = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(0.0, T_h, panels + 1)
    C = np.zeros_like(A)
    BBs = B @ B.conj().T
    last_panel_norm = None
    for lo, hi in zip(edges[:-1], edges[1:]):
        half, mid = (hi - lo) / 2.0, (hi + lo) / 2.0
        panel = np.zeros_like(A)
        for xi, wi in zip(q_nodes, q_weights):
            t = mid + half * xi
            E = scipy.linalg.expm(-t * A)
            panel += wi * np.exp(-2.0 * omega * t) * (E @ BBs @ E.conj().T)
        panel *= half
        C += panel
        last_panel_norm = np.linalg.norm(panel)
    if last_panel_norm > 1e-10 * np.linalg.norm(C):
        raise ValueError("integrand tail has not decayed: divergent horizon")

    shifted = A + omega * np.eye(A.shape[0])
    C_lyap = scipy.linalg.solve_continuous_lyapunov(shifted, BBs)
    if np.linalg.cond(C) > 1e12:
        raise ControllabilityError("Gramian is numerically singular")
    C_inv = np.linalg.inv(C)
    K = -B.conj().T @ C_inv
    Atilde = -A.conj().T - 2.0 * omega * np.eye(A.shape[0])
    lyap_res = np.linalg.norm(
        shifted @ C + C @ shifted.conj().T - BBs
    ) / np.linalg.norm(BBs)
    conj_res = np.linalg.norm(
        C_inv @ (A + B @ K) - Atilde @ C_inv
    ) / max(np.linalg.norm(Atilde @ C_inv), 1e-300)
    return {
        "gramian": C,
        "gramian_lyapunov": C_lyap,
        "K": K,
        "target": Atilde,
        "lyapunov_residual": float(lyap_res),
        "quadrature_vs_lyapunov": float(
            np.linalg.norm(C - C_lyap) / np.linalg.norm(C_lyap)
        ),
        "conjugation_residual": float(conj_res),
        "closed_loop_eigs": np.linalg.eigvals(A + B @ K),
    }


def random_system(n, rng, target_shift=None):
    """Random controllable system with a spectrally-disjoint random target."""
    for _ in range(50):
        A = rng.standard_normal((n, n))
        B = rng.standard_normal((n, 1))
        shift = 3.0 if target_shift is None else target_shift
        At = rng.standard_normal((n, n)) - shift * np.eye(n)
        try:
            sys = FiniteSystem(A, B, At)
        except ControllabilityError:
            continue
        gap = np.min(
            np.abs(
                np.linalg.eigvals(A)[:, None] - np.linalg.eigvals(At)[None, :]
            )
        )
        if gap > 1e-3:
            return sys
    raise RuntimeError("failed to draw a controllable system")
