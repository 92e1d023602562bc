"""Truncated-Fock-space operator algebra and steady states.

The collective exciton mode is bosonic; the Hamiltonian in the frame rotating
with the laser is

    H = delta * A^dag A + omega_r * (A + A^dag) + G * A^dag^2 A^2

and the density matrix relaxes under single-photon loss at rate gamma,

    d rho/dt = -i [H, rho] + (gamma/2) (2 A rho A^dag - A^dag A rho - rho A^dag A).

Density matrices are vectorized column-major, vec(rho)[i + j*d] = rho[i, j],
so that vec(X rho Y) = kron(Y.T, X) vec(rho).  The Liouvillian is kept dense:
for the truncations used here (d <= 65) a direct LU solve beats any sparse
machinery.
"""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve, get_lapack_funcs

from .errors import SolverError, TruncationError
from .model import PhysParams

__all__ = ["annihilation", "build_hamiltonian", "build_liouvillian",
           "steady_state", "expectation", "choose_truncation",
           "TruncationResult", "vectorize", "unvectorize", "trace_dual"]


def annihilation(n_max: int) -> np.ndarray:
    """Bosonic annihilation operator on Fock levels 0..n_max."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    d = n_max + 1
    a = np.zeros((d, d), dtype=complex)
    ns = np.arange(1, d)
    a[ns - 1, ns] = np.sqrt(ns)
    return a


def build_hamiltonian(p: PhysParams, n_max: int) -> np.ndarray:
    """Rotating-frame Hamiltonian of the driven Kerr mode (Hermitian, meV)."""
    a = annihilation(n_max)
    ad = a.conj().T
    n_op = ad @ a
    return p.delta * n_op + p.omega_r * (a + ad) + p.G * (ad @ ad @ a @ a)


def build_liouvillian(p: PhysParams, n_max: int) -> np.ndarray:
    """Dense superoperator L with L vec(rho) = vec(-i[H,rho] + gamma/2 (...))."""
    d = n_max + 1
    a = annihilation(n_max)
    ad = a.conj().T
    n_op = ad @ a
    h = build_hamiltonian(p, n_max)
    eye = np.eye(d)
    lv = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    lv += (p.gamma / 2.0) * (2.0 * np.kron(a.conj(), a)
                             - np.kron(eye, n_op) - np.kron(n_op.T, eye))
    return lv


def vectorize(mat: np.ndarray) -> np.ndarray:
    return mat.reshape(-1, order="F")


def unvectorize(vec: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(vec.size)))
    return vec.reshape((d, d), order="F")


def trace_dual(op: np.ndarray) -> np.ndarray:
    """Row vector t with t @ vec(X) = Tr(op @ X) under column-major vec."""
    return op.reshape(-1, order="C")


def steady_state(liouvillian: np.ndarray, *, residual_tol: float = 1e-10,
                 rcond_floor: float = 1e-13) -> np.ndarray:
    """Unique steady state of a dissipative Liouvillian.

    One row of L is replaced by the trace functional and the square system is
    LU-solved.  Raises SolverError when the system is (near-)singular, which
    happens exactly when the generator has no damping.
    """
    n2 = liouvillian.shape[0]
    d = int(round(np.sqrt(n2)))
    if d * d != n2 or liouvillian.shape != (n2, n2):
        raise ValueError(f"Liouvillian must be square with dim a perfect square, got {liouvillian.shape}")

    mod = liouvillian.copy()
    mod[0, :] = 0.0
    mod[0, np.arange(d) * (d + 1)] = 1.0
    rhs = np.zeros(n2, dtype=complex)
    rhs[0] = 1.0

    anorm = np.linalg.norm(mod, 1)
    with warnings.catch_warnings():
        # exact singularity is caught below via the condition estimate
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(mod)
    gecon = get_lapack_funcs("gecon", (mod,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0 or not np.isfinite(rcond) or rcond < rcond_floor:
        raise SolverError(
            f"steady-state system is singular or ill-conditioned (rcond estimate {rcond:.3e}); "
            "the generator needs gamma > 0 for a unique steady state")
    vec = lu_solve((lu, piv), rhs)

    rho = unvectorize(vec)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real

    residual = np.max(np.abs(liouvillian @ vectorize(rho)))
    if residual > residual_tol:
        raise SolverError(f"steady-state residual {residual:.3e} exceeds {residual_tol:.1e}")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -1e-10:
        raise SolverError(f"steady state not positive semidefinite (min eigenvalue {evals.min():.3e})")
    return rho


def expectation(rho: np.ndarray, op: np.ndarray) -> complex:
    """Tr(op @ rho)."""
    if rho.shape != op.shape:
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs op {op.shape}")
    return complex(np.trace(op @ rho))


class TruncationResult(NamedTuple):
    n_max: int
    top_populations: tuple[float, float]  # levels n_max-1, n_max


def choose_truncation(p: PhysParams, tol: float = 1e-10, *,
                      start: int = 8, cap: int = 64) -> TruncationResult:
    """Smallest truncation on a doubling schedule whose top two Fock
    populations both fall below tol."""
    if not (0.0 < tol <= 1e-4):
        raise ValueError(f"tol must be in (0, 1e-4], got {tol}")
    n = start
    while True:
        rho = steady_state(build_liouvillian(p, n))
        pops = np.diag(rho).real
        top = (float(pops[-2]), float(pops[-1]))
        if max(top) < tol:
            return TruncationResult(n_max=n, top_populations=top)
        if n >= cap:
            raise TruncationError(
                f"truncation cap n_max={cap} reached with top populations {top}; "
                f"residual population exceeds tol={tol:.1e}")
        n = min(2 * n, cap)
