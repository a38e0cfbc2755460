"""Closed-form time evolution under exp(-iHt) in the eigen- or Jordan basis.

Each time point is evaluated exactly from the spectral data: diagonal
mode applies phase factors exp(-i E t) to the eigenbasis coefficients,
Jordan mode applies the block exponential whose k x k blocks carry
(-it)^m / m! exp(-i E t) on the m-th superdiagonal.  In the broken-PT
regime amplitudes grow like exp(max Im(E) t); pick time grids within
floating-point range or work with normalized observables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .metric import MetricContext
from .spectral import Classification, JordanData, SpectralData, Tolerances
from .spin_core import CoherentState

__all__ = [
    "Propagator",
    "EvolutionResult",
    "build_propagator",
    "evolve",
    "survival_probability",
]


@dataclass(frozen=True)
class Propagator:
    """Cached factorization of U(t) = basis @ exp(-i J t) @ basis^-1.

    mode is 'diagonal' (J diagonal, eigenvalues in `eigenvalues`) or
    'jordan' (block structure in `block_structure`).
    """

    mode: str
    eigenvalues: np.ndarray
    basis: np.ndarray
    basis_inv: np.ndarray
    block_structure: tuple  # ((eigenvalue, size), ...); singletons in diagonal mode

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def coefficients_at(self, c0: np.ndarray, t: float) -> np.ndarray:
        """Evolve A_H (or chain-basis) coefficients to time t."""
        if self.mode == "diagonal":
            return np.exp(-1j * self.eigenvalues * t) * c0
        out = np.empty_like(c0)
        start = 0
        for lam, k in self.block_structure:
            blk = _jordan_block_exp(lam, k, t)
            out[start : start + k] = blk @ c0[start : start + k]
            start += k
        return out

    def matrix_at(self, t: float) -> np.ndarray:
        """Dense U(t)."""
        if self.mode == "diagonal":
            return (self.basis * np.exp(-1j * self.eigenvalues * t)) @ self.basis_inv
        core = np.zeros((self.dim, self.dim), dtype=complex)
        start = 0
        for lam, k in self.block_structure:
            core[start : start + k, start : start + k] = _jordan_block_exp(lam, k, t)
            start += k
        return self.basis @ core @ self.basis_inv


@dataclass(frozen=True)
class EvolutionResult:
    """Trajectory data: per-time coefficients, states, and metric norms.

    coeffs_H[i] are the eigen/chain-basis coefficients at times[i];
    coeffs_S the A_S-basis coefficients (None without a metric context);
    states_k the state vectors in the working A_k basis; s_norms the
    metric norms <I(t)|I(t)>_{S_K} (Euclidean norms squared if no
    context was supplied).
    """

    times: np.ndarray
    coeffs_H: np.ndarray
    coeffs_S: Optional[np.ndarray]
    states_k: np.ndarray
    s_norms: np.ndarray


def _jordan_block_exp(lam: complex, k: int, t: float) -> np.ndarray:
    """exp(-i J_k(lam) t): upper triangular with (-it)^m/m! phase factors."""
    phase = np.exp(-1j * lam * t)
    blk = np.zeros((k, k), dtype=complex)
    term = 1.0 + 0.0j
    for m in range(k):
        if m > 0:
            term *= (-1j * t) / m
        blk += term * np.diag(np.ones(k - m), m)
    return phase * blk


def build_propagator(
    H: np.ndarray,
    data: Union[SpectralData, JordanData],
    tol: Optional[Tolerances] = None,
) -> Propagator:
    """Build the propagator from spectral (diagonal) or Jordan data.

    Raises
    ------
    ValueError
        If the supplied data do not reconstruct H (wrong matrix, or a
        defective H handed to the diagonal route).
    """
    H = np.asarray(H, dtype=complex)
    tol = tol or Tolerances()
    if isinstance(data, SpectralData):
        if data.classification == Classification.DEFECTIVE:
            raise ValueError(
                "spectrum is defective: build the propagator from jordan_chains data"
            )
        basis = data.right_vectors
        basis_inv = np.linalg.inv(basis)
        recon = (basis * data.eigenvalues) @ basis_inv
        if np.linalg.norm(recon - H) > 1e-6 * max(data.hnorm, 1.0):
            raise ValueError("spectral data do not match the supplied Hamiltonian")
        structure = tuple((complex(w), 1) for w in data.eigenvalues)
        return Propagator(
            mode="diagonal",
            eigenvalues=data.eigenvalues,
            basis=basis,
            basis_inv=basis_inv,
            block_structure=structure,
        )
    if isinstance(data, JordanData):
        recon = data.P @ data.J @ data.Pinv
        if np.linalg.norm(recon - H) > 1e-6 * max(data.hnorm, 1.0):
            raise ValueError("Jordan data do not match the supplied Hamiltonian")
        return Propagator(
            mode="jordan",
            eigenvalues=np.diag(data.J).copy(),
            basis=data.P,
            basis_inv=data.Pinv,
            block_structure=data.block_structure,
        )
    raise TypeError(f"unsupported data type: {type(data).__name__}")


def evolve(
    initial: Union[CoherentState, np.ndarray],
    prop: Propagator,
    times,
    ctx: Optional[MetricContext] = None,
) -> EvolutionResult:
    """Propagate an initial state over an explicit time grid.

    Parameters
    ----------
    initial : CoherentState or ndarray
        State in A_k coordinates (amplitudes are taken from a
        CoherentState).
    prop : Propagator
    times : array_like
        Finite, ascending time points.
    ctx : MetricContext, optional
        Supplies the A_H -> A_S transform and the metric norm; without
        it coeffs_S is None and s_norms holds Euclidean norms squared.
    """
    x0 = np.asarray(
        initial.amplitudes if isinstance(initial, CoherentState) else initial,
        dtype=complex,
    )
    times = np.asarray(times, dtype=float)
    if not np.all(np.isfinite(times)):
        raise ValueError("times contains non-finite entries")
    if times.size > 1 and np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly ascending")

    n_t = times.size
    dim = prop.dim
    c0 = prop.basis_inv @ x0
    coeffs_H = np.empty((n_t, dim), dtype=complex)
    states = np.empty((n_t, dim), dtype=complex)
    for i, t in enumerate(times):
        coeffs_H[i] = prop.coefficients_at(c0, float(t))
        states[i] = prop.basis @ coeffs_H[i]

    if ctx is not None:
        coeffs_S = coeffs_H @ ctx.upsilon_prime_inv.T
        s_norms = np.einsum("ti,ij,tj->t", states.conj(), ctx.S_K, states).real
    else:
        coeffs_S = None
        s_norms = np.einsum("ti,ti->t", states.conj(), states).real
    return EvolutionResult(
        times=times,
        coeffs_H=coeffs_H,
        coeffs_S=coeffs_S,
        states_k=states,
        s_norms=s_norms,
    )


def survival_probability(
    initial: Union[CoherentState, np.ndarray],
    result: EvolutionResult,
    normalized: bool = False,
    ctx: Optional[MetricContext] = None,
) -> np.ndarray:
    """p(t) = |<I|I(t)>|^2 with the Euclidean product in A_k.

    Passing a metric context switches the overlap (and the normalizing
    norm) to the S_K inner product.  With normalized=True each overlap
    is divided by ||I(t)||^2, which keeps p(t) bounded in the
    broken-symmetry regime where the bare amplitude grows exponentially.
    """
    x0 = np.asarray(
        initial.amplitudes if isinstance(initial, CoherentState) else initial,
        dtype=complex,
    )
    if ctx is None:
        overlaps = result.states_k @ x0.conj()
        norms2 = np.einsum("ti,ti->t", result.states_k.conj(), result.states_k).real
    else:
        overlaps = (result.states_k @ ctx.S_K.T) @ x0.conj()
        norms2 = np.einsum("ti,ij,tj->t", result.states_k.conj(), ctx.S_K, result.states_k).real
    p = np.abs(overlaps) ** 2
    if normalized:
        p = p / norms2
    return p
