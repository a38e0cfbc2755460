"""Symmetry operators and Krein-space metrics for the four spectral classes.

A self-adjoint operator S intertwining H (S H = H^dagger S) exists for
real, conjugate-paired, and defective spectra; it is positive definite
only in the all-real case.  The indefinite cases are handled by the
Krein decomposition S = S_+ + S_-, from which the positive metric
S_K = S_+ - S_- defines the physical inner product.  Observables and
coordinates are carried into the D-weighted eigenbasis of S so that
expectation values are basis independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .spectral import (
    Classification,
    JordanData,
    SpectralData,
    Tolerances,
    jordan_chains,
)

__all__ = [
    "MetricCase",
    "AlphaPolicy",
    "SymmetryOperator",
    "MetricContext",
    "SingularMetricError",
    "metric_case_real",
    "symmetry_operator_pairs",
    "symmetry_operator_jordan",
    "metric_case_general",
    "krein_split",
    "s_inner_product",
    "transform_observable",
    "transform_coordinates",
    "s_matrix_element",
    "build_metric",
]


class MetricCase(str, Enum):
    CASE_I = "CaseI"  # real spectrum, S = sum |psi><psi|
    CASE_II = "CaseII"  # conjugate pairs, Krein split required
    CASE_III = "CaseIII"  # exceptional point, Jordan dual systems
    CASE_IV = "CaseIV"  # general complex, no intertwining


class SingularMetricError(RuntimeError):
    """The symmetry operator is numerically singular; no metric exists."""


@dataclass(frozen=True)
class AlphaPolicy:
    """Coefficients entering the pair-coupled symmetry operator.

    alpha_diag multiplies self-paired (real-eigenvalue) terms and must
    have a nonzero real part; alpha_pair couples conjugate partners and
    must have a nonzero imaginary part.
    """

    alpha_diag: complex = 1.0 + 0.0j
    alpha_pair: complex = 1.0j

    def __post_init__(self):
        if self.alpha_diag.real == 0.0:
            raise ValueError("Re(alpha_diag) must be nonzero")
        if self.alpha_pair.imag == 0.0:
            raise ValueError("Im(alpha_pair) must be nonzero")


@dataclass(frozen=True)
class SymmetryOperator:
    """Self-adjoint operator S, with the basis that generated it.

    `basis` is the A_k -> A_H transformation (right eigenvectors, or the
    generalized chain matrix in the defective case); krein_split uses it
    to assemble the A_H -> A_S transform.
    """

    matrix: np.ndarray
    case_tag: MetricCase
    alpha_policy: Optional[AlphaPolicy]
    basis: np.ndarray


@dataclass(frozen=True)
class MetricContext:
    """Krein factors of a symmetry operator and the coordinate chain.

    R diagonalizes S (unitary, positives-first column order); d_plus and
    d_minus are the positive/negative diagonal parts, D = d_plus - d_minus
    is positive, and S_K = R D R^dagger is the metric.  upsilon_prime maps
    A_S coordinates to A_H coordinates (and its inverse the other way);
    upsilon_k factors the metric as S_K = upsilon_k^dagger upsilon_k.
    """

    R: np.ndarray
    d_plus: np.ndarray
    d_minus: np.ndarray
    D: np.ndarray
    S_K: np.ndarray
    upsilon_k: np.ndarray
    upsilon_prime: np.ndarray
    upsilon_prime_inv: np.ndarray
    case_tag: MetricCase

    @property
    def dim(self) -> int:
        return self.D.size


def _check_real_spectrum(sd: SpectralData, what: str):
    if sd.classification != Classification.ALL_REAL:
        raise ValueError(
            f"{what} requires an all-real spectrum, got {sd.classification.value}"
        )


def metric_case_real(sd: SpectralData) -> SymmetryOperator:
    """Positive-definite symmetry operator for a real spectrum.

    S_psi = sum_j |psi_j><psi_j| built from the biorthonormal left
    system; it satisfies S H = H^dagger S and is the metric itself (no
    Krein split needed, though krein_split handles it uniformly).
    """
    _check_real_spectrum(sd, "metric_case_real")
    L = sd.left_vectors
    s = L @ L.conj().T
    return SymmetryOperator(
        matrix=s, case_tag=MetricCase.CASE_I, alpha_policy=None, basis=sd.right_vectors
    )


def _pair_sigma(sd: SpectralData, policy: AlphaPolicy) -> np.ndarray:
    """Coefficient matrix coupling left vectors per the pair map."""
    n = sd.dim
    hnorm = sd.hnorm
    real_band = sd.tol.tau_real * hnorm
    sigma = np.zeros((n, n), dtype=complex)
    paired = {j for pair in sd.pair_map for j in pair}
    for j in range(n):
        if j in paired:
            continue
        if abs(sd.eigenvalues[j].imag) >= real_band:
            raise ValueError(
                f"eigenvalue index {j} ({sd.eigenvalues[j]:.6g}) has no conjugate partner"
            )
        sigma[j, j] = policy.alpha_diag + np.conj(policy.alpha_diag)
    for j, i in sd.pair_map:
        sigma[j, i] = policy.alpha_pair
        sigma[i, j] = np.conj(policy.alpha_pair)
    return sigma


def symmetry_operator_pairs(
    sd: SpectralData, policy: Optional[AlphaPolicy] = None
) -> SymmetryOperator:
    """Symmetry operator for a conjugate-paired (or real) spectrum.

    S = sum_{j<=i} delta(conj-pairing) (alpha |psi_j><psi_i| + h.c.);
    real eigenvalues contribute 2 Re(alpha_diag) |psi_j><psi_j|, so on
    an all-real spectrum this is twice metric_case_real for the default
    policy.  Indefinite whenever a genuine pair is present.

    Raises
    ------
    ValueError
        If a complex eigenvalue lacks a conjugate partner.
    """
    policy = policy or AlphaPolicy()
    if sd.classification == Classification.DEFECTIVE:
        raise ValueError("defective spectrum: use symmetry_operator_jordan")
    sigma = _pair_sigma(sd, policy)
    L = sd.left_vectors
    s = L @ sigma @ L.conj().T
    return SymmetryOperator(
        matrix=s, case_tag=MetricCase.CASE_II, alpha_policy=policy, basis=sd.right_vectors
    )


def _flip(k: int) -> np.ndarray:
    return np.fliplr(np.eye(k))


def symmetry_operator_jordan(
    jd: JordanData, policy: Optional[AlphaPolicy] = None
) -> SymmetryOperator:
    """Symmetry operator at an exceptional point from the Jordan dual systems.

    Built as Pbar Sigma Pbar^dagger where Sigma couples chain blocks: a
    real-eigenvalue block of size k receives 2 Re(alpha_diag) times the
    flip matrix (which intertwines J_k with its transpose), and each
    conjugate block pair (E, conj E) of equal size is coupled by
    alpha_pair times the flip.  The result is self-adjoint, satisfies
    S_J H = H^dagger S_J, and for a complex-symmetric H in the bilinear
    chain gauge reduces to the |psi_k><vbar_k| sum form.

    Raises
    ------
    ValueError
        If a complex-eigenvalue block has no size-matched conjugate
        partner block.
    """
    policy = policy or AlphaPolicy()
    n = jd.dim
    hnorm = jd.hnorm
    slices = jd.block_slices()
    lams = [lam for lam, _ in jd.block_structure]
    sizes = [size for _, size in jd.block_structure]

    sigma = np.zeros((n, n), dtype=complex)
    taken = set()
    band = 1e-8 * max(hnorm, 1.0)
    for b, (lam, k) in enumerate(jd.block_structure):
        if b in taken:
            continue
        if abs(lam.imag) < band:
            coeff = policy.alpha_diag + np.conj(policy.alpha_diag)
            sigma[slices[b], slices[b]] = coeff * _flip(k)
            taken.add(b)
            continue
        partner = None
        for c in range(b + 1, len(lams)):
            if c in taken:
                continue
            if sizes[c] == k and abs(lams[c] - np.conj(lam)) < band:
                partner = c
                break
        if partner is None:
            raise ValueError(
                f"Jordan block at {lam:.6g} (size {k}) has no conjugate partner block"
            )
        sigma[slices[b], slices[partner]] = policy.alpha_pair * _flip(k)
        sigma[slices[partner], slices[b]] = np.conj(policy.alpha_pair) * _flip(k)
        taken.update((b, partner))

    s = jd.Pbar @ sigma @ jd.Pbar.conj().T
    return SymmetryOperator(
        matrix=s, case_tag=MetricCase.CASE_III, alpha_policy=policy, basis=jd.P
    )


def metric_case_general(sd: SpectralData) -> SymmetryOperator:
    """Positive operator for a general complex spectrum (no intertwining).

    S_g = sum_j |psi_j><psi_j|; H and H^dagger are not isospectral here,
    so S_g H != H^dagger S_g, but the operator still defines a positive
    inner product for expectation values.
    """
    if sd.classification == Classification.DEFECTIVE:
        raise ValueError("defective spectrum: use symmetry_operator_jordan")
    L = sd.left_vectors
    s = L @ L.conj().T
    return SymmetryOperator(
        matrix=s, case_tag=MetricCase.CASE_IV, alpha_policy=None, basis=sd.right_vectors
    )


def krein_split(op: SymmetryOperator, singular_tol: float = 1e-10) -> MetricContext:
    """Split S into positive and negative parts and build the metric.

    Diagonalizes S = R D_all R^dagger (R unitary, positive eigenvalues
    first), sets D = D_+ - D_- > 0, S_K = R D R^dagger, and factors
    S_K = upsilon_k^dagger upsilon_k with upsilon_k = D^(1/2) R^dagger.
    The A_H -> A_S transform is upsilon' = basis^-1 R.

    Raises
    ------
    SingularMetricError
        If min |eig(S)| <= singular_tol * |S| (degenerate metric).
    """
    s = np.asarray(op.matrix)
    snorm = float(np.linalg.norm(s))
    herm_defect = float(np.linalg.norm(s - s.conj().T))
    if herm_defect > 1e-10 * max(snorm, 1.0):
        raise ValueError("symmetry operator is not self-adjoint")
    d, R = np.linalg.eigh(s)
    small = np.abs(d) <= singular_tol * max(snorm, 1e-300)
    if np.any(small):
        worst = d[np.argmin(np.abs(d))]
        raise SingularMetricError(
            f"symmetry operator is numerically singular: eigenvalue {worst:.3e} "
            f"within {singular_tol:.1e} * |S|"
        )
    order = np.argsort(-d)  # positives first, descending
    d = d[order]
    R = R[:, order]
    d_plus = np.where(d > 0, d, 0.0)
    d_minus = np.where(d < 0, d, 0.0)
    D = d_plus - d_minus
    S_K = (R * D) @ R.conj().T
    upsilon_k = np.sqrt(D)[:, None] * R.conj().T
    upsilon_prime = np.linalg.solve(op.basis, R)
    upsilon_prime_inv = np.linalg.inv(upsilon_prime)
    return MetricContext(
        R=R,
        d_plus=d_plus,
        d_minus=d_minus,
        D=D,
        S_K=S_K,
        upsilon_k=upsilon_k,
        upsilon_prime=upsilon_prime,
        upsilon_prime_inv=upsilon_prime_inv,
        case_tag=op.case_tag,
    )


def s_inner_product(f: np.ndarray, g: np.ndarray, ctx: MetricContext) -> complex:
    """Metric inner product <f|g>_{S_K} = <f|S_K g> in A_k coordinates."""
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if f.shape != g.shape or f.size != ctx.dim:
        raise ValueError("dimension mismatch in s_inner_product")
    return complex(f.conj() @ (ctx.S_K @ g))


def transform_coordinates(f: np.ndarray, ctx: MetricContext) -> np.ndarray:
    """Map A_k coordinates to the D-weighted A_S frame: F = D^-1/2 [f]_{A_S}.

    [f]_{A_S} = R^-1 f; the inverse (not the adjoint) keeps expectation
    values invariant under rescalings of the A_S basis columns.
    """
    coords = np.linalg.solve(ctx.R, np.asarray(f, dtype=complex))
    return coords / np.sqrt(ctx.D)


def transform_observable(obs: np.ndarray, ctx: MetricContext) -> np.ndarray:
    """Carry a Hermitian observable into the D-weighted A_S frame.

    O = D^-1/2 [obs]_{A_S} D^1/2 with [obs]_{A_S} = R^-1 obs R; the
    matrix element chain F^dagger D O G then reproduces the plain A_k
    value, making expectation values independent of the A_S scaling.

    Raises
    ------
    ValueError
        If obs is not Hermitian.
    """
    obs = np.asarray(obs, dtype=complex)
    if np.linalg.norm(obs - obs.conj().T) > 1e-10 * max(np.linalg.norm(obs), 1e-300):
        raise ValueError("observable must be Hermitian")
    obs_s = np.linalg.solve(ctx.R, obs @ ctx.R)
    rootD = np.sqrt(ctx.D)
    return (obs_s * rootD[None, :]) / rootD[:, None]


def s_matrix_element(
    f: np.ndarray, obs: np.ndarray, g: np.ndarray, ctx: MetricContext
) -> complex:
    """<f|obs|g>_S evaluated through the D-weighted frame chain."""
    F = transform_coordinates(f, ctx)
    G = transform_coordinates(g, ctx)
    O = transform_observable(obs, ctx)
    return complex(F.conj() @ (ctx.D * (O @ G)))


def build_metric(
    H: np.ndarray,
    sd: SpectralData,
    policy: Optional[AlphaPolicy] = None,
    tol: Optional[Tolerances] = None,
    mode: str = "auto",
    jd: Optional[JordanData] = None,
):
    """Choose and build the symmetry operator + metric for H.

    mode 'auto' dispatches on sd.classification; 'force-case-i' ..
    'force-case-iv' override (case III constructs Jordan data if not
    supplied).  Returns (SymmetryOperator, MetricContext).
    """
    tol = tol or sd.tol
    cls = sd.classification
    case = {
        "auto": None,
        "force-case-i": MetricCase.CASE_I,
        "force-case-ii": MetricCase.CASE_II,
        "force-case-iii": MetricCase.CASE_III,
        "force-case-iv": MetricCase.CASE_IV,
    }.get(mode, "bad")
    if case == "bad":
        raise ValueError(f"unknown metric mode {mode!r}")
    if case is None:
        case = {
            Classification.ALL_REAL: MetricCase.CASE_I,
            Classification.CONJUGATE_PAIRS: MetricCase.CASE_II,
            Classification.DEFECTIVE: MetricCase.CASE_III,
            Classification.GENERAL_COMPLEX: MetricCase.CASE_IV,
        }[cls]

    if case == MetricCase.CASE_I:
        op = metric_case_real(sd)
    elif case == MetricCase.CASE_II:
        op = symmetry_operator_pairs(sd, policy)
    elif case == MetricCase.CASE_III:
        if jd is None:
            jd = jordan_chains(H, sd, tol)
        op = symmetry_operator_jordan(jd, policy)
    else:
        op = metric_case_general(sd)
    return op, krein_split(op)
