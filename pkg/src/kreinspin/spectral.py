"""Non-Hermitian eigensystems: biorthonormal left/right pairs, spectral
classification, Jordan chains at exceptional points, and EP location.

The right eigenvectors phi_j of H and the left eigenvectors psi_j of
H^dagger (eigenvalues conj(E_j)) are normalized so <psi_i|phi_j> =
delta_ij.  Spectra are sorted into four classes: all real, conjugate
pairs, general complex, or defective (eigenvector coalescence).  At an
exceptional point the matrix is only Jordan-reducible and the chain
machinery below takes over.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .spin_core import DissipativeOAT, build_hamiltonian, build_spin_system

__all__ = [
    "Classification",
    "Tolerances",
    "SpectralData",
    "JordanData",
    "EPLocation",
    "AmbiguousPairingError",
    "JordanResidualError",
    "eigensystem",
    "classify_spectrum",
    "jordan_chains",
    "count_real_eigenvalues",
    "locate_exceptional_points",
]


class Classification(str, Enum):
    ALL_REAL = "AllReal"
    CONJUGATE_PAIRS = "ConjugatePairs"
    GENERAL_COMPLEX = "GeneralComplex"
    DEFECTIVE = "Defective"


class AmbiguousPairingError(ValueError):
    """Two candidate conjugate partners lie within the pairing band."""


class JordanResidualError(RuntimeError):
    """Chain residual too large; the parameter is not close enough to an EP."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds, all relative to the matrix norm.

    tau_real     imaginary-part threshold below which an eigenvalue counts
                 as real;
    tau_pair     conjugate-pair matching band;
    tau_defect   eigenvector-coalescence threshold (minimum singular value
                 of the column-normalized right-eigenvector matrix);
    tau_jordan   accepted residual of the Jordan reconstruction;
    tau_cluster  eigenvalue clustering band used when grouping algebraic
                 multiplicities for the chain builder.
    """

    tau_real: float = 1e-9
    tau_pair: float = 1e-9
    tau_defect: float = 1e-6
    tau_jordan: float = 1e-7
    tau_cluster: float = 1e-5

    def __post_init__(self):
        for name in ("tau_real", "tau_pair", "tau_defect", "tau_jordan", "tau_cluster"):
            if getattr(self, name) <= 0:
                raise ValueError(f"Tolerances.{name} must be strictly positive")


@dataclass(frozen=True)
class SpectralData:
    """Eigensystem of a (generally non-Hermitian) matrix.

    eigenvalues[j] belongs to right_vectors[:, j]; left_vectors[:, j] is
    the eigenvector of H^dagger with eigenvalue conj(eigenvalues[j]),
    scaled so the two systems are biorthonormal.  pair_map lists index
    pairs (j, i) of conjugate-partner eigenvalues with Im E_j > 0.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    pair_map: tuple
    classification: Classification
    hnorm: float
    tol: Tolerances = field(default_factory=Tolerances)
    min_singular_value: float = 1.0

    @property
    def dim(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class JordanData:
    """Jordan decomposition H = P J P^-1 with the dual chain systems.

    Columns of P are the (generalized) right eigenvectors, chain-ordered
    bottom-up within each block; J carries the eigenvalues on the
    diagonal and ones on the superdiagonal inside each block.  Pbar =
    (P^dagger)^-1 holds the generalized left system psi_k; vbar holds
    the columns of (Pbar^-1)^T = conj(P), the basis dual to psi_k under
    the bilinear pairing vbar_k^T psi_j = delta_kj.
    """

    J: np.ndarray
    P: np.ndarray
    Pinv: np.ndarray
    Pbar: np.ndarray
    vbar: np.ndarray
    block_structure: tuple
    hnorm: float
    residual: float

    @property
    def dim(self) -> int:
        return self.J.shape[0]

    def block_slices(self) -> list:
        out = []
        start = 0
        for _, size in self.block_structure:
            out.append(slice(start, start + size))
            start += size
        return out


@dataclass(frozen=True)
class EPLocation:
    """A located exceptional point of the dissipative OAT family."""

    ratio: float
    eigenvalue: complex
    colliding_indices: tuple
    block_size: int


# ---------------------------------------------------------------------------
# eigensystem construction
# ---------------------------------------------------------------------------


def _match_conjugates(target: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Greedy-match each entry of `values` to the nearest entry of `target`.

    Returns a permutation p with values[p[j]] ~ target[j].
    """
    n = target.size
    perm = np.full(n, -1, dtype=int)
    taken = np.zeros(n, dtype=bool)
    order = np.argsort(-np.abs(target.imag))  # match the most complex first
    for j in order:
        d = np.abs(values - target[j])
        d[taken] = np.inf
        k = int(np.argmin(d))
        perm[j] = k
        taken[k] = True
    return perm


def eigensystem(H: np.ndarray, tol: Optional[Tolerances] = None) -> SpectralData:
    """Diagonalize H, build the biorthonormal left system, and classify.

    The left eigenvectors are computed from the adjoint matrix and then
    rescaled against the right system so <psi_i|phi_j> = delta_ij (a
    within-cluster solve replaces the scaling when eigenvalues are
    degenerate).  Eigenvector coalescence beyond tau_defect flags the
    spectrum as Defective; the left system is then returned best-effort
    and the caller should switch to `jordan_chains`.

    Raises
    ------
    ValueError
        If H is not a finite square matrix.
    """
    tol = tol or Tolerances()
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"H must be square, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError("H contains non-finite entries")

    hnorm = float(np.linalg.norm(H))
    if hnorm == 0.0:
        hnorm = 1.0

    w, vr = np.linalg.eig(H)
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    vr = vr[:, order]
    vr = vr / np.linalg.norm(vr, axis=0, keepdims=True)

    svals = np.linalg.svd(vr, compute_uv=False)
    min_sv = float(svals[-1])
    defective = min_sv < tol.tau_defect

    wl, vl = np.linalg.eig(H.conj().T)
    perm = _match_conjugates(w.conj(), wl)
    vl = vl[:, perm]

    # Biorthonormalize: vl <- vl @ (overlap^-1)^dagger.  For simple
    # spectra the overlap is diagonal and this is a pure rescaling.
    overlap = vl.conj().T @ vr
    if not defective:
        vl = vl @ np.linalg.inv(overlap).conj().T
    else:
        diag = np.diag(overlap).copy()
        diag[np.abs(diag) < 1e-300] = 1.0
        vl = vl / diag.conj()[np.newaxis, :]

    classification, pair_map = classify_spectrum(w, hnorm, tol, defective=defective)
    return SpectralData(
        eigenvalues=w,
        right_vectors=vr,
        left_vectors=vl,
        pair_map=pair_map,
        classification=classification,
        hnorm=hnorm,
        tol=tol,
        min_singular_value=min_sv,
    )


def classify_spectrum(
    eigenvalues: np.ndarray,
    hnorm: float,
    tol: Optional[Tolerances] = None,
    defective: bool = False,
):
    """Assign a spectral class and the conjugate pair map.

    AllReal if every |Im E| < tau_real * |H|; ConjugatePairs if every
    complex eigenvalue has a unique tau_pair-matched partner;
    GeneralComplex otherwise.  A defective flag overrides all.

    Raises
    ------
    AmbiguousPairingError
        If two candidate partners fall inside the pairing band.
    """
    tol = tol or Tolerances()
    w = np.asarray(eigenvalues, dtype=complex)
    real_band = tol.tau_real * hnorm
    pair_band = tol.tau_pair * hnorm

    complex_idx = [j for j in range(w.size) if abs(w[j].imag) >= real_band]
    pair_map = []
    unmatched = []
    taken = set()
    for j in complex_idx:
        if j in taken or w[j].imag < 0:
            continue
        cands = [
            i
            for i in complex_idx
            if i != j and i not in taken and abs(w[j] - w[i].conj()) < pair_band
        ]
        if len(cands) > 1:
            # Distinguish a true ambiguity from an exactly degenerate pair;
            # degenerate partners are interchangeable.
            spread = max(abs(w[a] - w[b]) for a in cands for b in cands)
            if spread > pair_band:
                raise AmbiguousPairingError(
                    f"eigenvalue {j} has multiple conjugate partner candidates {cands}"
                )
        if cands:
            i = cands[0]
            pair_map.append((j, i))
            taken.update((j, i))
        else:
            unmatched.append(j)

    for j in complex_idx:
        if j not in taken and w[j].imag < 0:
            has_partner = any(
                abs(w[j] - w[i].conj()) < pair_band for i in complex_idx if i != j
            )
            if not has_partner:
                unmatched.append(j)

    if defective:
        cls = Classification.DEFECTIVE
    elif not complex_idx:
        cls = Classification.ALL_REAL
    elif not unmatched:
        cls = Classification.CONJUGATE_PAIRS
    else:
        cls = Classification.GENERAL_COMPLEX
    return cls, tuple(pair_map)


# ---------------------------------------------------------------------------
# Jordan decomposition
# ---------------------------------------------------------------------------


def _cluster_eigenvalues(w: np.ndarray, band: float) -> list:
    """Group indices of eigenvalues lying within `band` of each other."""
    order = np.lexsort((w.imag, w.real))
    clusters = []
    for idx in order:
        placed = False
        for cl in clusters:
            if any(abs(w[idx] - w[i]) < band for i in cl):
                cl.append(idx)
                placed = True
                break
        if not placed:
            clusters.append([idx])
    return clusters


def _nullspace(B: np.ndarray, max_dim: int, scale_hint: float = 1.0) -> np.ndarray:
    """Orthonormal nullspace basis, rank-revealed by the largest gap in
    the trailing singular values (at most max_dim of them)."""
    u, s, vh = np.linalg.svd(B)
    n = B.shape[0]
    tiny = max(scale_hint, 1.0) * n * np.finfo(float).eps
    if s[0] <= 10.0 * tiny:  # the whole operator is numerically zero
        return vh.conj().T
    s_cl = np.maximum(s, tiny * 1e-3)
    best_k, best_ratio = 0, 1.0
    for k in range(1, min(max_dim, n - 1) + 1):
        ratio = s_cl[n - k - 1] / s_cl[n - k]
        if ratio > best_ratio:
            best_ratio, best_k = ratio, k
    if best_ratio < 1e3:  # no convincing rank gap
        best_k = int(np.sum(s < tiny * 10))
    return vh.conj().T[:, n - best_k :] if best_k else np.zeros((n, 0))


def _chain_tops(B: np.ndarray, null_lo: np.ndarray, null_hi: np.ndarray, count: int):
    """Vectors of null(B^(k)) independent from null(B^(k-1)), i.e. chain
    tops at height k."""
    if null_lo.shape[1] == 0:
        q = null_hi
    else:
        proj = null_hi - null_lo @ (null_lo.conj().T @ null_hi)
        q, r = np.linalg.qr(proj)
        keep = np.abs(np.diag(r)) > 1e-8
        q = q[:, keep]
    return q[:, :count]


def _chains_for_cluster(H: np.ndarray, idx: list, w: np.ndarray, vr: np.ndarray):
    """Jordan chains for one eigenvalue cluster, bottom-up column order.

    Returns a list of (lam, chain) pairs where each chain is a list of
    vectors [v1, ..., vk] with (H - lam) v_{m+1} = v_m and
    (H - lam) v1 ~ 0.  A cluster whose eigenvector count matches its
    size (nearly degenerate but diagonalizable) keeps the original
    eigenpairs; only a genuine geometric deficit triggers the chain
    construction at the cluster-mean eigenvalue.
    """
    lam = complex(np.mean(w[list(idx)]))
    m = len(idx)
    n = H.shape[0]
    if m == 1:
        j = idx[0]
        return [(complex(w[j]), [vr[:, j].copy()])]
    B = H - lam * np.eye(n)

    # nullspace filtration N_1 subset N_2 subset ... up to dim m
    spaces = [np.zeros((n, 0))]
    Bk = np.eye(n)
    bnorm = max(float(np.linalg.norm(B)), 1e-300)
    k_pow = 0
    while spaces[-1].shape[1] < m:
        Bk = Bk @ B
        k_pow += 1
        nk = _nullspace(Bk, m, scale_hint=bnorm**k_pow)
        if nk.shape[1] <= spaces[-1].shape[1]:
            # numerical stagnation: treat the remainder as diagonalizable
            break
        spaces.append(nk)
    dims = [sp.shape[1] for sp in spaces]
    height = len(spaces) - 1

    if height == 1 and dims[1] == m:
        # full geometric multiplicity: the LAPACK eigenpairs are exact
        # to backward error and keep the intra-cluster splitting
        return [(complex(w[j]), [vr[:, j].copy()]) for j in idx]

    # nu[k] = number of blocks of size >= k
    nu = [dims[k] - dims[k - 1] for k in range(1, height + 1)]
    chains = []
    for k in range(height, 0, -1):
        n_new = nu[k - 1] - (nu[k] if k < height else 0)
        if n_new <= 0:
            continue
        tops = _chain_tops(B, spaces[k - 1], spaces[k], n_new)
        for c in range(tops.shape[1]):
            v = tops[:, c]
            chain = [v]
            for _ in range(k - 1):
                v = B @ v
                chain.append(v)
            chain.reverse()  # bottom (true eigenvector) first
            chains.append(chain)
    return [(lam, chain) for chain in chains]


def _is_complex_symmetric(H: np.ndarray, hnorm: float) -> bool:
    return float(np.linalg.norm(H - H.T)) <= 1e-12 * max(hnorm, 1.0)


def _symmetric_gauge(chains: list) -> list:
    """Fix the bilinear gauge for a complex-symmetric matrix.

    Simple vectors are scaled so v^T v = 1; a 2-chain (v1, v2) is mapped
    to (a v1, a v2 + b v1) so the block Gram P^T P becomes the flip
    [[0,1],[1,0]] (v1 is self-orthogonal at an EP).  Longer chains are
    left in the raw gauge.
    """
    out = []
    for chain in chains:
        if len(chain) == 1:
            v = chain[0]
            q = v @ v
            if abs(q) > 1e-6 * np.vdot(v, v).real:
                v = v / np.sqrt(q)
            out.append([v])
        elif len(chain) == 2:
            v1, v2 = chain
            m12 = v1 @ v2
            if abs(m12) > 1e-10:
                a = 1.0 / np.sqrt(m12)
                b = -a * (v2 @ v2) / (2.0 * m12)
                out.append([a * v1, a * v2 + b * v1])
            else:
                out.append(chain)
        else:
            out.append(chain)
    return out


def jordan_chains(
    H: np.ndarray,
    sd: SpectralData,
    tol: Optional[Tolerances] = None,
) -> JordanData:
    """Build generalized eigenvector chains and the Jordan form of H.

    Eigenvalues are clustered within tau_cluster * |H|; each cluster's
    chain structure is read off the nullspace filtration of (H - E I)^k
    and the chain vectors are produced by rank-revealed extension.
    Blocks are ordered by size (largest first), then by eigenvalue.
    For complex-symmetric H the chains are put in the bilinear gauge
    P^T P = flip, which realizes the textbook dual-system formulas.

    Raises
    ------
    JordanResidualError
        If ||H P - P J|| exceeds tau_jordan * |H|; refine the model
        parameter to the true exceptional point and retry.
    """
    tol = tol or (sd.tol if sd is not None else Tolerances())
    H = np.asarray(H, dtype=complex)
    n = H.shape[0]
    hnorm = sd.hnorm if sd is not None else float(np.linalg.norm(H))
    w = sd.eigenvalues

    clusters = _cluster_eigenvalues(w, tol.tau_cluster * hnorm)
    symmetric = _is_complex_symmetric(H, hnorm)
    blocks = []  # (lam, chain)
    for cl in clusters:
        pairs = _chains_for_cluster(H, cl, w, sd.right_vectors)
        if symmetric:
            chains = _symmetric_gauge([chain for _, chain in pairs])
            pairs = [(lam, chain) for (lam, _), chain in zip(pairs, chains)]
        blocks.extend(pairs)

    blocks.sort(key=lambda b: (-len(b[1]), b[0].real, b[0].imag))

    P = np.zeros((n, n), dtype=complex)
    J = np.zeros((n, n), dtype=complex)
    structure = []
    col = 0
    for lam, chain in blocks:
        k = len(chain)
        for m_i, v in enumerate(chain):
            P[:, col + m_i] = v
        J[col : col + k, col : col + k] = lam * np.eye(k) + np.diag(
            np.ones(k - 1), 1
        )
        structure.append((lam, k))
        col += k
    if col != n:
        raise JordanResidualError(
            f"chain construction produced {col} of {n} vectors; "
            "refine the parameter toward the exceptional point"
        )

    residual = float(np.linalg.norm(H @ P - P @ J)) / hnorm
    if residual > tol.tau_jordan:
        raise JordanResidualError(
            f"Jordan residual {residual:.3e} exceeds tau_jordan={tol.tau_jordan:.1e}; "
            "refine the parameter toward the exceptional point"
        )
    Pinv = np.linalg.inv(P)
    Pbar = np.linalg.inv(P.conj().T)
    vbar = P.conj()
    return JordanData(
        J=J,
        P=P,
        Pinv=Pinv,
        Pbar=Pbar,
        vbar=vbar,
        block_structure=tuple(structure),
        hnorm=hnorm,
        residual=residual,
    )


# ---------------------------------------------------------------------------
# spectral scans of the dissipative OAT family
# ---------------------------------------------------------------------------

_DEFAULT_OMEGA = -5.0
_DEFAULT_LAMBDA = 1.0


def _oat_hamiltonian(S, ratio, omega=_DEFAULT_OMEGA, lam=_DEFAULT_LAMBDA):
    sys = build_spin_system(S)
    return build_hamiltonian(sys, DissipativeOAT(omega=omega, lam=lam, kappa=ratio * lam))


def count_real_eigenvalues(
    S,
    ratio_grid,
    tol: Optional[Tolerances] = None,
    omega: float = _DEFAULT_OMEGA,
    lam: float = _DEFAULT_LAMBDA,
) -> np.ndarray:
    """Count real eigenvalues of the dissipative OAT model per grid point.

    The count is invariant under omega (a real shift) and under the
    overall scale lam; only kappa/lam matters.
    """
    tol = tol or Tolerances()
    ratio_grid = np.asarray(ratio_grid, dtype=float)
    if not np.all(np.isfinite(ratio_grid)):
        raise ValueError("ratio_grid contains non-finite entries")
    counts = np.empty(ratio_grid.size, dtype=int)
    for g, ratio in enumerate(ratio_grid):
        H = _oat_hamiltonian(S, ratio, omega, lam)
        w = np.linalg.eigvals(H)
        counts[g] = int(np.sum(np.abs(w.imag) < tol.tau_real * np.linalg.norm(H)))
    return counts


def _discriminant_sign(S, ratio, omega=_DEFAULT_OMEGA, lam=_DEFAULT_LAMBDA) -> float:
    """Sign of the characteristic-polynomial discriminant (real for PT
    families); computed from unit phase factors to dodge under/overflow."""
    w = np.linalg.eigvals(_oat_hamiltonian(S, ratio, omega, lam))
    acc = 1.0 + 0.0j
    for i in range(w.size):
        for j in range(i + 1, w.size):
            f = (w[i] - w[j]) ** 2
            a = abs(f)
            if a == 0.0:
                return 0.0
            acc *= f / a
    return float(np.sign(acc.real))


def locate_exceptional_points(
    S,
    ratio_range,
    tol: Optional[Tolerances] = None,
    n_scan: int = 400,
    rel_width: float = 1e-12,
    omega: float = _DEFAULT_OMEGA,
    lam: float = _DEFAULT_LAMBDA,
) -> list:
    """Locate exceptional points of the OAT family inside ratio_range.

    Scans the discriminant of the characteristic polynomial for sign
    changes (each real-pair-to-complex-pair collision flips it) and
    refines every bracket by bisection to relative width `rel_width`.
    Returns a list of EPLocation records; empty if no EP is found.
    """
    tol = tol or Tolerances()
    lo, hi = float(ratio_range[0]), float(ratio_range[1])
    if not lo < hi:
        raise ValueError(f"ratio_range must be ordered, got ({lo}, {hi})")
    grid = np.linspace(lo, hi, n_scan + 1)
    signs = np.array([_discriminant_sign(S, g, omega, lam) for g in grid])

    found = []
    for i in range(n_scan):
        if signs[i] == 0.0:
            found.append(grid[i])
            continue
        if signs[i] * signs[i + 1] < 0:
            a, b = grid[i], grid[i + 1]
            fa = signs[i]
            while (b - a) > rel_width * max(abs(a), abs(b), 1e-30):
                mid = 0.5 * (a + b)
                fm = _discriminant_sign(S, mid, omega, lam)
                if fm == 0.0:
                    a = b = mid
                    break
                if fa * fm < 0:
                    b = mid
                else:
                    a, fa = mid, fm
            found.append(0.5 * (a + b))
    if signs[-1] == 0.0:
        found.append(grid[-1])

    out = []
    for ratio in found:
        H = _oat_hamiltonian(S, ratio, omega, lam)
        sd = eigensystem(H, tol)
        # an eigenvalue collision without eigenvector coalescence (e.g. the
        # degenerate Hermitian family at kappa = 0) is not an EP
        if sd.min_singular_value >= tol.tau_defect:
            continue
        w = sd.eigenvalues
        best = (np.inf, 0, 1)
        for i in range(w.size):
            for j in range(i + 1, w.size):
                d = abs(w[i] - w[j])
                if d < best[0]:
                    best = (d, i, j)
        _, i, j = best
        lam_c = (w[i] + w[j]) / 2.0
        # block size at the collision: run the chain builder if possible
        block_size = 2
        try:
            jd = jordan_chains(H, sd, tol)
            block_size = max(
                (size for lam_b, size in jd.block_structure if abs(lam_b - lam_c) < 1e-3 * sd.hnorm),
                default=2,
            )
        except (JordanResidualError, np.linalg.LinAlgError):
            pass
        out.append(
            EPLocation(
                ratio=float(ratio),
                eigenvalue=complex(lam_c),
                colliding_indices=(int(i), int(j)),
                block_size=int(block_size),
            )
        )
    return out
