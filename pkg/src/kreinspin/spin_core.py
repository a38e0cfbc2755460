"""Collective-spin operators, model Hamiltonians, and coherent spin states.

Everything lives on the (2S+1)-dimensional Dicke space of a collective
pseudo-spin S = N/2.  The basis convention is ascending: basis index k
(k = 0 .. 2S) carries the S_z eigenvalue m = k - S, so |k=0> is the
lowest-weight state.  With this ordering a coherent spin state prepared
at polar angle theta0 = 0 points along -z, i.e. S_z |I> = -S |I>.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import linalg as la
from scipy.special import binom

__all__ = [
    "SpinSystem",
    "DissipativeOAT",
    "NVLipkin",
    "ModelParams",
    "CoherentState",
    "build_spin_system",
    "build_hamiltonian",
    "coherent_spin_state",
    "pt_transform",
]

BASIS_ASCENDING = "ascending-mz"


@dataclass(frozen=True)
class SpinSystem:
    """Workspace holding the collective spin matrices for magnitude S.

    Attributes
    ----------
    S : float
        Spin magnitude (integer or half-integer).
    dim : int
        Hilbert-space dimension, 2S+1.
    sx, sy, sz : ndarray
        Hermitian spin components; sz is real diagonal with entries
        ascending from -S to +S.
    basis_order : str
        Tag recording the ordering convention of the S_z basis.
    """

    S: float
    dim: int
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    basis_order: str = BASIS_ASCENDING


@dataclass(frozen=True)
class DissipativeOAT:
    """One-axis-twisting model with an anti-Hermitian pump 2i*kappa*S_x.

    H = -(omega/2) I - (lam/2) S_z^2 + 2i kappa S_x, all in units of lam.
    """

    omega: float
    lam: float
    kappa: float

    def __post_init__(self):
        for name in ("omega", "lam", "kappa"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"DissipativeOAT.{name} must be finite, got {v!r}")

    @property
    def ratio(self) -> float:
        """Coupling ratio kappa/lam."""
        if self.lam == 0:
            raise ValueError("kappa/lam undefined for lam = 0")
        return self.kappa / self.lam


@dataclass(frozen=True)
class NVLipkin:
    """OAT plus Lipkin interaction with single-spin line width gamma (MHz).

    H = (epsilon - i gamma) S_z + (chi/2) S_z^2 + v (S_x^2 - S_y^2).
    """

    epsilon: float
    gamma: float
    chi: float
    v: float

    def __post_init__(self):
        for name in ("epsilon", "gamma", "chi", "v"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"NVLipkin.{name} must be finite")


ModelParams = Union[DissipativeOAT, NVLipkin]


@dataclass(frozen=True)
class CoherentState:
    """Coherent spin state |I(theta0, phi0)> with S.n0 |I> = -S |I>.

    The direction n0 = (sin t cos p, sin t sin p, cos t) is the one the
    state is anti-aligned with; amplitudes are normalized to unit
    Euclidean norm.
    """

    theta0: float
    phi0: float
    amplitudes: np.ndarray
    norm_constant: float

    @property
    def direction(self) -> np.ndarray:
        """Unit vector n0 defined by (theta0, phi0)."""
        return np.array(
            [
                np.sin(self.theta0) * np.cos(self.phi0),
                np.sin(self.theta0) * np.sin(self.phi0),
                np.cos(self.theta0),
            ]
        )


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def build_spin_system(S) -> SpinSystem:
    """Construct S_x, S_y, S_z on the (2S+1)-dimensional space.

    Parameters
    ----------
    S : int or float
        Spin magnitude; 2S must be a non-negative integer.

    Returns
    -------
    SpinSystem
        Matrices satisfying [S_i, S_j] = i eps_ijk S_k and
        S_x^2 + S_y^2 + S_z^2 = S(S+1) I.
    """
    two_s = 2 * float(S)
    if two_s < 0 or abs(two_s - round(two_s)) > 1e-9:
        raise ValueError(f"2S must be a non-negative integer, got S={S!r}")
    dim = int(round(two_s)) + 1
    s_val = (dim - 1) / 2.0

    m = np.arange(dim) - s_val
    sz = np.diag(m).astype(complex)
    s_plus = np.zeros((dim, dim), dtype=complex)
    for k in range(dim - 1):
        s_plus[k + 1, k] = np.sqrt(s_val * (s_val + 1) - m[k] * (m[k] + 1))
    s_minus = s_plus.conj().T
    sx = (s_plus + s_minus) / 2.0
    sy = (s_plus - s_minus) / 2.0j
    return SpinSystem(
        S=s_val, dim=dim, sx=_readonly(sx), sy=_readonly(sy), sz=_readonly(sz)
    )


def build_hamiltonian(sys: SpinSystem, p: ModelParams) -> np.ndarray:
    """Assemble the model Hamiltonian as a dense complex matrix.

    DissipativeOAT gives a complex-symmetric matrix in the S_z basis;
    NVLipkin is complex symmetric as well but not PT invariant for
    epsilon != 0.
    """
    eye = np.eye(sys.dim)
    if isinstance(p, DissipativeOAT):
        return (
            -p.omega / 2.0 * eye
            - p.lam / 2.0 * (sys.sz @ sys.sz)
            + 2.0j * p.kappa * sys.sx
        )
    if isinstance(p, NVLipkin):
        return (
            (p.epsilon - 1j * p.gamma) * sys.sz
            + p.chi / 2.0 * (sys.sz @ sys.sz)
            + p.v * (sys.sx @ sys.sx - sys.sy @ sys.sy)
        )
    raise TypeError(f"unsupported model parameters: {type(p).__name__}")


def coherent_spin_state(sys: SpinSystem, theta0: float, phi0: float) -> CoherentState:
    """Prepare the coherent spin state anti-aligned with n0(theta0, phi0).

    Amplitudes are proportional to z^k binom(2S, k)^(1/2) with
    z = -exp(-i phi0) tan(theta0/2); the sign on z is fixed by the
    direction property (S.n0 + S)|I> = 0, which pins the relative phase
    between neighbouring S_z components.  theta0 = pi returns the
    highest-weight basis state directly (the continuous limit).

    Raises
    ------
    ValueError
        If theta0 lies outside [0, pi].
    """
    if not 0.0 <= theta0 <= np.pi:
        raise ValueError(f"theta0 must lie in [0, pi], got {theta0!r}")
    dim = sys.dim
    two_s = dim - 1
    amps = np.zeros(dim, dtype=complex)
    if abs(theta0 - np.pi) < 1e-12:
        amps[two_s] = 1.0
        return CoherentState(theta0, phi0, _readonly(amps), 1.0)

    z = -np.exp(-1j * phi0) * np.tan(theta0 / 2.0)
    k = np.arange(dim)
    amps = z**k * np.sqrt(binom(two_s, k))
    norm_constant = float(np.cos(theta0 / 2.0) ** two_s)
    amps = amps / np.linalg.norm(amps)
    return CoherentState(theta0, phi0, _readonly(amps), norm_constant)


def pt_transform(sys: SpinSystem, H: np.ndarray) -> np.ndarray:
    """Apply the combined parity / time-reversal map to a Hamiltonian.

    Parity acts as the identity on spin space; time reversal is the
    antiunitary T = exp(i pi S_y) K with K entrywise conjugation.  The
    return value is T P H P^-1 T^-1; a Hamiltonian is PT invariant iff
    the output equals the input.
    """
    H = np.asarray(H, dtype=complex)
    if H.shape != (sys.dim, sys.dim):
        raise ValueError(f"H must be {sys.dim}x{sys.dim}, got {H.shape}")
    u = la.expm(1j * np.pi * sys.sy)
    return u @ H.conj() @ u.conj().T
