"""Expectation values, mean spin, squeezing parameters, and the
uncertainty-product diagnostic.

Expectations go through the metric prescription (coordinates and
observables carried into the D-weighted A_S frame), normalized by the
state's metric norm; by construction these agree with standard quantum
mechanics in the Hermitian limit.  The squeezing frame follows the
one-axis-twisting construction: z' along the mean spin, x' the
transverse direction of minimal variance found in closed form from the
2x2 symmetrized covariance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .metric import MetricContext, s_inner_product, s_matrix_element
from .spin_core import SpinSystem

__all__ = [
    "SqueezingReport",
    "UncertaintyCheck",
    "expectation",
    "squeezing_report",
    "uncertainty_check",
]


@dataclass(frozen=True)
class SqueezingReport:
    """Minimal-variance frame and squeezing parameters of a state.

    frame rows are (n_x', n_y', n_z') with n_z' along the mean spin and
    n_x' the transverse direction minimizing the variance.  zeta2_x =
    2 Var(S_x') / |<S_z'>| (and likewise y'); dB columns are
    10 log10(zeta2), negative when squeezed.  uncertainty_product is
    Var(S_x') Var(S_y') / (|<S_z'>|^2 / 4) and is bounded below by 1.
    """

    frame: np.ndarray
    mean_spin: np.ndarray
    var_x: float
    var_y: float
    zeta2_x: float
    zeta2_y: float
    zeta2_x_db: float
    zeta2_y_db: float
    uncertainty_product: float


class UncertaintyCheck(NamedTuple):
    satisfies_bound: bool
    is_intelligent: bool


def expectation(
    state: np.ndarray,
    obs: np.ndarray,
    ctx: MetricContext,
    normalized: bool = True,
    imag_tol: float = 1e-8,
) -> float:
    """Metric expectation value <I|obs I>_S / <I|I>_S of a Hermitian obs.

    The imaginary part of the raw value is a health check for the
    metric/observable pairing; exceeding imag_tol (relative) raises.

    Raises
    ------
    ValueError
        For a non-Hermitian observable, a zero state, or an imaginary
        residual beyond imag_tol.
    """
    state = np.asarray(state, dtype=complex)
    nrm = np.linalg.norm(state)
    if nrm == 0.0:
        raise ValueError("state must be nonzero")
    val = s_matrix_element(state, obs, state, ctx)
    if normalized:
        # the state's norm through the same matrix-element prescription,
        # so <1> = 1 identically
        val = val / s_matrix_element(state, np.eye(state.size), state, ctx).real
    # health check: the residual is judged against the observable scale so
    # that legitimately vanishing expectation values do not trip it
    scale = float(np.linalg.norm(obs)) * (1.0 if normalized else float(nrm**2))
    if abs(val.imag) > imag_tol * max(abs(val), scale, 1e-30):
        raise ValueError(
            f"expectation value has imaginary residual {val.imag:.3e}; "
            "metric and observable are inconsistent"
        )
    return float(val.real)


def _transverse_seed(n_z: np.ndarray) -> np.ndarray:
    """Deterministic transverse axis: z-hat orthogonalized against n_z',
    falling back to x-hat at the poles."""
    zhat = np.array([0.0, 0.0, 1.0])
    seed = zhat - (zhat @ n_z) * n_z
    if np.linalg.norm(seed) < 1e-8:
        xhat = np.array([1.0, 0.0, 0.0])
        seed = xhat - (xhat @ n_z) * n_z
    return seed / np.linalg.norm(seed)


def squeezing_report(
    state: np.ndarray, ctx: MetricContext, sys: SpinSystem
) -> SqueezingReport:
    """Squeezing parameters in the minimal-variance frame of a state.

    The transverse covariance uses the symmetrized product
    (S_a S_b + S_b S_a)/2 - <S_a><S_b>; its closed-form eigenvalues give
    the minimal and maximal transverse variances and the rotation angle
    of the x' axis.

    Raises
    ------
    ValueError
        If the mean spin vanishes (frame undefined).
    """
    ops = (sys.sx, sys.sy, sys.sz)
    mean_spin = np.array([expectation(state, o, ctx) for o in ops])
    norm_mean = float(np.linalg.norm(mean_spin))
    if norm_mean < 1e-10:
        raise ValueError("mean spin vanishes; squeezing frame undefined")

    n_z = mean_spin / norm_mean
    n_a = _transverse_seed(n_z)
    n_b = np.cross(n_z, n_a)

    def spin_along(n):
        return n[0] * sys.sx + n[1] * sys.sy + n[2] * sys.sz

    S_a, S_b = spin_along(n_a), spin_along(n_b)
    ea = expectation(state, S_a, ctx)
    eb = expectation(state, S_b, ctx)
    caa = expectation(state, S_a @ S_a, ctx) - ea * ea
    cbb = expectation(state, S_b @ S_b, ctx) - eb * eb
    sym = (S_a @ S_b + S_b @ S_a) / 2.0
    cab = expectation(state, sym, ctx) - ea * eb

    mean_var = (caa + cbb) / 2.0
    rad = float(np.hypot((caa - cbb) / 2.0, cab))
    var_x = mean_var - rad
    var_y = mean_var + rad

    # rotation angle of the maximal direction; minimal is 90 deg away
    theta_min = 0.5 * np.arctan2(2.0 * cab, caa - cbb) + np.pi / 2.0
    n_x = np.cos(theta_min) * n_a + np.sin(theta_min) * n_b
    n_y = np.cross(n_z, n_x)

    zeta2_x = 2.0 * var_x / norm_mean
    zeta2_y = 2.0 * var_y / norm_mean
    product = (var_x * var_y) / (0.25 * norm_mean**2)
    return SqueezingReport(
        frame=np.vstack([n_x, n_y, n_z]),
        mean_spin=mean_spin,
        var_x=float(var_x),
        var_y=float(var_y),
        zeta2_x=float(zeta2_x),
        zeta2_y=float(zeta2_y),
        zeta2_x_db=float(10.0 * np.log10(zeta2_x)) if zeta2_x > 0 else -np.inf,
        zeta2_y_db=float(10.0 * np.log10(zeta2_y)) if zeta2_y > 0 else -np.inf,
        uncertainty_product=float(product),
    )


def uncertainty_check(
    report: SqueezingReport,
    tol_bound: float = 1e-9,
    tol_intelligent: float = 1e-2,
) -> UncertaintyCheck:
    """Heisenberg-bound status and intelligent-state detection.

    satisfies_bound: uncertainty product >= 1 - tol_bound.
    is_intelligent: the product sits at the bound within tol_intelligent
    while the x' component is strictly squeezed (zeta2_x < 1).
    """
    ok = report.uncertainty_product >= 1.0 - tol_bound
    intelligent = (
        abs(report.uncertainty_product - 1.0) < tol_intelligent
        and report.zeta2_x < 1.0
    )
    return UncertaintyCheck(satisfies_bound=ok, is_intelligent=intelligent)
