"""Eigensystems, classification, Jordan chains, and EP location."""

import numpy as np
import pytest

from kreinspin import (
    AmbiguousPairingError,
    Classification,
    DissipativeOAT,
    JordanResidualError,
    Tolerances,
    build_hamiltonian,
    build_spin_system,
    classify_spectrum,
    count_real_eigenvalues,
    eigensystem,
    jordan_chains,
    locate_exceptional_points,
)

from conftest import oat_hamiltonian


def charpoly_coeffs(A):
    """Faddeev-LeVerrier characteristic polynomial (eig-free oracle)."""
    n = A.shape[0]
    eye = np.eye(n)
    coeffs = [1.0 + 0.0j]
    M = np.zeros_like(A, dtype=complex)
    for k in range(1, n + 1):
        M = A @ M + coeffs[-1] * eye
        coeffs.append(-np.trace(A @ M) / k)
    return np.array(coeffs)


class TestEigensystem:
    def test_hermitian_left_equals_right(self, rng):
        a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        H = a + a.conj().T
        sd = eigensystem(H)
        assert sd.classification == Classification.ALL_REAL
        # biorthonormal left system of a Hermitian matrix is the right one
        assert np.abs(sd.left_vectors - sd.right_vectors).max() < 1e-8

    def test_n10_strong_pump_single_real(self, sys10):
        H = oat_hamiltonian(sys10, 1.5)
        sd = eigensystem(H)
        n_real = sum(abs(w.imag) < 1e-9 * sd.hnorm for w in sd.eigenvalues)
        assert n_real == 1
        assert sd.classification == Classification.CONJUGATE_PAIRS

    def test_n4_between_eps_charpoly_oracle(self, sys4):
        # independent oracle: real-coefficient quintic via Faddeev-LeVerrier,
        # roots from the companion matrix
        H = oat_hamiltonian(sys4, 0.1)
        coeffs = charpoly_coeffs(H)
        assert np.abs(coeffs.imag).max() < 1e-10 * np.abs(coeffs).max()
        roots = np.roots(coeffs.real)
        n_real = int(np.sum(np.abs(roots.imag) < 1e-9 * np.linalg.norm(H)))
        assert n_real == 3
        sd = eigensystem(H)
        assert sd.classification == Classification.CONJUGATE_PAIRS
        assert len(sd.pair_map) == 1
        for r in roots:
            assert np.abs(sd.eigenvalues - r).min() < 1e-8

    def test_biorthonormality_random(self, rng):
        worst = 0.0
        for _ in range(100):
            n = int(rng.integers(2, 13))
            H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            sd = eigensystem(H)
            if sd.classification == Classification.DEFECTIVE:
                continue
            gram = sd.left_vectors.conj().T @ sd.right_vectors
            worst = max(worst, np.abs(gram - np.eye(n)).max())
        assert worst < 1e-10

    def test_left_eigenvalues_are_conjugates(self, rng):
        H = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        sd = eigensystem(H)
        wl = np.linalg.eigvals(H.conj().T)
        np.testing.assert_allclose(
            np.sort_complex(wl), np.sort_complex(sd.eigenvalues.conj()), atol=1e-9
        )
        # left vectors actually solve the adjoint eigenproblem
        for j in range(8):
            res = H.conj().T @ sd.left_vectors[:, j] - sd.eigenvalues[j].conj() * sd.left_vectors[:, j]
            assert np.linalg.norm(res) < 1e-8 * np.linalg.norm(sd.left_vectors[:, j])

    def test_reconstruction(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 11))
            H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            sd = eigensystem(H)
            if sd.classification == Classification.DEFECTIVE:
                continue
            recon = (sd.right_vectors * sd.eigenvalues) @ np.linalg.inv(sd.right_vectors)
            assert np.linalg.norm(recon - H) / sd.hnorm < 1e-9

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            eigensystem(np.array([[np.nan, 0], [0, 1.0]]))
        with pytest.raises(ValueError):
            eigensystem(np.zeros((2, 3)))


class TestClassification:
    def test_all_real_trivial(self):
        cls, pairs = classify_spectrum(np.array([1.0, 2.0, 3.0]), hnorm=1.0)
        assert cls == Classification.ALL_REAL
        assert pairs == ()

    def test_defective_overrides(self):
        w = np.array([1.25, 1.25, 0.754, 2.12 - 1.34j, 2.12 + 1.34j])
        cls, _ = classify_spectrum(w, hnorm=1.0, defective=True)
        assert cls == Classification.DEFECTIVE

    def test_general_complex(self):
        cls, pairs = classify_spectrum(np.array([1.0 + 1.0j, 2.0]), hnorm=1.0)
        assert cls == Classification.GENERAL_COMPLEX
        assert pairs == ()

    def test_ambiguous_pairing_raises(self):
        w = np.array([1 + 1j, 1 - 1j + 9e-10j, 1 - 1j - 9e-10j, 5.0, 6.0])
        with pytest.raises(AmbiguousPairingError):
            classify_spectrum(w, hnorm=1.0)

    def test_pair_map_orientation(self):
        cls, pairs = classify_spectrum(np.array([2.0 - 0.5j, 2.0 + 0.5j, 1.0]), hnorm=1.0)
        assert cls == Classification.CONJUGATE_PAIRS
        (j, i), = pairs
        assert pairs in (((1, 0),),)  # Im > 0 listed first


class TestJordan:
    def test_trivial_2x2_block(self):
        a = 0.7
        H = np.array([[a, 1.0], [0.0, a]], dtype=complex)
        sd = eigensystem(H)
        assert sd.classification == Classification.DEFECTIVE
        jd = jordan_chains(H, sd)
        np.testing.assert_allclose(jd.J, H, atol=1e-12)
        np.testing.assert_allclose(jd.P, np.eye(2), atol=1e-10)

    def test_ep1_block_structure(self, h4_ep1):
        sd = eigensystem(h4_ep1)
        assert sd.classification == Classification.DEFECTIVE
        jd = jordan_chains(h4_ep1, sd)
        sizes = sorted(s for _, s in jd.block_structure)
        assert sizes == [1, 1, 1, 2]
        lam2 = next(l for l, s in jd.block_structure if s == 2)
        assert abs(lam2 - 2.24) < 5e-3
        assert abs(lam2.imag) < 1e-6

    def test_ep2_block_structure(self, h4_ep2):
        sd = eigensystem(h4_ep2)
        jd = jordan_chains(h4_ep2, sd)
        lams = sorted(((l, s) for l, s in jd.block_structure), key=lambda t: t[0].real)
        assert [s for _, s in jd.block_structure] == [2, 1, 1, 1]
        lam2 = next(l for l, s in jd.block_structure if s == 2)
        assert abs(lam2 - 1.25) < 5e-3
        complex_ls = sorted(l.imag for l, s in jd.block_structure if abs(l.imag) > 1e-3)
        np.testing.assert_allclose(complex_ls, [-1.338, 1.338], atol=5e-3)

    def test_jordan_invariants(self, h4_ep1, h4_ep2):
        for H in (h4_ep1, h4_ep2):
            sd = eigensystem(H)
            jd = jordan_chains(H, sd)
            assert np.linalg.norm(H @ jd.P - jd.P @ jd.J) < 1e-7 * sd.hnorm
            # dual pairing of the vbar system with the left chain system is
            # bilinear (row-vector convention): vbar_k^T psi_j = delta_kj
            gram = jd.vbar.T @ jd.Pbar
            assert np.abs(gram - np.eye(5)).max() < 1e-8

    def test_reconstruction_defective(self, h4_ep1):
        sd = eigensystem(h4_ep1)
        jd = jordan_chains(h4_ep1, sd)
        recon = jd.P @ jd.J @ jd.Pinv
        assert np.linalg.norm(recon - h4_ep1) / sd.hnorm < 1e-7

    def test_unresolvable_cluster_raises(self):
        # split below the cluster band but huge against machine noise:
        # no usable rank gap, so the builder must refuse and advise
        H = np.diag([1.0, 1.0 + 8e-6]).astype(complex)
        sd = eigensystem(H)
        with pytest.raises(JordanResidualError):
            jordan_chains(H, sd)

    def test_degenerate_diagonalizable(self):
        H = np.diag([0.5, 0.5, 2.0]).astype(complex)
        sd = eigensystem(H)
        jd = jordan_chains(H, sd)
        assert sorted(s for _, s in jd.block_structure) == [1, 1, 1]
        assert jd.residual < 1e-12


class TestRealCount:
    def test_small_pump_all_real(self, sys10):
        counts = count_real_eigenvalues(5, [0.01])
        assert counts[0] == 11

    def test_even_n_at_least_one(self):
        grid = np.linspace(0.0, 3.0, 31)
        for n in (2, 4, 6):
            assert count_real_eigenvalues(n / 2, grid).min() >= 1

    def test_n4_transitions(self, eps_n4):
        ep1, ep2 = eps_n4[0].ratio, eps_n4[1].ratio
        counts = count_real_eigenvalues(2, [0.05, ep1 - 1e-4, ep1 + 1e-4, ep2 - 1e-4, ep2 + 1e-4])
        assert counts[0] == 5
        assert (counts[1], counts[2]) == (5, 3)
        assert (counts[3], counts[4]) == (3, 1)

    def test_odd_n_reaches_zero(self):
        assert count_real_eigenvalues(2.5, [3.0])[0] == 0


class TestEPLocator:
    def test_n4_published_values(self, eps_n4):
        assert abs(eps_n4[0].ratio - 0.0739815) < 1e-5
        assert abs(eps_n4[1].ratio - 0.375) < 1e-4
        assert eps_n4[0].block_size == 2
        assert eps_n4[1].block_size == 2

    def test_empty_window(self):
        assert locate_exceptional_points(2, (0.4, 0.5)) == []

    def test_hermitian_degeneracy_not_an_ep(self):
        # the kappa=0 point is degenerate but diagonalizable
        assert locate_exceptional_points(2, (0.0, 0.01)) == []

    def test_grid_refinement_stability(self):
        a = locate_exceptional_points(2, (0.05, 0.45), n_scan=100)
        b = locate_exceptional_points(2, (0.05, 0.45), n_scan=200)
        assert len(a) == len(b) == 2
        for ea, eb in zip(a, b):
            assert abs(ea.ratio - eb.ratio) < 1e-9

    def test_consistent_with_count_transitions(self):
        # every EP of the N=10 family must sit on a real-count step
        eps = locate_exceptional_points(5, (0.01, 1.2), n_scan=300)
        assert len(eps) >= 1
        for ep in eps:
            lo, hi = count_real_eigenvalues(5, [ep.ratio - 1e-4, ep.ratio + 1e-4])
            assert lo - hi == 2


class TestTolerances:
    def test_defaults(self):
        tol = Tolerances()
        assert tol.tau_real == tol.tau_pair == 1e-9
        assert tol.tau_defect == 1e-6
        assert tol.tau_jordan == 1e-7

    def test_positive_required(self):
        with pytest.raises(ValueError):
            Tolerances(tau_real=0.0)
