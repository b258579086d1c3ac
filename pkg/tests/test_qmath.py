import numpy as np
import pytest

from dfs_scout import qmath
from dfs_scout.qmath import (
    DegenerateAverageError,
    DensityMatrix,
    Ket,
    Subspace,
    eigh,
    fidelity,
    gram_schmidt_residual,
    haar_state,
    haar_unitary,
    orthogonal_complement,
    purity,
    random_separable_pair,
    state_average,
    subspace_fidelity,
)
from dfs_scout.rng import as_generator, derive_generator


def ket(*amps):
    return Ket.normalized(np.array(amps, dtype=complex))


def random_density(d, rng):
    """Random mixture of Haar states with Dirichlet weights."""
    weights = rng.dirichlet(np.ones(d))
    acc = np.zeros((d, d), dtype=complex)
    for w in weights:
        acc += w * haar_state(d, rng).projector()
    return DensityMatrix(acc)


class TestKet:
    def test_rejects_non_unit_norm(self):
        with pytest.raises(ValueError):
            Ket(np.array([1.0, 1.0]))

    def test_canonical_phase_reference_is_real_nonneg(self):
        raw = np.exp(1.3j) * np.array([0.6, 0.8j])
        v = Ket(raw)
        assert v.amplitudes[0].imag == pytest.approx(0.0, abs=1e-15)
        assert v.amplitudes[0].real > 0

    def test_canonical_phase_skips_tiny_leading_component(self):
        raw = np.exp(0.7j) * np.array([1e-12, 1.0])
        v = Ket.normalized(raw)
        assert v.amplitudes[1].imag == pytest.approx(0.0, abs=1e-12)
        assert v.amplitudes[1].real > 0

    def test_tensor_and_basis(self):
        v = Ket.basis_state(2, 0).tensor(Ket.basis_state(2, 1))
        assert np.allclose(v.amplitudes, [0, 1, 0, 0])

    def test_immutable(self):
        v = ket(1, 0)
        with pytest.raises(AttributeError):
            v.amplitudes = np.array([0, 1])


class TestDensityMatrix:
    def test_rejects_non_hermitian(self):
        m = np.array([[0.5, 0.5], [0.1, 0.5]], dtype=complex)
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix(m)

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(np.eye(2, dtype=complex))

    def test_small_negative_eigenvalue_is_repaired(self):
        eps = 5e-7
        m = np.diag([1.0 + eps, -eps]).astype(complex)
        rho = DensityMatrix(m)
        assert np.linalg.eigvalsh(rho.elements)[0] >= -1e-12

    def test_large_negative_eigenvalue_rejected(self):
        m = np.diag([1.05, -0.05]).astype(complex)
        with pytest.raises(ValueError, match="PSD"):
            DensityMatrix(m)

    def test_repair_density_handles_noisy_input(self):
        m = np.diag([1.10, -0.15]).astype(complex)
        rho, trace, min_eig = qmath.repair_density(m)
        assert trace == pytest.approx(0.95)
        assert min_eig < -0.1
        vals = np.linalg.eigvalsh(rho.elements)
        assert vals[0] >= -1e-12
        assert np.trace(rho.elements).real == pytest.approx(1.0)


class TestFidelity:
    def test_identity_case(self):
        v = haar_state(4, 1)
        assert fidelity(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_basis_states(self):
        assert fidelity(ket(0, 1, 0, 0), ket(0, 0, 1, 0)) == pytest.approx(0.0, abs=1e-15)

    def test_direct_inner_product(self):
        assert fidelity(ket(1, 0), ket(1, 1)) == pytest.approx(0.5, abs=1e-12)

    def test_global_phase_invariance(self):
        rng = as_generator(7)
        for _ in range(50):
            a = haar_state(4, rng)
            b = haar_state(4, rng)
            phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
            a2 = Ket.normalized(phase * a.amplitudes)
            assert fidelity(a2, b) == pytest.approx(fidelity(a, b), abs=1e-12)
            assert fidelity(b, a) == pytest.approx(fidelity(a, b), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fidelity(ket(1, 0), ket(1, 0, 0))


class TestPurity:
    def test_pure_state(self):
        rho = DensityMatrix.pure(haar_state(4, 3))
        assert purity(rho) == pytest.approx(1.0, abs=1e-12)

    def test_maximally_mixed(self):
        assert purity(DensityMatrix.maximally_mixed(4)) == pytest.approx(0.25)

    def test_equal_two_state_mixture(self):
        # equal mixture of two orthogonal states has purity 1/2
        t = ket(0, 1, 1, 0)
        s = ket(0, 1, -1, 0)
        rho = DensityMatrix(0.5 * t.projector() + 0.5 * s.projector())
        assert purity(rho) == pytest.approx(0.5, abs=1e-12)


class TestEigh:
    def test_diagonal(self):
        system = eigh(DensityMatrix(np.diag([0.3, 0.7]).astype(complex)))
        assert np.allclose(system.eigenvalues, [0.7, 0.3])
        assert np.allclose(np.abs(system.eigenvectors[0].amplitudes), [0, 1])
        assert np.allclose(np.abs(system.eigenvectors[1].amplitudes), [1, 0])

    def test_degenerate_pair_is_orthonormal_and_deterministic(self):
        rho = DensityMatrix.maximally_mixed(2)
        s1 = eigh(rho)
        s2 = eigh(rho)
        assert np.allclose(s1.eigenvalues, [0.5, 0.5])
        assert abs(s1.eigenvectors[0].inner(s1.eigenvectors[1])) < 1e-10
        for a, b in zip(s1.eigenvectors, s2.eigenvectors):
            assert np.array_equal(a.amplitudes, b.amplitudes)

    def test_reconstruction_identity_on_random_matrices(self):
        # oracle: rebuild sum(lam * v v^dagger) by direct multiplication
        rng = as_generator(11)
        worst = 0.0
        for _ in range(1000):
            rho = random_density(4, rng)
            system = eigh(rho)
            rebuilt = system.reconstruct()
            worst = max(worst, float(np.max(np.abs(rebuilt - rho.elements))))
            assert abs(system.eigenvalues.sum() - 1.0) < 1e-8
        assert worst < 1e-8

    def test_eigenvectors_orthonormal(self):
        rng = as_generator(5)
        rho = random_density(6, rng)
        system = eigh(rho)
        mat = np.column_stack([v.amplitudes for v in system.eigenvectors])
        assert np.max(np.abs(mat.conj().T @ mat - np.eye(6))) < 1e-10


class TestHaarSampling:
    def test_same_seed_reproduces(self):
        assert np.array_equal(haar_state(4, 42).amplitudes, haar_state(4, 42).amplitudes)
        assert np.array_equal(haar_unitary(4, 42), haar_unitary(4, 42))
        assert np.array_equal(
            random_separable_pair(42).amplitudes, random_separable_pair(42).amplitudes
        )

    def test_unitarity(self):
        u = haar_unitary(8, 3)
        assert np.max(np.abs(u.conj().T @ u - np.eye(8))) < 1e-10

    def test_zero_dimension_rejected(self):
        with pytest.raises(ValueError):
            haar_state(0, 1)
        with pytest.raises(ValueError):
            haar_unitary(0, 1)

    def test_mean_fidelity_is_inverse_dimension(self):
        # oracle: E|<a|b>|^2 = 1/D for Haar pairs; D=2 here
        rng = as_generator(123)
        n = 100_000
        a = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
        b = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        b /= np.linalg.norm(b, axis=1, keepdims=True)
        f = np.abs(np.sum(a.conj() * b, axis=1)) ** 2
        assert abs(f.mean() - 0.5) < 0.01

    def test_separable_pair_is_product(self):
        v = random_separable_pair(9)
        rho = v.projector().reshape(2, 2, 2, 2)
        reduced = np.trace(rho, axis1=1, axis2=3)
        assert np.trace(reduced @ reduced).real == pytest.approx(1.0, abs=1e-10)


class TestGramSchmidt:
    def test_in_span_gives_null_residual(self):
        basis = Subspace([ket(1, 0, 0), ket(0, 1, 0)])
        v = ket(1, 1, 0)
        _, norm = gram_schmidt_residual(v, basis)
        assert norm <= 1e-10

    def test_orthogonal_gives_unit_residual(self):
        basis = Subspace([ket(1, 0, 0)])
        _, norm = gram_schmidt_residual(ket(0, 0, 1), basis)
        assert norm == pytest.approx(1.0, abs=1e-12)

    def test_half_overlap(self):
        basis = Subspace([ket(1, 0)])
        _, norm = gram_schmidt_residual(ket(1, 1), basis)
        assert norm == pytest.approx(1 / np.sqrt(2), abs=1e-12)

    def test_residual_orthogonal_to_basis(self):
        rng = as_generator(17)
        for _ in range(50):
            vectors = [haar_state(5, rng)]
            basis = Subspace(
                [Ket.normalized(r) for r in [vectors[0].amplitudes]]
                + [Ket.normalized(v) for v in [orthogonal_complement(vectors, 5)[0].amplitudes]]
            )
            v = haar_state(5, rng)
            residual, norm = gram_schmidt_residual(v, basis)
            if norm > 1e-12:
                for b in basis.basis:
                    assert abs(np.vdot(b.amplitudes, residual)) < 1e-10


class TestStateAverage:
    def test_identical_inputs(self):
        v = haar_state(4, 2)
        assert fidelity(state_average(v, v), v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_inputs_raise(self):
        with pytest.raises(DegenerateAverageError):
            state_average(ket(1, 0), ket(0, 1))

    def test_known_two_dim_case(self):
        # oracle: closed-form top eigenvector of [[0.75, 0.25], [0.25, 0.25]]
        a, b, c = 0.75, 0.25, 0.25
        lam = (a + c) / 2 + np.sqrt(((a - c) / 2) ** 2 + b**2)
        expected = Ket.normalized(np.array([b, lam - a], dtype=complex))
        out = state_average(ket(1, 0), ket(1, 1))
        assert fidelity(out, expected) == pytest.approx(1.0, abs=1e-12)
        # the closed form is exactly (cos 22.5deg, sin 22.5deg)
        assert np.allclose(
            expected.amplitudes.real, [np.cos(np.pi / 8), np.sin(np.pi / 8)], atol=1e-12
        )

    def test_equal_fidelity_to_both_inputs(self):
        rng = as_generator(31)
        for _ in range(50):
            v1 = haar_state(4, rng)
            v2 = haar_state(4, rng)
            if fidelity(v1, v2) < 1e-6:
                continue
            avg = state_average(v1, v2)
            assert fidelity(avg, v1) == pytest.approx(fidelity(avg, v2), abs=1e-8)


class TestSubspace:
    def test_rejects_non_orthogonal(self):
        with pytest.raises(ValueError, match="orthogonal"):
            Subspace([ket(1, 0), ket(1, 1)])

    def test_projector_idempotent(self):
        sub = Subspace([ket(1, 0, 0, 0), ket(0, 0, 1, 0)])
        p = sub.projector()
        assert np.max(np.abs(p @ p - p)) < 1e-8

    def test_subspace_fidelity_extremes(self):
        a = Subspace([ket(1, 0, 0), ket(0, 1, 0)])
        b = Subspace([ket(0, 1, 0), ket(1, 0, 0)])
        c = Subspace([ket(0, 0, 1)])
        assert subspace_fidelity(a, b) == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(ValueError):
            subspace_fidelity(a, c)
        d = Subspace([ket(0, 0, 1), ket(1, 1, 0)])
        # one direction shared out of two
        assert subspace_fidelity(a, d) == pytest.approx(0.5, abs=1e-12)

    def test_orthogonal_complement(self):
        v = haar_state(4, 8)
        comp = orthogonal_complement([v], 4)
        assert len(comp) == 3
        for c in comp:
            assert abs(v.inner(c)) < 1e-10
        again = orthogonal_complement([v], 4)
        for a, b in zip(comp, again):
            assert np.array_equal(a.amplitudes, b.amplitudes)


class TestRngSplitting:
    def test_derived_streams_are_deterministic_and_distinct(self):
        a1 = derive_generator(9, 0).standard_normal(4)
        a2 = derive_generator(9, 0).standard_normal(4)
        b = derive_generator(9, 1).standard_normal(4)
        assert np.array_equal(a1, a2)
        assert not np.array_equal(a1, b)
