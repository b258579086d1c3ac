import numpy as np
import pytest

from dfs_scout.channels import (
    BlockSpec,
    DressedChannelSpec,
    KrausChannel,
    adjoint,
    apply,
    block_dephasing,
    dressed,
    singlet_state,
    sswap,
    triplet_basis,
    unitary_channel,
)
from dfs_scout.qmath import (
    DensityMatrix,
    Ket,
    fidelity,
    haar_state,
    haar_unitary,
    purity,
    random_separable_pair,
)
from dfs_scout.rng import as_generator


def random_density(d, rng):
    weights = rng.dirichlet(np.ones(d))
    acc = np.zeros((d, d), dtype=complex)
    for w in weights:
        acc += w * haar_state(d, rng).projector()
    return DensityMatrix(acc)


def completeness_deviation(channel):
    acc = sum(k.conj().T @ k for k in channel.kraus_ops)
    return float(np.max(np.abs(acc - np.eye(channel.d))))


class TestSswap:
    def test_probability_out_of_range(self):
        with pytest.raises(ValueError):
            sswap(-0.1)
        with pytest.raises(ValueError):
            sswap(1.1)

    def test_p_zero_is_identity(self):
        ch = sswap(0.0)
        rng = as_generator(1)
        rho = random_density(4, rng)
        out = apply(ch, rho)
        assert np.max(np.abs(out.elements - rho.elements)) < 1e-12

    def test_half_swap_on_01(self):
        # direct arithmetic: (|01><01| + |10><10|) / 2
        ch = sswap(0.5)
        rho = apply(ch, DensityMatrix.pure(Ket.basis_state(4, 1)))
        expected = np.zeros((4, 4), dtype=complex)
        expected[1, 1] = expected[2, 2] = 0.5
        assert np.max(np.abs(rho.elements - expected)) < 1e-12

    def test_singlet_is_invariant(self):
        # the antisymmetric state picks up only a sign under swap: the
        # projector is unchanged and stays pure at any p
        s = singlet_state()
        for p in (0.3, 0.5, 0.9):
            out = apply(sswap(p), DensityMatrix.pure(s))
            assert np.max(np.abs(out.elements - s.projector())) < 1e-12
            assert purity(out) == pytest.approx(1.0, abs=1e-12)

    def test_decomposed_input_decoheres(self):
        # alpha*triplet + beta*singlet -> |alpha|^2 tt + |beta|^2 ss at p=0.5
        rng = as_generator(3)
        t = triplet_basis()[1]
        s = singlet_state()
        alpha, beta = 0.8, 0.6
        psi = Ket(alpha * t.amplitudes + beta * s.amplitudes)
        out = apply(sswap(0.5), DensityMatrix.pure(psi))
        expected = alpha**2 * t.projector() + beta**2 * s.projector()
        assert np.max(np.abs(out.elements - expected)) < 1e-12

    def test_completeness(self):
        for p in (0.0, 0.3, 0.5, 1.0):
            assert completeness_deviation(sswap(p)) < 1e-10

    def test_unital(self):
        out = apply(sswap(0.5), DensityMatrix.maximally_mixed(4))
        assert np.max(np.abs(out.elements - np.eye(4) / 4)) < 1e-10

    def test_triplet_span_is_decoherence_free(self):
        # purity preserved and coherences intact inside the triplet span
        rng = as_generator(5)
        basis = triplet_basis()
        for p in (0.2, 0.5, 0.8):
            ch = sswap(p)
            for _ in range(10):
                coeff = rng.standard_normal(3) + 1j * rng.standard_normal(3)
                vec = sum(c * b.amplitudes for c, b in zip(coeff, basis))
                v = Ket.normalized(vec)
                out = apply(ch, DensityMatrix.pure(v))
                assert purity(out) == pytest.approx(1.0, abs=1e-10)
                assert np.max(np.abs(out.elements - v.projector())) < 1e-10


class TestDressed:
    def test_identity_dressing_is_noop(self):
        inner = sswap(0.5)
        ch = dressed(DressedChannelSpec(inner, np.eye(4), np.eye(4)))
        rng = as_generator(2)
        rho = random_density(4, rng)
        assert np.max(np.abs(apply(ch, rho).elements - apply(inner, rho).elements)) < 1e-12

    def test_identity_inner_gives_unitary_channel(self):
        u1 = haar_unitary(4, 1)
        u2 = haar_unitary(4, 2)
        ch = dressed(DressedChannelSpec(unitary_channel(np.eye(4)), u1, u2))
        rng = as_generator(3)
        rho = random_density(4, rng)
        expected = (u2 @ u1) @ rho.elements @ (u2 @ u1).conj().T
        assert np.max(np.abs(apply(ch, rho).elements - expected)) < 1e-12

    def test_rotated_singlet_stays_pure(self):
        # the input-side 1D DFS of the dressed channel is U1^d |singlet>
        u1 = haar_unitary(4, 7)
        u2 = haar_unitary(4, 8)
        ch = dressed(DressedChannelSpec(sswap(0.5), u1, u2))
        state = Ket.normalized(u1.conj().T @ singlet_state().amplitudes)
        out = apply(ch, DensityMatrix.pure(state))
        assert purity(out) == pytest.approx(1.0, abs=1e-10)
        truth = [s for s in ch.input_dfs if s.k == 1][0].basis[0]
        assert fidelity(state, truth) == pytest.approx(1.0, abs=1e-12)

    def test_composition_identity(self):
        u1 = haar_unitary(4, 4)
        u2 = haar_unitary(4, 5)
        inner = sswap(0.5)
        ch = dressed(DressedChannelSpec(inner, u1, u2))
        rng = as_generator(6)
        for _ in range(10):
            rho = random_density(4, rng)
            inner_out = inner.apply_matrix(u1 @ rho.elements @ u1.conj().T)
            expected = u2 @ inner_out @ u2.conj().T
            assert np.max(np.abs(ch.apply_matrix(rho.elements) - expected)) < 1e-12

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError, match="unitary"):
            DressedChannelSpec(sswap(0.5), np.eye(4) * 2.0, np.eye(4))


class TestBlockDephasing:
    def test_matches_sswap_at_half(self):
        # (rho + S rho S)/2 equals dephasing between the triplet span and the
        # singlet; compare on the full matrix-unit basis
        cols = [b.amplitudes for b in triplet_basis()] + [singlet_state().amplitudes]
        basis = np.column_stack(cols)
        ch_block = block_dephasing(BlockSpec((3, 1), 0.0), basis=basis)
        ch_swap = sswap(0.5)
        for i in range(4):
            for j in range(4):
                unit = np.zeros((4, 4), dtype=complex)
                unit[i, j] = 1.0
                dev = np.max(np.abs(ch_block.apply_matrix(unit) - ch_swap.apply_matrix(unit)))
                assert dev < 1e-12

    def test_full_coherence_is_unitary(self):
        u1 = haar_unitary(4, 1)
        u2 = haar_unitary(4, 2)
        ch = block_dephasing(BlockSpec((2, 2), 1.0), u1=u1, u2=u2)
        rng = as_generator(9)
        rho = random_density(4, rng)
        u = u2 @ u1
        expected = u @ rho.elements @ u.conj().T
        assert np.max(np.abs(apply(ch, rho).elements - expected)) < 1e-12

    def test_rank_one_in_block_stays_pure(self):
        ch = block_dephasing(BlockSpec((2, 2), 0.0))
        v = Ket.normalized(np.array([1.0, 1.0j, 0, 0]))
        out = apply(ch, DensityMatrix.pure(v))
        assert purity(out) == pytest.approx(1.0, abs=1e-12)

    def test_blocks_are_decoherence_free_at_any_coherence(self):
        u1 = haar_unitary(4, 3)
        u2 = haar_unitary(4, 4)
        rng = as_generator(12)
        for lam in (0.0, 0.4, 1.0):
            ch = block_dephasing(BlockSpec((2, 2), lam), u1=u1, u2=u2)
            for sub in ch.input_dfs:
                for _ in range(5):
                    coeff = rng.standard_normal(sub.k) + 1j * rng.standard_normal(sub.k)
                    v = Ket.normalized(sub.matrix() @ coeff)
                    out = apply(ch, DensityMatrix.pure(v))
                    assert purity(out) == pytest.approx(1.0, abs=1e-10)

    def test_unital(self):
        ch = block_dephasing(BlockSpec((3, 1), 0.3), u1=haar_unitary(4, 5), u2=haar_unitary(4, 6))
        out = apply(ch, DensityMatrix.maximally_mixed(4))
        assert np.max(np.abs(out.elements - np.eye(4) / 4)) < 1e-10

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            BlockSpec((0, 4), 0.0)
        with pytest.raises(ValueError):
            BlockSpec((2, 2), 1.5)


class TestAdjoint:
    def test_sswap_adjoint_equals_channel(self):
        # identity and swap are Hermitian, so the adjoint action coincides
        ch = sswap(0.3)
        adj = adjoint(ch)
        rng = as_generator(1)
        m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert np.max(np.abs(adj.apply_matrix(m) - ch.apply_matrix(m))) < 1e-12
        assert ch.is_self_adjoint

    def test_unitary_adjoint_inverts(self):
        u = haar_unitary(4, 2)
        adj = adjoint(unitary_channel(u))
        rng = as_generator(2)
        m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert np.max(np.abs(adj.apply_matrix(m) - u.conj().T @ m @ u)) < 1e-12

    def test_trace_duality_on_random_triples(self):
        # oracle: both sides of tr(P ch(rho)) = tr(adjoint(ch)(P) rho)
        # computed independently
        rng = as_generator(77)
        channels = []
        for k in range(10):
            u1 = haar_unitary(4, 100 + k)
            u2 = haar_unitary(4, 200 + k)
            channels.append(dressed(DressedChannelSpec(sswap(rng.uniform()), u1, u2)))
            channels.append(block_dephasing(BlockSpec((2, 2), rng.uniform()), u1=u1, u2=u2))
        for i in range(100):
            ch = channels[i % len(channels)]
            rho = random_density(4, rng)
            proj = haar_state(4, rng).projector()
            lhs = np.trace(proj @ ch.apply_matrix(rho.elements))
            rhs = np.trace(adjoint(ch).apply_matrix(proj) @ rho.elements)
            assert abs(lhs - rhs) < 1e-12

    def test_non_self_adjoint_channel_flagged(self):
        # amplitude-damping-like channel on the first qubit: K are not Hermitian
        k0 = np.kron(np.array([[1, 0], [0, np.sqrt(0.5)]]), np.eye(2)).astype(complex)
        k1 = np.kron(np.array([[0, np.sqrt(0.5)], [0, 0]]), np.eye(2)).astype(complex)
        ch = KrausChannel([k0, k1], label="damping")
        assert not ch.is_self_adjoint
        assert not ch.is_unital
        assert ch.is_trace_preserving


class TestKrausChannel:
    def test_rejects_non_trace_preserving(self):
        with pytest.raises(ValueError, match="trace preserving"):
            KrausChannel([np.eye(4) * 0.9])

    def test_apply_validates_dimension(self):
        with pytest.raises(ValueError, match="mismatch"):
            apply(sswap(0.5), DensityMatrix.maximally_mixed(2))

    def test_output_is_valid_density(self):
        rng = as_generator(4)
        ch = dressed(DressedChannelSpec(sswap(0.7), haar_unitary(4, 1), haar_unitary(4, 2)))
        for _ in range(20):
            out = apply(ch, random_density(4, rng))
            vals = np.linalg.eigvalsh(out.elements)
            assert vals[0] > -1e-10
            assert np.trace(out.elements).real == pytest.approx(1.0, abs=1e-10)
