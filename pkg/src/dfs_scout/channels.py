"""CPTP channels in Kraus form.

Provides the sometimes-swap two-qubit channel, unitary dressing, a
block-dephasing family whose decoherence-free blocks are known by
construction, channel application and the Heisenberg-picture adjoint.

Synthetic constructors attach their true input-side decoherence-free
decomposition as ``input_dfs`` for test and harness use only; protocol code
never reads it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qmath import DensityMatrix, Ket, Subspace

COMPLETENESS_TOL = 1e-10
UNITARITY_TOL = 1e-10


def _swap_operator() -> np.ndarray:
    s = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for b in range(2):
            s[2 * b + a, 2 * a + b] = 1.0
    return s


def triplet_basis() -> list[Ket]:
    """|00>, (|01>+|10>)/sqrt2, |11> — the symmetric two-qubit states."""
    e = [Ket.basis_state(4, k) for k in range(4)]
    mid = Ket.normalized(e[1].amplitudes + e[2].amplitudes)
    return [e[0], mid, e[3]]


def singlet_state() -> Ket:
    """(|01>-|10>)/sqrt2 — the antisymmetric two-qubit state."""
    e1 = Ket.basis_state(4, 1)
    e2 = Ket.basis_state(4, 2)
    return Ket.normalized(e1.amplitudes - e2.amplitudes)


class KrausChannel:
    """A completely positive map given by a list of Kraus operators.

    Trace preservation (sum K^d K = I) is enforced at construction unless
    ``check_tp=False`` (used for adjoints of non-unital channels, which are
    completeness-relation maps rather than channels).
    """

    __slots__ = ("kraus_stack", "d", "label", "input_dfs", "_cache")

    def __init__(
        self,
        kraus_ops: Sequence[np.ndarray],
        label: str = "",
        *,
        check_tp: bool = True,
        input_dfs: tuple[Subspace, ...] | None = None,
    ):
        ops = [np.asarray(k, dtype=complex) for k in kraus_ops]
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        for k in ops:
            if k.shape != (d, d):
                raise ValueError("Kraus operators must be square and equal-sized")
        stack = np.stack(ops)
        if check_tp:
            acc = np.einsum("mji,mjk->ik", stack.conj(), stack)
            dev = float(np.max(np.abs(acc - np.eye(d))))
            if dev > COMPLETENESS_TOL:
                raise ValueError(f"Kraus operators are not trace preserving (deviation {dev:.3e})")
        stack.setflags(write=False)
        object.__setattr__(self, "kraus_stack", stack)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "label", label or f"channel(d={d})")
        object.__setattr__(self, "input_dfs", input_dfs)
        object.__setattr__(self, "_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("KrausChannel is immutable")

    @property
    def kraus_ops(self) -> list[np.ndarray]:
        return [self.kraus_stack[m] for m in range(self.kraus_stack.shape[0])]

    def apply_matrix(self, mat: np.ndarray) -> np.ndarray:
        """Sum_m K_m M K_m^d for an arbitrary operator M."""
        return np.einsum("mij,jk,mlk->il", self.kraus_stack, mat, self.kraus_stack.conj())

    def adjoint_matrix(self, mat: np.ndarray) -> np.ndarray:
        """Heisenberg picture: Sum_m K_m^d M K_m."""
        return np.einsum("mji,jk,mkl->il", self.kraus_stack.conj(), mat, self.kraus_stack)

    @property
    def is_trace_preserving(self) -> bool:
        if "tp" not in self._cache:
            acc = np.einsum("mji,mjk->ik", self.kraus_stack.conj(), self.kraus_stack)
            self._cache["tp"] = float(np.max(np.abs(acc - np.eye(self.d)))) < COMPLETENESS_TOL
        return self._cache["tp"]

    @property
    def is_unital(self) -> bool:
        if "unital" not in self._cache:
            img = self.apply_matrix(np.eye(self.d, dtype=complex))
            self._cache["unital"] = float(np.max(np.abs(img - np.eye(self.d)))) < 1e-9
        return self._cache["unital"]

    @property
    def is_self_adjoint(self) -> bool:
        """Whether the Schroedinger and Heisenberg actions coincide.

        Holds in particular when every Kraus operator is Hermitian, which is
        what makes the reversed-trial design reconstruct the same state a
        physically reversed process would produce.
        """
        if "selfadj" not in self._cache:
            d = self.d
            ok = True
            # the map is complex-linear, so the matrix units span all probes
            for i in range(d):
                for j in range(d):
                    probe = np.zeros((d, d), dtype=complex)
                    probe[i, j] = 1.0
                    fwd = self.apply_matrix(probe)
                    bwd = self.adjoint_matrix(probe)
                    if float(np.max(np.abs(fwd - bwd))) > 1e-9:
                        ok = False
                        break
                if not ok:
                    break
            self._cache["selfadj"] = ok
        return self._cache["selfadj"]

    def __repr__(self) -> str:
        return f"KrausChannel({self.label!r}, d={self.d}, m={self.kraus_stack.shape[0]})"


@dataclass(frozen=True)
class DressedChannelSpec:
    """An inner channel sandwiched between unitaries: rho -> U2 e(U1 rho U1^d) U2^d."""

    inner: KrausChannel
    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        d = self.inner.d
        for name, u in (("u1", self.u1), ("u2", self.u2)):
            u = np.asarray(u, dtype=complex)
            if u.shape != (d, d):
                raise ValueError(f"{name} has shape {u.shape}, expected {(d, d)}")
            dev = float(np.max(np.abs(u.conj().T @ u - np.eye(d))))
            if dev > UNITARITY_TOL:
                raise ValueError(f"{name} is not unitary (deviation {dev:.3e})")
            object.__setattr__(self, name, u)


@dataclass(frozen=True)
class BlockSpec:
    """Orthogonal blocks with inter-block coherence lambda.

    coherence=0 is complete inter-block decoherence; coherence=1 leaves the
    channel unitary.  Each block is decoherence-free by construction for any
    coherence value.
    """

    block_dims: tuple[int, ...]
    coherence: float = 0.0

    def __post_init__(self):
        dims = tuple(int(x) for x in self.block_dims)
        if not dims or any(x < 1 for x in dims):
            raise ValueError("block dimensions must be positive integers")
        if not (0.0 <= self.coherence <= 1.0):
            raise ValueError("coherence must lie in [0, 1]")
        object.__setattr__(self, "block_dims", dims)

    @property
    def d(self) -> int:
        return sum(self.block_dims)


def sswap(p: float) -> KrausChannel:
    """Sometimes-swap two-qubit channel: identity with probability 1-p, swap
    with probability p.  At p=0.5 the singlet is fully dephased from the
    triplet span."""
    if not (0.0 <= p <= 1.0):
        raise ValueError("swap probability must lie in [0, 1]")
    identity = np.eye(4, dtype=complex)
    swap = _swap_operator()
    ops = []
    if p < 1.0:
        ops.append(np.sqrt(1.0 - p) * identity)
    if p > 0.0:
        ops.append(np.sqrt(p) * swap)
    truth = (Subspace(triplet_basis()), Subspace([singlet_state()]))
    return KrausChannel(ops, label=f"sswap(p={p:g})", input_dfs=truth)


def dressed(spec: DressedChannelSpec) -> KrausChannel:
    """Compose unitary rotations around an inner channel: Kraus ops U2 K U1.

    The inner channel's decoherence-free blocks at the input become
    U1^d * block."""
    ops = [spec.u2 @ k @ spec.u1 for k in spec.inner.kraus_ops]
    truth = None
    if spec.inner.input_dfs is not None:
        u1d = spec.u1.conj().T
        truth = tuple(
            Subspace([Ket.normalized(u1d @ b.amplitudes) for b in sub.basis])
            for sub in spec.inner.input_dfs
        )
    return KrausChannel(ops, label=f"dressed({spec.inner.label})", input_dfs=truth)


def unitary_channel(u: np.ndarray, label: str = "unitary") -> KrausChannel:
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    dev = float(np.max(np.abs(u.conj().T @ u - np.eye(d))))
    if dev > UNITARITY_TOL:
        raise ValueError(f"matrix is not unitary (deviation {dev:.3e})")
    truth = (Subspace([Ket.basis_state(d, k) for k in range(d)]),)
    return KrausChannel([u], label=label, input_dfs=truth)


def block_dephasing(
    spec: BlockSpec,
    u1: np.ndarray | None = None,
    u2: np.ndarray | None = None,
    basis: np.ndarray | None = None,
) -> KrausChannel:
    """Channel that keeps each block intact and scales inter-block coherences
    by `spec.coherence`, dressed by optional unitaries:

        rho -> U2 [ lam*sigma + (1-lam) * sum_i P_i sigma P_i ] U2^d,
        sigma = U1 rho U1^d.

    `basis` (a d x d unitary, default identity) fixes the block basis: its
    consecutive column groups of sizes block_dims span the blocks.  The
    input-side decoherence-free subspaces are U1^d * span(block columns).
    """
    d = spec.d
    u1 = np.eye(d, dtype=complex) if u1 is None else np.asarray(u1, dtype=complex)
    u2 = np.eye(d, dtype=complex) if u2 is None else np.asarray(u2, dtype=complex)
    basis = np.eye(d, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    for name, u in (("u1", u1), ("u2", u2), ("basis", basis)):
        if u.shape != (d, d):
            raise ValueError(f"{name} has shape {u.shape}, expected {(d, d)}")
        dev = float(np.max(np.abs(u.conj().T @ u - np.eye(d))))
        if dev > UNITARITY_TOL:
            raise ValueError(f"{name} is not unitary (deviation {dev:.3e})")

    lam = spec.coherence
    ops = []
    if lam > 0.0:
        ops.append(np.sqrt(lam) * (u2 @ u1))
    blocks = []
    offset = 0
    u1d = u1.conj().T
    for dim in spec.block_dims:
        cols = basis[:, offset : offset + dim]
        if lam < 1.0:
            proj = cols @ cols.conj().T
            ops.append(np.sqrt(1.0 - lam) * (u2 @ proj @ u1))
        blocks.append(Subspace([Ket.normalized(u1d @ cols[:, j]) for j in range(dim)]))
        offset += dim

    if lam == 1.0:
        truth: tuple[Subspace, ...] = (
            Subspace([Ket.basis_state(d, k) for k in range(d)]),
        )
    else:
        truth = tuple(blocks)
    label = f"block(dims={list(spec.block_dims)}, coherence={lam:g})"
    return KrausChannel(ops, label=label, input_dfs=truth)


def apply(channel: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    """Apply the channel to a state: sum_m K_m rho K_m^d."""
    if rho.d != channel.d:
        raise ValueError(f"dimension mismatch: channel d={channel.d}, state d={rho.d}")
    return DensityMatrix(channel.apply_matrix(rho.elements))


def adjoint(channel: KrausChannel) -> KrausChannel:
    """Heisenberg-picture map O -> sum_m K_m^d O K_m.

    Satisfies tr(P * apply(ch, rho)) = tr(adjoint(ch)(P) * rho) for all rho
    and P.  Trace preserving only when the original channel is unital, so the
    result skips the completeness check.  For channels with Hermitian Kraus
    operators (e.g. sometimes-swap) the adjoint action equals the channel's.
    """
    ops = [k.conj().T for k in channel.kraus_ops]
    return KrausChannel(ops, label=f"adjoint({channel.label})", check_tp=False)
