"""Dense complex linear algebra and quantum-state primitives.

States, density matrices, eigendecompositions, Haar sampling and
Gram-Schmidt utilities for dimensions up to 16.  Everything is dense
numpy; objects are immutable after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .rng import SeedLike, as_generator

PHASE_EPS = 1e-8        # modulus threshold for the phase-reference component
NORM_TOL = 1e-10
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-8    # PSD slack tolerated without repair
REPAIR_LIMIT = 1e-6         # violations beyond this are construction errors
DEGENERACY_TOL = 1e-8


class DegenerateAverageError(ValueError):
    """Averaging two (near-)orthogonal states: the equal mixture has a
    degenerate top eigenvalue, so no preferred direction exists."""


def _canonical_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first component with modulus above
    PHASE_EPS is real and non-negative."""
    for x in vec:
        if abs(x) > PHASE_EPS:
            phase = x / abs(x)
            return vec / phase
    return vec


class Ket:
    """Unit-norm pure state with a canonical global phase.

    The canonical phase makes equal states compare equal component-wise,
    which keeps eigendecompositions and protocol outputs deterministic.
    """

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes: Sequence[complex] | np.ndarray):
        vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if vec.size == 0:
            raise ValueError("empty amplitude vector")
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"amplitudes are not unit norm (norm={norm!r})")
        vec = _canonical_phase(vec / norm)
        vec.setflags(write=False)
        object.__setattr__(self, "amplitudes", vec)

    def __setattr__(self, name, value):
        raise AttributeError("Ket is immutable")

    @classmethod
    def normalized(cls, amplitudes: Sequence[complex] | np.ndarray) -> "Ket":
        """Build from any nonzero vector, normalizing it first."""
        vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = float(np.linalg.norm(vec))
        if norm < 1e-300:
            raise ValueError("cannot normalize the zero vector")
        return cls(vec / norm)

    @classmethod
    def basis_state(cls, d: int, index: int) -> "Ket":
        vec = np.zeros(d, dtype=complex)
        vec[index] = 1.0
        return cls(vec)

    @property
    def d(self) -> int:
        return self.amplitudes.shape[0]

    def inner(self, other: "Ket") -> complex:
        """<self|other>."""
        if self.d != other.d:
            raise ValueError(f"dimension mismatch: {self.d} vs {other.d}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def tensor(self, other: "Ket") -> "Ket":
        return Ket(np.kron(self.amplitudes, other.amplitudes))

    def __repr__(self) -> str:
        return f"Ket({np.array2string(self.amplitudes, precision=4, suppress_small=True)})"


class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix.

    Eigenvalues slightly below zero (down to -REPAIR_LIMIT) are repaired by
    clipping and trace renormalization; anything worse is rejected.  Noisy
    reconstructions that routinely overshoot this window go through
    :func:`repair_density` instead.
    """

    __slots__ = ("elements",)

    def __init__(self, elements: np.ndarray):
        mat = np.asarray(elements, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {mat.shape}")
        dev = float(np.max(np.abs(mat - mat.conj().T)))
        if dev > HERMITICITY_TOL:
            raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
        mat = 0.5 * (mat + mat.conj().T)
        tr = float(mat.trace().real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace is {tr!r}, expected 1")
        lo = float(np.linalg.eigvalsh(mat)[0])
        if lo < EIGENVALUE_FLOOR:
            if lo < -REPAIR_LIMIT:
                raise ValueError(f"matrix is not PSD (min eigenvalue {lo:.3e})")
            mat = _clip_to_density(mat)
        mat.setflags(write=False)
        object.__setattr__(self, "elements", mat)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @classmethod
    def pure(cls, state: Ket) -> "DensityMatrix":
        return cls(state.projector())

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityMatrix":
        return cls(np.eye(d, dtype=complex) / d)

    @property
    def d(self) -> int:
        return self.elements.shape[0]

    def __repr__(self) -> str:
        return f"DensityMatrix(d={self.d})"


def _clip_to_density(mat: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues to zero and renormalize the trace."""
    vals, vecs = np.linalg.eigh(mat)
    vals = np.clip(vals, 0.0, None)
    s = float(vals.sum())
    if s <= 0.0:
        raise ValueError("matrix has no positive spectral weight")
    vals /= s
    return (vecs * vals) @ vecs.conj().T


def repair_density(mat: np.ndarray) -> tuple["DensityMatrix", float, float]:
    """Force an (approximately Hermitian) matrix into a valid DensityMatrix.

    Used on noisy linear inversions, where negative eigenvalues of any size
    are expected.  Returns (density, trace_before_normalization,
    min_eigenvalue_before_repair).
    """
    mat = np.asarray(mat, dtype=complex)
    mat = 0.5 * (mat + mat.conj().T)
    tr = float(mat.trace().real)
    if abs(tr) < 1e-12:
        raise ValueError("matrix trace is numerically zero; cannot normalize")
    mat = mat / tr
    lo = float(np.linalg.eigvalsh(mat)[0])
    return DensityMatrix(_clip_to_density(mat)), tr, lo


@dataclass(frozen=True)
class EigenSystem:
    """Eigendecomposition of a density matrix, sorted by descending eigenvalue."""

    eigenvalues: np.ndarray
    eigenvectors: tuple[Ket, ...]

    @property
    def pairs(self) -> list[tuple[float, Ket]]:
        return list(zip(self.eigenvalues.tolist(), self.eigenvectors))

    def reconstruct(self) -> np.ndarray:
        acc = np.zeros((self.eigenvectors[0].d,) * 2, dtype=complex)
        for lam, vec in zip(self.eigenvalues, self.eigenvectors):
            acc += lam * vec.projector()
        return acc


def eigh(rho: DensityMatrix | np.ndarray) -> EigenSystem:
    """Hermitian eigendecomposition with deterministic ordering.

    Eigenvalues are sorted descending; within a degenerate cluster
    (difference below 1e-12) eigenvectors are ordered lexicographically by
    their canonical-phase components, so repeated calls agree exactly.
    """
    mat = rho.elements if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    vals, vecs = np.linalg.eigh(mat)
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    kets = [Ket.normalized(vecs[:, j]) for j in order]

    # lexicographic tie-break inside degenerate clusters
    i = 0
    n = len(vals)
    while i < n:
        j = i + 1
        while j < n and vals[i] - vals[j] < 1e-12:
            j += 1
        if j - i > 1:
            block = sorted(
                range(i, j),
                key=lambda k: tuple((c.real, c.imag) for c in kets[k].amplitudes),
            )
            kets[i:j] = [kets[k] for k in block]
        i = j
    return EigenSystem(np.array(vals), tuple(kets))


class Subspace:
    """Orthonormal basis spanning a k-dimensional subspace of C^d."""

    __slots__ = ("basis",)

    def __init__(self, basis: Iterable[Ket]):
        kets = tuple(basis)
        if not kets:
            raise ValueError("a subspace needs at least one basis vector")
        d = kets[0].d
        for b in kets:
            if b.d != d:
                raise ValueError("basis vectors have mixed dimensions")
        for i in range(len(kets)):
            for j in range(i + 1, len(kets)):
                ov = abs(kets[i].inner(kets[j]))
                if ov >= 1e-8:
                    raise ValueError(f"basis vectors {i},{j} are not orthogonal (|<i|j>|={ov:.3e})")
        object.__setattr__(self, "basis", kets)

    def __setattr__(self, name, value):
        raise AttributeError("Subspace is immutable")

    @property
    def k(self) -> int:
        return len(self.basis)

    @property
    def d(self) -> int:
        return self.basis[0].d

    def matrix(self) -> np.ndarray:
        """d x k matrix with the basis as columns."""
        return np.column_stack([b.amplitudes for b in self.basis])

    def projector(self) -> np.ndarray:
        m = self.matrix()
        return m @ m.conj().T

    def __repr__(self) -> str:
        return f"Subspace(k={self.k}, d={self.d})"


def fidelity(a: Ket, b: Ket) -> float:
    """Squared overlap |<a|b>|^2; symmetric and global-phase invariant."""
    return abs(a.inner(b)) ** 2


def purity(rho: DensityMatrix) -> float:
    """tr(rho^2)."""
    m = rho.elements
    return float(np.real(np.trace(m @ m)))


def subspace_fidelity(a: Subspace, b: Subspace) -> float:
    """Mean squared cosine of the principal angles between two subspaces.

    1 iff the spans coincide, 0 iff they are orthogonal.  Requires equal
    dimension.
    """
    if a.k != b.k:
        raise ValueError(f"subspace dimensions differ: {a.k} vs {b.k}")
    if a.d != b.d:
        raise ValueError("ambient dimensions differ")
    overlap = a.matrix().conj().T @ b.matrix()
    return float(np.sum(np.abs(overlap) ** 2)) / a.k


def haar_state(d: int, seed: SeedLike) -> Ket:
    """Haar-uniform pure state: normalized i.i.d. standard complex Gaussians."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    rng = as_generator(seed)
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return Ket.normalized(z)


def haar_unitary(d: int, seed: SeedLike) -> np.ndarray:
    """Haar-distributed d x d unitary via QR with phase-corrected diagonal."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    rng = as_generator(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))
    return q


def random_separable_pair(seed: SeedLike) -> Ket:
    """Product of two independent Haar qubit states (d=4)."""
    rng = as_generator(seed)
    return haar_state(2, rng).tensor(haar_state(2, rng))


def gram_schmidt_residual(v: Ket, basis: Subspace) -> tuple[np.ndarray, float]:
    """Residual of v after projecting out the span of `basis`.

    Returns (residual vector, Euclidean norm).  A norm near zero means v is
    already in the span; a norm near one means v is orthogonal to it.
    """
    if v.d != basis.d:
        raise ValueError("dimension mismatch")
    residual = v.amplitudes.copy()
    for b in basis.basis:
        residual = residual - np.vdot(b.amplitudes, residual) * b.amplitudes
    return residual, float(np.linalg.norm(residual))


def state_average(v1: Ket, v2: Ket) -> Ket:
    """Principal eigenvector of the equal mixture (|v1><v1| + |v2><v2|)/2.

    Raises DegenerateAverageError when the two top eigenvalues coincide
    (orthogonal inputs), where the mixture carries no preferred direction.
    """
    if v1.d != v2.d:
        raise ValueError("dimension mismatch")
    mix = 0.5 * (v1.projector() + v2.projector())
    system = eigh(mix)
    if system.eigenvalues[0] - system.eigenvalues[1] < DEGENERACY_TOL:
        raise DegenerateAverageError(
            "equal mixture of the two states has a degenerate top eigenvalue"
        )
    return system.eigenvectors[0]


def orthogonal_complement(vectors: Sequence[Ket], d: int | None = None) -> list[Ket]:
    """Deterministic orthonormal basis of the complement of span(vectors).

    Completes against the computational basis in index order, keeping
    residuals with norm above 1e-6.
    """
    vecs = [v.amplitudes for v in vectors]
    if d is None:
        if not vecs:
            raise ValueError("need either vectors or an explicit dimension")
        d = vecs[0].shape[0]
    accumulated = list(vecs)
    out: list[Ket] = []
    for j in range(d):
        residual = np.zeros(d, dtype=complex)
        residual[j] = 1.0
        for b in accumulated:
            residual = residual - np.vdot(b, residual) * b
        norm = float(np.linalg.norm(residual))
        if norm > 1e-6:
            residual = residual / norm
            accumulated.append(residual)
            out.append(Ket(residual))
    expected = d - len(vecs)
    if len(out) != expected:
        raise ValueError(
            f"complement has dimension {len(out)}, expected {expected}; "
            "input vectors are likely not orthonormal"
        )
    return out
