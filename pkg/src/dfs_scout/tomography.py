"""Reversed-trial state tomography.

An informationally complete set of product input states is sent through the
channel while a single fixed random state is projected onto at the output.
The resulting d^2 probabilities determine the (trace-normalized) adjoint
image of the output projector, which is reconstructed here by linear
inversion or by constrained maximum likelihood.  One input state measured
against the fixed projector with N shots counts as one measurement setting.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import qmath
from .channels import KrausChannel
from .qmath import DensityMatrix, EigenSystem, Ket
from .rng import SeedLike, as_generator

PROB_CLAMP = 1e-12          # likelihood clamp for log(0)
INFINITE = None             # sentinel for noiseless (N = infinity) runs

_RATIO_FLOOR = 1e-15        # avoids infinite eigenvalue ratios in diagnostics


class MleConvergenceError(RuntimeError):
    """Maximum-likelihood ascent did not converge within the iteration cap."""

    def __init__(self, message, best: np.ndarray, gradient_norm: float, iterations: int):
        super().__init__(message)
        self.best = best
        self.gradient_norm = gradient_norm
        self.iterations = iterations


class SettingsCounter:
    """Audit counter for measurement settings actually consumed.

    Thread-safe so worker pools can share one ledger.
    """

    def __init__(self):
        self.settings = 0
        self.events = 0
        self._lock = threading.Lock()

    def record(self, n_settings: int):
        with self._lock:
            self.settings += int(n_settings)
            self.events += 1


def _single_qubit_states() -> list[Ket]:
    zero = Ket(np.array([1.0, 0.0], dtype=complex))
    one = Ket(np.array([0.0, 1.0], dtype=complex))
    plus = Ket.normalized(np.array([1.0, 1.0], dtype=complex))
    plus_i = Ket.normalized(np.array([1.0, 1.0j], dtype=complex))
    return [zero, one, plus, plus_i]


def _hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal Hermitian operator basis: normalized identity, the
    diagonal generalized Gell-Mann matrices, then symmetric and antisymmetric
    off-diagonal pairs in row-major order."""
    mats = [np.eye(d, dtype=complex) / math.sqrt(d)]
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        for j in range(l):
            m[j, j] = 1.0
        m[l, l] = -l
        mats.append(m / math.sqrt(l * (l + 1)))
    for i in range(d):
        for j in range(i + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[i, j] = m[j, i] = 1.0 / math.sqrt(2.0)
            mats.append(m)
    for i in range(d):
        for j in range(i + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[i, j] = -1.0j / math.sqrt(2.0)
            m[j, i] = 1.0j / math.sqrt(2.0)
            mats.append(m)
    return np.stack(mats)


class InputStateSet:
    """The d^2 tomographic input states and the cached inversion machinery."""

    def __init__(self, states: Sequence[Ket]):
        kets = list(states)
        d = kets[0].d
        if len(kets) != d * d:
            raise ValueError(f"need d^2={d * d} states, got {len(kets)}")
        self.states = kets
        self.d = d
        self.kets = np.stack([s.amplitudes for s in kets])          # (K, d)
        self.basis = _hermitian_basis(d)                            # (K, d, d)
        # design matrix over the Hermitian basis: A[k, a] = tr(B_a tau_k)
        design = np.einsum("ki,aij,kj->ka", self.kets.conj(), self.basis, self.kets)
        self.design = np.ascontiguousarray(design.real)
        gram = np.abs(self.kets @ self.kets.conj().T) ** 2           # tr(tau_j tau_k)
        self.gram_condition = float(np.linalg.cond(gram))
        self.design_condition = float(np.linalg.cond(self.design))
        if not np.isfinite(self.design_condition) or self.design_condition > 1e12:
            raise ValueError("input states are not informationally complete")
        self.design_inverse = np.linalg.inv(self.design)

    def __len__(self) -> int:
        return len(self.states)


@lru_cache(maxsize=8)
def input_states(n_qubits: int) -> InputStateSet:
    """Canonical product set: all tensor products of |0>, |1>, |+>, |+i>,
    ordered with the first qubit's index varying slowest."""
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    singles = _single_qubit_states()
    states = singles
    for _ in range(n_qubits - 1):
        states = [a.tensor(b) for a in states for b in singles]
    return InputStateSet(states)


def _default_state_set(d: int) -> InputStateSet:
    n = d.bit_length() - 1
    if 2**n != d:
        raise ValueError(
            f"no canonical input set for d={d}; pass an explicit InputStateSet"
        )
    return input_states(n)


def forward_probabilities(
    channel: KrausChannel, projector: Ket, states: InputStateSet
) -> np.ndarray:
    """Born probabilities p_k = tr(|phi><phi| channel(tau_k)) for every input."""
    if projector.d != channel.d or states.d != channel.d:
        raise ValueError("dimension mismatch between channel, projector and inputs")
    # tau_k is rank one, so p_k = sum_m |<phi| K_m |psi_k>|^2
    amp = np.einsum("i,mij,kj->mk", projector.amplitudes.conj(), channel.kraus_stack, states.kets)
    probs = np.sum(np.abs(amp) ** 2, axis=0)
    if probs.min() < -1e-9 or probs.max() > 1.0 + 1e-9:
        raise ValueError("probabilities escaped [0, 1]; channel is not CPTP")
    return np.clip(probs, 0.0, 1.0)


def born_probabilities(rho: DensityMatrix, states: InputStateSet) -> np.ndarray:
    """p_k = <psi_k| rho |psi_k> — direct state tomography probabilities."""
    probs = np.einsum("ki,ij,kj->k", states.kets.conj(), rho.elements, states.kets).real
    return np.clip(probs, 0.0, 1.0)


def simulate_counts(probabilities: np.ndarray, n_shots: int, seed: SeedLike) -> np.ndarray:
    """Independent Binomial(N, p_k) draw per measurement setting."""
    probabilities = np.asarray(probabilities, dtype=float)
    if probabilities.min() < 0.0 or probabilities.max() > 1.0:
        raise ValueError("probabilities must lie in [0, 1]")
    if n_shots < 1:
        raise ValueError("shot count must be >= 1")
    rng = as_generator(seed)
    return rng.binomial(int(n_shots), probabilities)


@dataclass(frozen=True)
class InversionResult:
    rho: DensityMatrix
    raw: np.ndarray
    trace: float
    min_eigenvalue: float


def linear_invert(values: np.ndarray, states: InputStateSet) -> InversionResult:
    """Unique Hermitian solution of tr(sigma tau_k) = values[k].

    The raw solution is returned together with its physical repair:
    trace-normalized, negative eigenvalues clipped.  For noiseless
    probabilities of a valid state the repair is an exact no-op.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (len(states),):
        raise ValueError(f"expected {len(states)} values, got {values.shape}")
    coeffs = states.design_inverse @ values
    raw = np.einsum("a,aij->ij", coeffs, states.basis)
    rho, trace, min_eig = qmath.repair_density(raw)
    return InversionResult(rho=rho, raw=raw, trace=trace, min_eigenvalue=min_eig)


def log_likelihood(
    rho: DensityMatrix | np.ndarray,
    counts: np.ndarray,
    n_shots: int,
    states: InputStateSet,
) -> float:
    """Binomial log-likelihood of per-setting counts, with probabilities
    clamped away from 0 and 1."""
    mat = rho.elements if isinstance(rho, DensityMatrix) else np.asarray(rho)
    p = np.einsum("ki,ij,kj->k", states.kets.conj(), mat, states.kets).real
    p = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    counts = np.asarray(counts, dtype=float)
    return float(np.sum(counts * np.log(p) + (n_shots - counts) * np.log1p(-p)))


def _clip_normalize(mat: np.ndarray) -> np.ndarray | None:
    """Spectral projection onto the trace-one PSD set; None when the clipped
    spectrum has no weight left."""
    vals, vecs = np.linalg.eigh(0.5 * (mat + mat.conj().T))
    vals = np.clip(vals, 0.0, None)
    s = float(vals.sum())
    if s < 1e-12:
        return None
    vals /= s
    return (vecs * vals) @ vecs.conj().T


def mle_fit(
    counts: np.ndarray,
    n_shots: int,
    states: InputStateSet,
    tol: float = 1e-9,
    max_iterations: int = 10_000,
) -> DensityMatrix:
    """Maximum-likelihood state estimate by projected gradient ascent.

    Starts from the repaired linear inversion of the observed frequencies and
    climbs the binomial log-likelihood over the Hermitian trace-one PSD set,
    projecting by eigenvalue clipping.  Steps are accepted only when they
    improve the likelihood, so the result is never worse than the starting
    point.  Stops when the gain drops below `tol`.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.shape != (len(states),):
        raise ValueError(f"expected {len(states)} counts, got {counts.shape}")
    if counts.min() < 0 or counts.max() > n_shots:
        raise ValueError("counts must lie in [0, N]")

    try:
        sigma = linear_invert(counts / n_shots, states).rho.elements
    except ValueError:
        # degenerate inversion (e.g. all counts zero); start from the center
        sigma = np.eye(states.d, dtype=complex) / states.d
    ll = log_likelihood(sigma, counts, n_shots, states)
    step = 0.1
    grad_norm = 0.0
    for _ in range(max_iterations):
        p = np.einsum("ki,ij,kj->k", states.kets.conj(), sigma, states.kets).real
        p = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
        coeff = counts / p - (n_shots - counts) / (1.0 - p)
        grad = np.einsum("k,ki,kj->ij", coeff, states.kets, states.kets.conj()) / n_shots
        grad_norm = float(np.linalg.norm(grad))

        s = step
        accepted = None
        for _ in range(60):
            cand = _clip_normalize(sigma + s * grad)
            if cand is not None:
                ll_cand = log_likelihood(cand, counts, n_shots, states)
                if ll_cand > ll:
                    accepted = (cand, ll_cand, s)
                    break
            s *= 0.5
        if accepted is None:
            return DensityMatrix(sigma)
        gain = accepted[1] - ll
        sigma, ll = accepted[0], accepted[1]
        step = min(accepted[2] * 2.0, 1.0)
        if gain < tol:
            return DensityMatrix(sigma)
    raise MleConvergenceError(
        f"no convergence after {max_iterations} iterations",
        best=sigma,
        gradient_norm=grad_norm,
        iterations=max_iterations,
    )


@dataclass(frozen=True)
class TomographyTrial:
    """One reversed trial: a fixed output projector measured against the full
    input set, and everything derived from it."""

    projector: Ket
    shots: Optional[int]                      # None = noiseless
    method: str                               # "linear" | "mle"
    counts: Optional[np.ndarray]
    reconstructed: DensityMatrix
    eigensystem: EigenSystem
    diagnostics: dict = field(default_factory=dict)
    settings_used: int = 0

    def to_json_dict(self) -> dict:
        diag = dict(self.diagnostics)
        diag["warnings"] = list(diag.get("warnings", []))
        return {
            "projector": [[float(x.real), float(x.imag)] for x in self.projector.amplitudes],
            "shots": self.shots,
            "method": self.method,
            "counts": None if self.counts is None else [int(c) for c in self.counts],
            "eigenvalues": [float(v) for v in self.eigensystem.eigenvalues],
            "eigenvectors": [
                [[float(x.real), float(x.imag)] for x in vec.amplitudes]
                for vec in self.eigensystem.eigenvectors
            ],
            "diagnostics": diag,
            "settings_used": self.settings_used,
        }


def run_reversed_trial(
    channel: KrausChannel,
    projector: Ket,
    n_shots: Optional[int],
    seed: SeedLike = 0,
    method: str = "linear",
    states: Optional[InputStateSet] = None,
    counter: Optional[SettingsCounter] = None,
) -> TomographyTrial:
    """Send every tomographic input through the channel, project onto `projector`,
    and reconstruct the trace-normalized adjoint image of the projector.

    ``n_shots=None`` runs the noiseless limit (exact probabilities, linear
    inversion only); a finite shot count draws binomial counts per setting.
    Consumes exactly d^2 measurement settings.
    """
    if method not in ("linear", "mle"):
        raise ValueError(f"unknown reconstruction method {method!r}")
    if states is None:
        states = _default_state_set(channel.d)

    probs = forward_probabilities(channel, projector, states)
    if counter is not None:
        counter.record(len(states))

    warnings: list[str] = []
    if not channel.is_unital:
        warnings.append("channel is not unital: reconstruction trace renormalized")
    if not channel.is_self_adjoint:
        warnings.append(
            "channel is not self-adjoint: reconstruction is the adjoint image, "
            "not the reversed process"
        )

    if n_shots is INFINITE:
        if method == "mle":
            raise ValueError("maximum likelihood needs a finite shot count")
        counts = None
        inversion = linear_invert(probs, states)
        rho = inversion.rho
        diagnostics = {
            "trace_before_normalization": inversion.trace,
            "min_eigenvalue_before_repair": inversion.min_eigenvalue,
        }
    else:
        if n_shots < 1:
            raise ValueError("shot count must be >= 1")
        counts = simulate_counts(probs, n_shots, seed)
        frequencies = counts / float(n_shots)
        inversion = linear_invert(frequencies, states)
        diagnostics = {
            "trace_before_normalization": inversion.trace,
            "min_eigenvalue_before_repair": inversion.min_eigenvalue,
        }
        if method == "linear":
            rho = inversion.rho
        else:
            rho = mle_fit(counts, n_shots, states)

    system = qmath.eigh(rho)
    lam = system.eigenvalues
    ratio = float(lam[0] / max(lam[1], _RATIO_FLOOR)) if lam.size > 1 else float("inf")
    diagnostics["eigenvalue_ratio"] = min(ratio, 1e15)
    diagnostics["warnings"] = warnings

    return TomographyTrial(
        projector=projector,
        shots=n_shots,
        method=method if n_shots is not INFINITE else "linear",
        counts=counts,
        reconstructed=rho,
        eigensystem=system,
        diagnostics=diagnostics,
        settings_used=len(states),
    )


def tomograph_state(
    rho: DensityMatrix,
    n_shots: Optional[int],
    seed: SeedLike = 0,
    method: str = "linear",
    states: Optional[InputStateSet] = None,
    counter: Optional[SettingsCounter] = None,
) -> DensityMatrix:
    """Plain state tomography of `rho` with the canonical projector set.

    Used to measure output purities; noiseless mode returns `rho` itself.
    """
    if states is None:
        states = _default_state_set(rho.d)
    if n_shots is INFINITE:
        return rho
    probs = born_probabilities(rho, states)
    if counter is not None:
        counter.record(len(states))
    counts = simulate_counts(probs, n_shots, seed)
    if method == "mle":
        return mle_fit(counts, n_shots, states)
    return linear_invert(counts / float(n_shots), states).rho
