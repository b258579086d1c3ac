"""Decoherence-free subspace identification from reversed trials.

Two protocols are implemented.  The two-trial protocol targets channels with
a one-dimensional decohered direction: each reversed trial yields a pair of
dominant eigenvectors, and the eigenvector common to both trials is the 1D
DFS at the input.  The generalized protocol groups eigenvectors across
trials and grows each group's span by Gram-Schmidt until all subspaces but
one are known; the last is inferred as the orthogonal complement.

Both protocols see only measurement outcomes.  Ground-truth records attached
to synthetic channels are never consulted here.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import qmath
from .channels import KrausChannel, apply
from .qmath import DensityMatrix, DegenerateAverageError, Ket, Subspace
from .rng import SeedLike, as_generator, derive_generator
from .tomography import (
    InputStateSet,
    SettingsCounter,
    TomographyTrial,
    run_reversed_trial,
    tomograph_state,
)


@dataclass(frozen=True)
class ProtocolConfig:
    """Decision thresholds for the identification protocols.

    The defaults separate the clean regimes from the failure syndromes with
    wide margins; all of them can be overridden from the harness config.
    """

    eigenvalue_floor: float = 0.02      # eigenvalues below are treated as zero
    degeneracy_ratio_min: float = 1.5   # reject a trial when lam1/lam2 is below
    match_margin_min: float = 0.5       # reject a pair when F_best - F_second is below
    gs_null_threshold: float = 0.1      # Gram-Schmidt residual norm meaning "in span"
    group_overlap_min: float = 0.25     # squared projection needed to join a group
    max_extra_trials: int = 8
    syndromes_enabled: bool = True
    projector_mode: str = "separable"   # "separable" | "haar"

    def __post_init__(self):
        if not (0.0 < self.eigenvalue_floor < 1.0):
            raise ValueError("eigenvalue_floor must lie in (0, 1)")
        if self.degeneracy_ratio_min < 1.0:
            raise ValueError("degeneracy_ratio_min must be >= 1")
        if not (0.0 <= self.match_margin_min <= 1.0):
            raise ValueError("match_margin_min must lie in [0, 1]")
        if not (0.0 < self.gs_null_threshold < 1.0):
            raise ValueError("gs_null_threshold must lie in (0, 1)")
        if not (0.0 < self.group_overlap_min < 1.0):
            raise ValueError("group_overlap_min must lie in (0, 1)")
        if self.max_extra_trials < 0:
            raise ValueError("max_extra_trials must be >= 0")
        if self.projector_mode not in ("separable", "haar"):
            raise ValueError("projector_mode must be 'separable' or 'haar'")


@dataclass(frozen=True)
class SyndromeFlags:
    """Unreliability indicators for a set of trials and a selected pair."""

    degenerate_trial: tuple[bool, ...]
    ambiguous_match: bool
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class PairEvaluation:
    """Cross-trial eigenvector comparison for one pair of trials."""

    fidelity_table: np.ndarray
    best: tuple[int, int]
    f_largest: float
    f_second: float
    margin: float
    degenerate_a: bool
    degenerate_b: bool
    ambiguous: bool
    estimate: Optional[Ket]
    averaged: bool
    warnings: tuple[str, ...] = ()

    @property
    def clean(self) -> bool:
        return not (self.degenerate_a or self.degenerate_b or self.ambiguous)


@dataclass(frozen=True)
class ProtocolResult:
    success: bool
    dfs_1d: Optional[Ket] = None
    dfs_complement: Optional[Subspace] = None
    subspaces: tuple[Subspace, ...] = ()
    syndromes: Optional[SyndromeFlags] = None
    measurement_settings_used: int = 0
    trial_records: tuple[TomographyTrial, ...] = ()
    pair_fidelity_table: Optional[np.ndarray] = None
    early_exit: bool = False
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        def ket_json(k: Ket):
            return [[float(x.real), float(x.imag)] for x in k.amplitudes]

        return {
            "success": self.success,
            "dfs_1d": None if self.dfs_1d is None else ket_json(self.dfs_1d),
            "dfs_complement": None
            if self.dfs_complement is None
            else [ket_json(b) for b in self.dfs_complement.basis],
            "subspaces": [[ket_json(b) for b in sub.basis] for sub in self.subspaces],
            "syndromes": None
            if self.syndromes is None
            else {
                "degenerate_trial": list(self.syndromes.degenerate_trial),
                "ambiguous_match": self.syndromes.ambiguous_match,
                "warnings": list(self.syndromes.warnings),
            },
            "measurement_settings_used": self.measurement_settings_used,
            "early_exit": self.early_exit,
            "pair_fidelity_table": None
            if self.pair_fidelity_table is None
            else self.pair_fidelity_table.tolist(),
            "diagnostics": self.diagnostics,
            "trials": [t.to_json_dict() for t in self.trial_records],
        }


def draw_projector(d: int, rng: np.random.Generator, mode: str = "separable") -> Ket:
    """Random output projector: a product of Haar qubit states when the
    dimension allows it, otherwise a full-Haar state."""
    n = d.bit_length() - 1
    if mode == "separable" and 2**n == d:
        state = qmath.haar_state(2, rng)
        for _ in range(n - 1):
            state = state.tensor(qmath.haar_state(2, rng))
        return state
    return qmath.haar_state(d, rng)


def _above_floor(trial: TomographyTrial, floor: float) -> list[tuple[float, Ket]]:
    return [(lam, vec) for lam, vec in trial.eigensystem.pairs if lam > floor]


def _trial_degenerate(trial: TomographyTrial, config: ProtocolConfig) -> bool:
    """Near-equal dominant eigenvalues make the eigenbasis unreliable; fewer
    than two relevant eigenvalues means there is nothing to pair."""
    kept = _above_floor(trial, config.eigenvalue_floor)
    if len(kept) < 2:
        return True
    return kept[0][0] / kept[1][0] < config.degeneracy_ratio_min


def evaluate_pair(
    trial_a: TomographyTrial, trial_b: TomographyTrial, config: ProtocolConfig
) -> PairEvaluation:
    """Compare the relevant eigenvectors of two trials.

    The best cross-trial pair is the candidate 1D DFS; the gap to the second
    best fidelity is the match margin.  The candidate estimate is the average
    of the best pair unless the pair is too far apart to average, in which
    case the first member is returned unaveraged with a warning.
    """
    kept_a = _above_floor(trial_a, config.eigenvalue_floor)
    kept_b = _above_floor(trial_b, config.eigenvalue_floor)
    deg_a = _trial_degenerate(trial_a, config)
    deg_b = _trial_degenerate(trial_b, config)
    warnings: list[str] = []

    if not kept_a or not kept_b:
        table = np.zeros((max(len(kept_a), 1), max(len(kept_b), 1)))
        return PairEvaluation(
            fidelity_table=table,
            best=(0, 0),
            f_largest=0.0,
            f_second=0.0,
            margin=0.0,
            degenerate_a=deg_a,
            degenerate_b=deg_b,
            ambiguous=True,
            estimate=None,
            averaged=False,
            warnings=("no eigenvectors above the floor",),
        )

    table = np.empty((len(kept_a), len(kept_b)))
    for i, (_, va) in enumerate(kept_a):
        for j, (_, vb) in enumerate(kept_b):
            table[i, j] = qmath.fidelity(va, vb)

    flat = np.argsort(table, axis=None)[::-1]
    bi, bj = np.unravel_index(flat[0], table.shape)
    f_largest = float(table[bi, bj])
    f_second = float(table.flat[flat[1]]) if flat.size > 1 else 0.0
    margin = f_largest - f_second
    ambiguous = margin < config.match_margin_min

    va = kept_a[bi][1]
    vb = kept_b[bj][1]
    if f_largest > 0.5:
        estimate: Optional[Ket] = qmath.state_average(va, vb)
        averaged = True
    else:
        # averaging nearly-orthogonal states is meaningless; keep one member
        estimate = va
        averaged = False
        warnings.append("best pair fidelity <= 0.5; estimate left unaveraged")

    return PairEvaluation(
        fidelity_table=table,
        best=(int(bi), int(bj)),
        f_largest=f_largest,
        f_second=f_second,
        margin=margin,
        degenerate_a=deg_a,
        degenerate_b=deg_b,
        ambiguous=ambiguous,
        estimate=estimate,
        averaged=averaged,
        warnings=tuple(warnings),
    )


def detect_syndromes(
    trial_a: TomographyTrial, trial_b: TomographyTrial, config: ProtocolConfig
) -> SyndromeFlags:
    """Per-trial degeneracy flags plus the cross-trial ambiguity flag."""
    ev = evaluate_pair(trial_a, trial_b, config)
    return SyndromeFlags(
        degenerate_trial=(ev.degenerate_a, ev.degenerate_b),
        ambiguous_match=ev.ambiguous,
        warnings=ev.warnings,
    )


def _complement_subspace(state: Ket) -> Subspace:
    return Subspace(qmath.orthogonal_complement([state], state.d))


def identify_1d_dfs(
    channel: KrausChannel,
    n_shots: Optional[int],
    config: ProtocolConfig = ProtocolConfig(),
    seed: SeedLike = 0,
    states: Optional[InputStateSet] = None,
    counter: Optional[SettingsCounter] = None,
    initial_projectors: Sequence[Ket] = (),
    reconstruction: Optional[str] = None,
) -> ProtocolResult:
    """Locate a one-dimensional decohered direction with two reversed trials.

    Runs two trials with independent random projectors, pairs their dominant
    eigenvectors, and averages the best pair.  When a syndrome fires (a
    degenerate trial or an ambiguous match) additional projectors are drawn,
    up to ``config.max_extra_trials``, and pairing is retried over all clean
    trials, preferring the pair with the largest margin.  With syndromes
    disabled the first two trials decide unconditionally, which is the mode
    used for failure statistics.

    ``initial_projectors`` overrides the first drawn projectors, letting
    callers engineer specific trial conditions.  ``reconstruction`` defaults
    to linear inversion for noiseless runs and maximum likelihood otherwise.
    """
    if config.eigenvalue_floor >= 1.0 / channel.d:
        raise ValueError("eigenvalue_floor must be below 1/d")
    return _identify_with_method(
        channel, n_shots, config, seed, states, counter, initial_projectors, reconstruction
    )


def _identify_with_method(
    channel: KrausChannel,
    n_shots: Optional[int],
    config: ProtocolConfig,
    seed: SeedLike,
    states: Optional[InputStateSet],
    counter: Optional[SettingsCounter],
    initial_projectors: Sequence[Ket],
    reconstruction: Optional[str],
) -> ProtocolResult:
    d = channel.d
    method = reconstruction or ("linear" if n_shots is None else "mle")
    master = seed if isinstance(seed, int) else None

    def trial_rng(index: int) -> np.random.Generator:
        if master is not None:
            return derive_generator(master, index)
        return as_generator(seed)  # caller-supplied generator: sequential use

    def new_trial(index: int) -> TomographyTrial:
        rng = trial_rng(index)
        if index < len(initial_projectors):
            projector = initial_projectors[index]
        else:
            projector = draw_projector(d, rng, config.projector_mode)
        return run_reversed_trial(
            channel, projector, n_shots, seed=rng, method=method,
            states=states, counter=counter,
        )

    trials: list[TomographyTrial] = [new_trial(0), new_trial(1)]
    max_trials = 2 + config.max_extra_trials

    if not config.syndromes_enabled:
        ev = evaluate_pair(trials[0], trials[1], config)
        return _build_1d_result(trials, ev, (0, 1), config, retries=0)

    while True:
        candidates = []
        degenerate = [_trial_degenerate(t, config) for t in trials]
        clean_indices = [i for i, bad in enumerate(degenerate) if not bad]
        for ia in range(len(clean_indices)):
            for ib in range(ia + 1, len(clean_indices)):
                i, j = clean_indices[ia], clean_indices[ib]
                ev = evaluate_pair(trials[i], trials[j], config)
                if ev.clean and ev.f_largest > 0.5:
                    candidates.append((ev.margin, i, j, ev))
        if candidates:
            _, i, j, ev = max(candidates, key=lambda c: (c[0], -c[1], -c[2]))
            return _build_1d_result(trials, ev, (i, j), config, retries=len(trials) - 2)
        if len(trials) >= max_trials:
            return ProtocolResult(
                success=False,
                syndromes=SyndromeFlags(
                    degenerate_trial=tuple(degenerate),
                    ambiguous_match=True,
                    warnings=("no clean trial pair within the trial budget",),
                ),
                measurement_settings_used=sum(t.settings_used for t in trials),
                trial_records=tuple(trials),
                diagnostics={"retries": len(trials) - 2},
            )
        trials.append(new_trial(len(trials)))


def _build_1d_result(
    trials: list[TomographyTrial],
    ev: PairEvaluation,
    pair: tuple[int, int],
    config: ProtocolConfig,
    retries: int,
) -> ProtocolResult:
    degenerate = tuple(_trial_degenerate(t, config) for t in trials)
    flags = SyndromeFlags(
        degenerate_trial=degenerate,
        ambiguous_match=ev.ambiguous,
        warnings=ev.warnings,
    )
    estimate = ev.estimate
    complement = _complement_subspace(estimate) if estimate is not None else None
    return ProtocolResult(
        success=estimate is not None,
        dfs_1d=estimate,
        dfs_complement=complement,
        syndromes=flags,
        measurement_settings_used=sum(t.settings_used for t in trials),
        trial_records=tuple(trials),
        pair_fidelity_table=ev.fidelity_table,
        diagnostics={
            "chosen_pair": list(pair),
            "f_largest": ev.f_largest,
            "f_second": ev.f_second,
            "margin": ev.margin,
            "averaged": ev.averaged,
            "retries": retries,
        },
    )


def identify_without_averaging(
    channel: KrausChannel,
    n_shots: Optional[int],
    config: ProtocolConfig = ProtocolConfig(),
    seed: SeedLike = 0,
    n_trials: int = 3,
    states: Optional[InputStateSet] = None,
    counter: Optional[SettingsCounter] = None,
    reconstruction: Optional[str] = None,
) -> ProtocolResult:
    """Multi-trial variant used for purity verification.

    Several projectors are measured; the eigenvector most consistent across
    trials (the best cross-trial pair) is taken as the 1D decohered direction
    without averaging, and the large decoherence-free subspace is spanned by
    the remaining eigenvectors of that trial's eigenbasis.
    """
    d = channel.d
    method = reconstruction or ("linear" if n_shots is None else "mle")
    master = seed if isinstance(seed, int) else None
    trials: list[TomographyTrial] = []
    for index in range(n_trials):
        rng = derive_generator(master, index) if master is not None else as_generator(seed)
        projector = draw_projector(d, rng, config.projector_mode)
        trials.append(
            run_reversed_trial(
                channel, projector, n_shots, seed=rng, method=method,
                states=states, counter=counter,
            )
        )

    best: tuple[float, int, int, PairEvaluation] | None = None
    for i in range(len(trials)):
        for j in range(i + 1, len(trials)):
            ev = evaluate_pair(trials[i], trials[j], config)
            if best is None or ev.f_largest > best[0]:
                best = (ev.f_largest, i, j, ev)
    assert best is not None
    _, anchor, _, ev = best
    kept = _above_floor(trials[anchor], config.eigenvalue_floor)
    singlet_estimate = kept[ev.best[0]][1]

    # remaining eigenvectors of the anchor trial span the complement exactly
    rest = [
        vec
        for vec in trials[anchor].eigensystem.eigenvectors
        if qmath.fidelity(vec, singlet_estimate) < 0.5
    ]
    complement = Subspace(rest[: d - 1])

    degenerate = tuple(_trial_degenerate(t, config) for t in trials)
    return ProtocolResult(
        success=True,
        dfs_1d=singlet_estimate,
        dfs_complement=complement,
        syndromes=SyndromeFlags(degenerate, ev.ambiguous, ev.warnings),
        measurement_settings_used=sum(t.settings_used for t in trials),
        trial_records=tuple(trials),
        pair_fidelity_table=ev.fidelity_table,
        diagnostics={"anchor_trial": anchor, "f_largest": ev.f_largest},
    )


class _Group:
    """A growing orthonormal basis for one candidate subspace."""

    def __init__(self, first: Ket):
        self.vectors = [first]
        self.complete = False
        self.members = 1

    def span(self) -> Subspace:
        return Subspace(self.vectors)

    def squared_projection(self, v: Ket) -> float:
        return float(
            sum(abs(np.vdot(b.amplitudes, v.amplitudes)) ** 2 for b in self.vectors)
        )

    def absorb(self, v: Ket, null_threshold: float) -> None:
        """Gram-Schmidt v against the basis; a null residual completes the
        group, anything else extends the basis."""
        self.members += 1
        if self.complete:
            return
        residual, norm = qmath.gram_schmidt_residual(v, self.span())
        if norm < null_threshold:
            self.complete = True
        else:
            self.vectors.append(Ket.normalized(residual))


def discover_subspaces(
    channel: KrausChannel,
    n_shots: Optional[int],
    config: ProtocolConfig = ProtocolConfig(),
    seed: SeedLike = 0,
    states: Optional[InputStateSet] = None,
    counter: Optional[SettingsCounter] = None,
    reconstruction: Optional[str] = None,
) -> ProtocolResult:
    """General subspace discovery by eigenvector grouping and Gram-Schmidt.

    Each reversed trial contributes its relevant eigenvectors.  A vector
    joins the group with the largest squared projection onto the group's
    span, provided that projection exceeds ``group_overlap_min``; otherwise
    it seeds a new group.  A group is complete once an incoming member's
    Gram-Schmidt residual is null.  The protocol stops when at most one
    group is incomplete — the remaining subspace is the orthogonal
    complement of the completed ones — or when a single trial shows d
    relevant eigenvectors, which already rules out any multi-dimensional
    decoherence-free subspace.
    """
    d = channel.d
    if config.eigenvalue_floor >= 1.0 / d:
        raise ValueError("eigenvalue_floor must be below 1/d")
    method = reconstruction or ("linear" if n_shots is None else "mle")
    master = seed if isinstance(seed, int) else None
    max_trials = 1 + config.max_extra_trials

    trials: list[TomographyTrial] = []
    groups: list[_Group] = []
    warnings: list[str] = []

    for index in range(max_trials):
        rng = derive_generator(master, index) if master is not None else as_generator(seed)
        projector = draw_projector(d, rng, config.projector_mode)
        trial = run_reversed_trial(
            channel, projector, n_shots, seed=rng, method=method,
            states=states, counter=counter,
        )
        trials.append(trial)
        kept = _above_floor(trial, config.eigenvalue_floor)

        if index == 0 and len(kept) == d:
            return ProtocolResult(
                success=True,
                subspaces=tuple(Subspace([vec]) for _, vec in kept),
                syndromes=SyndromeFlags((False,), False, ()),
                measurement_settings_used=trial.settings_used,
                trial_records=tuple(trials),
                early_exit=True,
                diagnostics={
                    "note": "d relevant eigenvectors in one trial: no "
                    "decoherence-free subspace of dimension > 1 exists"
                },
            )

        for _, vec in kept:  # eigenvalue-descending order keeps this deterministic
            if groups:
                projections = [g.squared_projection(vec) for g in groups]
                gi = int(np.argmax(projections))
                if projections[gi] > config.group_overlap_min:
                    groups[gi].absorb(vec, config.gs_null_threshold)
                    continue
            groups.append(_Group(vec))

        complete = [g for g in groups if g.complete]
        incomplete = [g for g in groups if not g.complete]
        complete_dim = sum(len(g.vectors) for g in complete)

        if complete and complete_dim == d and incomplete:
            warnings.append("redundant fragment groups dropped at full coverage")
            incomplete = []
        if incomplete and not complete and len(groups) == 1:
            continue  # a single unfinished group proves nothing yet

        if not incomplete and groups and complete_dim == d:
            return _build_discovery_result(trials, complete, None, warnings, config)
        if len(incomplete) == 1 and len(groups) >= 2 and complete_dim < d:
            inferred = qmath.orthogonal_complement(
                [b for g in complete for b in g.vectors], d
            )
            leftover = incomplete[0]
            for b in leftover.vectors:
                overlap = sum(
                    abs(np.vdot(c.amplitudes, b.amplitudes)) ** 2 for c in inferred
                )
                if overlap < 1.0 - max(config.gs_null_threshold**2, 1e-9):
                    warnings.append(
                        "incomplete group is not contained in the inferred complement"
                    )
                    break
            return _build_discovery_result(
                trials, complete, Subspace(inferred), warnings, config
            )

    return ProtocolResult(
        success=False,
        subspaces=tuple(g.span() for g in groups if g.complete),
        syndromes=SyndromeFlags(
            tuple(_trial_degenerate(t, config) for t in trials),
            False,
            tuple(warnings + ["trial budget exhausted with incomplete groups"]),
        ),
        measurement_settings_used=sum(t.settings_used for t in trials),
        trial_records=tuple(trials),
        diagnostics={"incomplete_groups": sum(1 for g in groups if not g.complete)},
    )


def _build_discovery_result(
    trials: list[TomographyTrial],
    complete: list[_Group],
    inferred: Optional[Subspace],
    warnings: list[str],
    config: ProtocolConfig,
) -> ProtocolResult:
    subs = [g.span() for g in complete]
    if inferred is not None:
        subs.append(inferred)
    # enforce mutual orthogonality of the reported spans (noise can leave
    # residual cross-group overlap); order by descending dimension
    subs = _orthogonalize_subspaces(subs)
    subs.sort(key=lambda s: (-s.k, tuple((c.real, c.imag) for c in s.basis[0].amplitudes)))
    dims = [s.k for s in subs]
    return ProtocolResult(
        success=True,
        subspaces=tuple(subs),
        syndromes=SyndromeFlags(
            tuple(_trial_degenerate(t, config) for t in trials), False, tuple(warnings)
        ),
        measurement_settings_used=sum(t.settings_used for t in trials),
        trial_records=tuple(trials),
        diagnostics={"dimensions": dims, "inferred_last": inferred is not None},
    )


def _orthogonalize_subspaces(subs: list[Subspace]) -> list[Subspace]:
    out: list[Subspace] = []
    accumulated: list[Ket] = []
    for sub in subs:
        vectors = []
        for b in sub.basis:
            residual = b.amplitudes.copy()
            for prev in accumulated + vectors:
                residual = residual - np.vdot(prev.amplitudes, residual) * prev.amplitudes
            norm = float(np.linalg.norm(residual))
            if norm < 1e-6:
                raise ValueError("subspaces overlap too strongly to orthogonalize")
            vectors.append(Ket.normalized(residual))
        out.append(Subspace(vectors))
        accumulated.extend(vectors)
    return out


def sample_in_subspace(sub: Subspace, rng: np.random.Generator) -> Ket:
    """Haar-uniform pure state within span(sub): complex Gaussian coefficients
    on the basis, normalized."""
    coeff = rng.standard_normal(sub.k) + 1j * rng.standard_normal(sub.k)
    return Ket.normalized(sub.matrix() @ coeff)


def verify_average_purity(
    channel: KrausChannel,
    sub: Subspace,
    samples: int,
    n_shots: Optional[int],
    seed: SeedLike = 0,
    separable: bool = False,
    states: Optional[InputStateSet] = None,
    counter: Optional[SettingsCounter] = None,
    reconstruction: str = "linear",
) -> float:
    """Mean output purity over random pure states drawn inside `sub`.

    With finite ``n_shots`` each output state is tomographed (d^2 settings
    per sample) and the purity of the reconstruction is used, matching what
    an experiment measures.  ``separable=True`` draws product states instead,
    which is the whole-space baseline; it requires `sub` to be the full
    space of a qubit register.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    if separable:
        n = sub.d.bit_length() - 1
        if sub.k != sub.d or 2**n != sub.d:
            raise ValueError("separable sampling needs the full space of a qubit register")
    rng = as_generator(seed)
    total = 0.0
    for _ in range(samples):
        if separable:
            state = qmath.haar_state(2, rng)
            for _ in range(sub.d.bit_length() - 2):
                state = state.tensor(qmath.haar_state(2, rng))
        else:
            state = sample_in_subspace(sub, rng)
        rho_out = apply(channel, DensityMatrix.pure(state))
        estimate = tomograph_state(
            rho_out, n_shots, seed=rng, method=reconstruction,
            states=states, counter=counter,
        )
        total += qmath.purity(estimate)
    return total / samples


def verify_unitarity(channel: KrausChannel, sub: Subspace, tol: float = 1e-6) -> bool:
    """Check the channel restricted to `sub` is one unitary (an isometry).

    Purity of basis images alone is not enough: coherences between basis
    vectors must also survive.  The candidate isometry is extracted from the
    basis images and pairwise superposition probes, then validated against
    the channel on real and imaginary superpositions.
    """
    basis = sub.basis
    k = len(basis)

    images = []
    for b in basis:
        out = channel.apply_matrix(b.projector())
        system = qmath.eigh(out)
        if system.eigenvalues[0] < 1.0 - tol:
            return False
        images.append(system.eigenvectors[0])

    # pin relative phases from (b0 + bj)/sqrt(2) probes
    columns = [images[0].amplitudes]
    for j in range(1, k):
        probe = Ket.normalized(basis[0].amplitudes + basis[j].amplitudes)
        out = channel.apply_matrix(probe.projector())
        system = qmath.eigh(out)
        if system.eigenvalues[0] < 1.0 - tol:
            return False
        top = system.eigenvectors[0].amplitudes
        a0 = np.vdot(images[0].amplitudes, top)
        aj = np.vdot(images[j].amplitudes, top)
        if abs(a0) < 1e-6 or abs(aj) < 1e-6:
            return False
        phase = (aj / abs(aj)) * (abs(a0) / a0)
        columns.append(phase * images[j].amplitudes)

    isometry = np.column_stack(columns)           # d x k, maps sub -> image
    sub_matrix = sub.matrix()

    probes = [b.amplitudes for b in basis]
    for i in range(k):
        for j in range(i + 1, k):
            probes.append((basis[i].amplitudes + basis[j].amplitudes) / np.sqrt(2))
            probes.append((basis[i].amplitudes + 1j * basis[j].amplitudes) / np.sqrt(2))
    for vec in probes:
        rho_in = np.outer(vec, vec.conj())
        out = channel.apply_matrix(rho_in)
        coeff = sub_matrix.conj().T @ vec          # coordinates within sub
        mapped = isometry @ coeff
        predicted = np.outer(mapped, mapped.conj())
        if float(np.max(np.abs(out - predicted))) > tol:
            return False
    return True
