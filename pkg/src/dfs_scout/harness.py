"""Batch experiment commands.

Each command reads an :class:`ExperimentConfig`, runs a protocol ensemble,
and writes CSV/JSON outputs.  All randomness is derived from the master seed
by counter-based splits keyed on (command, point index, run index), so a
rerun with the same config produces byte-identical files regardless of the
worker-pool size.  Rows are sorted before writing.

Every CSV starts with a comment line carrying the config hash and artifact
version, followed by the header row.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import analytics, protocol, qmath
from .channels import KrausChannel
from .config import ARTIFACT_VERSION, ConfigError, ExperimentConfig
from .protocol import ProtocolConfig
from .qmath import Ket, Subspace
from .rng import derive_generator, derive_seed
from .tomography import SettingsCounter, TomographyTrial, run_reversed_trial

# command namespaces for seed derivation
_NS_IDENTIFY = 1
_NS_SWEEP_POINTS = 2
_NS_SWEEP_BANDS = 3
_NS_PURITY = 4
_NS_FAILURE = 5
_NS_DISCOVER = 6


def _pool_size() -> int:
    raw = os.environ.get("DFS_SCOUT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _pmap(fn: Callable, items: Sequence):
    workers = _pool_size()
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _fmt_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value).replace(",", ";").replace("\n", " ")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence], cfg: ExperimentConfig):
    lines = [f"# config_hash={cfg.config_hash()} artifact_version={ARTIFACT_VERSION}"]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt_cell(c) for c in row))
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n")


def _true_1d_direction(channel: KrausChannel) -> Optional[Ket]:
    if channel.input_dfs is None:
        return None
    ones = [sub for sub in channel.input_dfs if sub.k == 1]
    if len(ones) != 1:
        return None
    return ones[0].basis[0]


def _amp_phase(ket: Ket) -> tuple[np.ndarray, np.ndarray]:
    """Component moduli and phases; the canonical global phase already makes
    the reference component's phase zero."""
    return np.abs(ket.amplitudes), np.angle(ket.amplitudes)


def _audit(counter: SettingsCounter, expected: int):
    if counter.settings != expected:
        raise RuntimeError(
            f"settings ledger mismatch: counter={counter.settings}, reported={expected}"
        )


def _run_trials(
    channel: KrausChannel,
    cfg: ExperimentConfig,
    pconfig: ProtocolConfig,
    n_trials: int,
    namespace: tuple[int, ...],
    n_shots,
    method: str,
    counter: SettingsCounter,
) -> list[TomographyTrial]:
    def one(index: int) -> TomographyTrial:
        rng = derive_generator(cfg.master_seed, *namespace, index)
        projector = protocol.draw_projector(channel.d, rng, pconfig.projector_mode)
        return run_reversed_trial(
            channel, projector, n_shots, seed=rng, method=method, counter=counter
        )

    return _pmap(one, range(n_trials))


def _pair_rows(
    trials: list[TomographyTrial],
    pconfig: ProtocolConfig,
    truth: Optional[Ket],
) -> list[dict]:
    rows = []
    index = 0
    for i in range(len(trials)):
        for j in range(i + 1, len(trials)):
            ev = protocol.evaluate_pair(trials[i], trials[j], pconfig)
            est = ev.estimate
            fid = float("nan")
            if est is not None and truth is not None:
                fid = qmath.fidelity(est, truth)
            rows.append(
                {
                    "pair_index": index,
                    "trial_a": i,
                    "trial_b": j,
                    "evaluation": ev,
                    "estimate": est,
                    "truth_fidelity": fid,
                    "accepted": ev.clean,
                }
            )
            index += 1
    return rows


def cmd_identify(cfg: ExperimentConfig) -> dict:
    """Run K reversed trials, analyze all K(K-1)/2 pairs, and export the
    per-pair reconstructed 1D direction (amplitudes and phases)."""
    pconfig = cfg.protocol_config()
    channel = cfg.build_channel()
    d = channel.d
    method = cfg.method()
    counter = SettingsCounter()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    trials = _run_trials(
        channel, cfg, pconfig, cfg.trials, (_NS_IDENTIFY,), cfg.shots, method, counter
    )
    settings_used = sum(t.settings_used for t in trials)
    _audit(counter, settings_used)
    truth = _true_1d_direction(channel)
    pairs = _pair_rows(trials, pconfig, truth)

    trial_header = (
        ["trial", "shots", "method"]
        + [f"projector_re_{k}" for k in range(d)]
        + [f"projector_im_{k}" for k in range(d)]
        + [f"eigenvalue_{k}" for k in range(d)]
        + ["eigenvalue_ratio", "trace_before_normalization", "degenerate", "warnings"]
    )
    trial_rows = []
    for idx, t in enumerate(trials):
        amps = t.projector.amplitudes
        trial_rows.append(
            [idx, -1 if t.shots is None else t.shots, t.method]
            + [a.real for a in amps]
            + [a.imag for a in amps]
            + [float(v) for v in t.eigensystem.eigenvalues]
            + [
                t.diagnostics["eigenvalue_ratio"],
                t.diagnostics["trace_before_normalization"],
                protocol._trial_degenerate(t, pconfig),
                ";".join(t.diagnostics.get("warnings", [])) or "-",
            ]
        )
    write_csv(out / "trials.csv", trial_header, trial_rows, cfg)

    pair_header = (
        ["pair_index", "trial_a", "trial_b", "f_largest", "f_second", "margin",
         "degenerate_a", "degenerate_b", "ambiguous", "accepted", "averaged"]
        + [f"amp_{k}" for k in range(d)]
        + [f"phase_{k}" for k in range(d)]
        + ["truth_fidelity"]
    )
    pair_rows = []
    for row in pairs:
        ev = row["evaluation"]
        if row["estimate"] is not None:
            amps, phases = _amp_phase(row["estimate"])
        else:
            amps = np.full(d, float("nan"))
            phases = np.full(d, float("nan"))
        pair_rows.append(
            [row["pair_index"], row["trial_a"], row["trial_b"],
             ev.f_largest, ev.f_second, ev.margin,
             ev.degenerate_a, ev.degenerate_b, ev.ambiguous,
             row["accepted"], ev.averaged]
            + list(amps)
            + list(phases)
            + [row["truth_fidelity"]]
        )
    write_csv(out / "dfs_components.csv", pair_header, pair_rows, cfg)

    accepted = [r for r in pairs if r["accepted"] and r["estimate"] is not None]
    best = None
    pool = accepted or [r for r in pairs if r["estimate"] is not None]
    if pool:
        best = max(pool, key=lambda r: r["evaluation"].margin)
    accepted_fids = [
        r["truth_fidelity"] for r in accepted if not math.isnan(r["truth_fidelity"])
    ]
    summary = {
        "artifact_version": ARTIFACT_VERSION,
        "config_hash": cfg.config_hash(),
        "channel": channel.label,
        "d": d,
        "trials": cfg.trials,
        "pairs": len(pairs),
        "accepted_pairs": len(accepted),
        "settings_used": settings_used,
        "mean_truth_fidelity_accepted": (
            float(np.mean(accepted_fids)) if accepted_fids else None
        ),
        "best_pair": None
        if best is None
        else {
            "trial_a": best["trial_a"],
            "trial_b": best["trial_b"],
            "f_largest": best["evaluation"].f_largest,
            "f_second": best["evaluation"].f_second,
            "truth_fidelity": None
            if math.isnan(best["truth_fidelity"])
            else best["truth_fidelity"],
            "amplitudes": list(map(float, _amp_phase(best["estimate"])[0])),
            "phases": list(map(float, _amp_phase(best["estimate"])[1])),
        },
        "trial_records": [t.to_json_dict() for t in trials],
    }
    write_json(out / "result.json", summary)

    return {
        "exit_code": 0 if accepted else 3,
        "files": {
            "result": str(out / "result.json"),
            "trials": str(out / "trials.csv"),
            "dfs_components": str(out / "dfs_components.csv"),
        },
        "summary": summary,
    }


def cmd_sweep_swap(cfg: ExperimentConfig, p_list: Optional[Sequence[float]] = None) -> dict:
    """Per swap probability: pair-fidelity ensemble at the configured shot
    count plus 63%/95% bands from a separate noiseless ensemble."""
    pconfig = cfg.protocol_config()
    method = cfg.method()
    p_values = sorted(cfg.sweep_swap.p_list if p_list is None else [float(p) for p in p_list])
    n_pairs = cfg.trials * (cfg.trials - 1) // 2
    if n_pairs < 50:
        raise ConfigError(
            f"sweep needs >= 50 pairs per point for the bands; trials={cfg.trials} gives {n_pairs}"
        )
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    counter = SettingsCounter()

    sweep_rows = []
    band_rows = []
    expected_settings = 0
    for pi, p in enumerate(p_values):
        channel = cfg.build_channel(parameter_override=p)
        truth = _true_1d_direction(channel)

        trials = _run_trials(
            channel, cfg, pconfig, cfg.trials, (_NS_SWEEP_POINTS, pi), cfg.shots, method, counter
        )
        expected_settings += sum(t.settings_used for t in trials)
        for row in _pair_rows(trials, pconfig, truth):
            ev = row["evaluation"]
            sweep_rows.append(
                [p, row["pair_index"], row["trial_a"], row["trial_b"],
                 row["truth_fidelity"], ev.f_largest, ev.f_second, row["accepted"]]
            )

        noiseless = _run_trials(
            channel, cfg, pconfig, cfg.trials, (_NS_SWEEP_BANDS, pi), None, "linear", counter
        )
        expected_settings += sum(t.settings_used for t in noiseless)
        fids = np.array(
            [
                r["truth_fidelity"]
                for r in _pair_rows(noiseless, pconfig, truth)
                if not math.isnan(r["truth_fidelity"])
            ]
        )
        bands = analytics.confidence_band(fids, (0.63, 0.95))
        for level in (0.63, 0.95):
            lo, hi = bands[level]
            band_rows.append([p, level, lo, hi])

    _audit(counter, expected_settings)
    write_csv(
        out / "sweep.csv",
        ["p", "pair_index", "trial_a", "trial_b", "fidelity_truth", "f_largest", "f_second", "accepted"],
        sweep_rows,
        cfg,
    )
    write_csv(out / "bands.csv", ["p", "level", "lo", "hi"], band_rows, cfg)
    return {
        "exit_code": 0,
        "files": {"sweep": str(out / "sweep.csv"), "bands": str(out / "bands.csv")},
        "summary": {"points": len(p_values), "pairs_per_point": n_pairs},
    }


def cmd_purity_sweep(cfg: ExperimentConfig, p_list: Optional[Sequence[float]] = None) -> dict:
    """Per swap probability: identify the large decoherence-free subspace with
    the three-trial unaveraged variant, then measure its average output purity
    against the whole-space separable baseline."""
    pconfig = cfg.protocol_config()
    method = cfg.method()
    p_values = sorted(cfg.purity_sweep.p_list if p_list is None else [float(p) for p in p_list])
    samples = cfg.purity_sweep.samples
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    counter = SettingsCounter()

    rows = []
    expected_settings = 0
    for pi, p in enumerate(p_values):
        channel = cfg.build_channel(parameter_override=p)
        d = channel.d
        result = protocol.identify_without_averaging(
            channel, cfg.shots, pconfig,
            seed=derive_seed(cfg.master_seed, _NS_PURITY, pi, 0),
            n_trials=3, counter=counter, reconstruction=method,
        )
        expected_settings += result.measurement_settings_used
        sub = result.dfs_complement
        dfs_purity = protocol.verify_average_purity(
            channel, sub, samples, cfg.shots,
            seed=derive_generator(cfg.master_seed, _NS_PURITY, pi, 1),
            reconstruction=method, counter=counter,
        )
        full = Subspace([Ket.basis_state(d, k) for k in range(d)])
        baseline = protocol.verify_average_purity(
            channel, full, samples, cfg.shots,
            seed=derive_generator(cfg.master_seed, _NS_PURITY, pi, 2),
            separable=True, reconstruction=method, counter=counter,
        )
        if cfg.shots is not None:
            expected_settings += 2 * samples * d * d
        rows.append(
            [p, sub.k, dfs_purity, baseline, samples, result.measurement_settings_used]
        )

    _audit(counter, expected_settings)
    write_csv(
        out / "purity.csv",
        ["p", "dfs_dim", "dfs_purity", "baseline_purity", "samples", "protocol_settings"],
        rows,
        cfg,
    )
    return {
        "exit_code": 0,
        "files": {"purity": str(out / "purity.csv")},
        "summary": {"points": len(p_values)},
    }


def cmd_failure_scaling(cfg: ExperimentConfig, shot_list: Optional[Sequence[int]] = None) -> dict:
    """Empirical misidentification rate versus shots per setting, compared to
    the exponential-law tail estimate."""
    pconfig = replace(cfg.protocol_config(), syndromes_enabled=False)
    method = cfg.method()
    shots_values = sorted(cfg.failure_scaling.shot_list if shot_list is None else [int(n) for n in shot_list])
    runs = cfg.failure_scaling.runs
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    counter = SettingsCounter()
    channel = cfg.build_channel()
    truth = _true_1d_direction(channel)
    if truth is None:
        raise ConfigError("failure scaling needs a channel with a known 1D structure")
    big_dim = channel.d - 1

    rows = []
    expected_settings = 0
    for ni, n_shots in enumerate(shots_values):
        def one(run: int, _ni=ni, _n=n_shots):
            result = protocol.identify_1d_dfs(
                channel, _n, pconfig,
                seed=derive_seed(cfg.master_seed, _NS_FAILURE, _ni, run),
                counter=counter, reconstruction=method,
            )
            if result.dfs_1d is None:
                return None
            return qmath.fidelity(result.dfs_1d, truth)

        fids = [f for f in _pmap(one, range(runs)) if f is not None]
        expected_settings += runs * 2 * channel.d**2
        rate = float(np.mean([f < 0.1 for f in fids])) if fids else 1.0
        prediction = analytics.failure_probability(big_dim, n_shots)
        ratio = rate / prediction if prediction > 0 else float("inf")
        rows.append(
            [n_shots, len(fids), rate, prediction, ratio, bool(1.0 / 3.0 <= ratio <= 3.0)]
        )

    _audit(counter, expected_settings)
    write_csv(
        out / "failure.csv",
        ["N", "runs", "empirical_rate", "eq_prediction", "ratio", "within_factor3"],
        rows,
        cfg,
    )
    return {
        "exit_code": 0,
        "files": {"failure": str(out / "failure.csv")},
        "summary": {"rows": len(rows)},
    }


def cmd_discover(cfg: ExperimentConfig) -> dict:
    """Run the generalized subspace discovery and record the measurement
    budget against full process tomography."""
    pconfig = cfg.protocol_config()
    method = cfg.method()
    channel = cfg.build_channel()
    d = channel.d
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    counter = SettingsCounter()

    result = protocol.discover_subspaces(
        channel, cfg.shots, pconfig,
        seed=derive_seed(cfg.master_seed, _NS_DISCOVER, 0),
        counter=counter, reconstruction=method,
    )
    _audit(counter, result.measurement_settings_used)

    truth_fidelities = None
    if channel.input_dfs is not None and result.success and not result.early_exit:
        truth_fidelities = []
        for sub in result.subspaces:
            matches = [t for t in channel.input_dfs if t.k == sub.k]
            best = max(
                (qmath.subspace_fidelity(sub, t) for t in matches), default=None
            )
            truth_fidelities.append(best)

    payload = result.to_json_dict()
    payload["config_hash"] = cfg.config_hash()
    payload["artifact_version"] = ARTIFACT_VERSION
    payload["channel"] = channel.label
    payload["subspace_fidelity_metric"] = "mean squared cosine of principal angles"
    payload["truth_fidelities"] = truth_fidelities
    write_json(out / "subspaces.json", payload)

    block_dims = "+".join(str(s.k) for s in result.subspaces) or "-"
    write_csv(
        out / "budget.csv",
        ["d", "block_dims", "settings_used", "full_pt_settings"],
        [[d, block_dims, result.measurement_settings_used, d**4]],
        cfg,
    )
    return {
        "exit_code": 0 if result.success else 3,
        "files": {"subspaces": str(out / "subspaces.json"), "budget": str(out / "budget.csv")},
        "summary": {
            "success": result.success,
            "dimensions": [s.k for s in result.subspaces],
            "settings_used": result.measurement_settings_used,
        },
    }
