"""TOML experiment configuration for the batch harness.

Every field has a default; loading materializes all of them (including the
dressing seeds, which default to values derived from the master seed), so a
loaded config is fully explicit and round-trips load -> save -> load without
change.  The config hash stamped into output files covers everything except
the output directory.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
import toml

from .channels import (
    BlockSpec,
    DressedChannelSpec,
    KrausChannel,
    block_dephasing,
    dressed,
    sswap,
)
from .protocol import ProtocolConfig
from .qmath import haar_unitary
from .rng import derive_seed

ARTIFACT_VERSION = "0.1.0"

IDENTITY = "identity"   # no dressing on that side
DERIVE = "derive"       # replaced by a seed derived from the master at load


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass
class ChannelConfig:
    kind: str = "sswap"                      # "sswap" | "block"
    p: float = 0.5                           # swap probability (sswap)
    block_dims: list[int] = field(default_factory=lambda: [3, 1])
    coherence: float = 0.0                   # inter-block coherence (block)
    u1_seed: Union[int, str] = DERIVE        # int seed, "identity" or "derive"
    u2_seed: Union[int, str] = DERIVE

    def validate(self):
        if self.kind not in ("sswap", "block"):
            raise ConfigError(f"unknown channel kind {self.kind!r}")
        if self.kind == "sswap" and not (0.0 <= self.p <= 1.0):
            raise ConfigError("swap probability must lie in [0, 1]")
        if self.kind == "block":
            if not self.block_dims or any(int(x) < 1 for x in self.block_dims):
                raise ConfigError("block_dims must be positive integers")
            if not (0.0 <= self.coherence <= 1.0):
                raise ConfigError("coherence must lie in [0, 1]")
        for name, s in (("u1_seed", self.u1_seed), ("u2_seed", self.u2_seed)):
            if not (s == IDENTITY or isinstance(s, int)):
                raise ConfigError(f"{name} must be an integer or {IDENTITY!r}")

    @property
    def d(self) -> int:
        return 4 if self.kind == "sswap" else sum(int(x) for x in self.block_dims)


@dataclass
class SweepSwapConfig:
    p_list: list[float] = field(
        default_factory=lambda: [
            0.05, 0.2, 0.35, 0.45, 0.5, 0.51, 0.55, 0.59, 0.65, 0.72, 0.85, 0.95,
        ]
    )


@dataclass
class PuritySweepConfig:
    p_list: list[float] = field(default_factory=lambda: [0.51, 0.59, 0.72])
    samples: int = 200


@dataclass
class FailureScalingConfig:
    shot_list: list[int] = field(default_factory=lambda: [100, 1000, 10000])
    runs: int = 2000


@dataclass
class ExperimentConfig:
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    shots: Optional[int] = 10_000            # None = noiseless
    trials: int = 11
    master_seed: int = 1
    reconstruction: str = "auto"             # "auto" | "linear" | "mle"
    output_dir: str = "out"
    protocol: dict = field(default_factory=dict)
    sweep_swap: SweepSwapConfig = field(default_factory=SweepSwapConfig)
    purity_sweep: PuritySweepConfig = field(default_factory=PuritySweepConfig)
    failure_scaling: FailureScalingConfig = field(default_factory=FailureScalingConfig)

    def materialize_seeds(self) -> "ExperimentConfig":
        """Turn symbolic dressing seeds into integers derived from the master."""
        if self.channel.u1_seed == DERIVE:
            self.channel.u1_seed = derive_seed(self.master_seed, 101)
        if self.channel.u2_seed == DERIVE:
            self.channel.u2_seed = derive_seed(self.master_seed, 102)
        return self

    def validate(self):
        self.channel.validate()
        if self.shots is not None and self.shots < 1:
            raise ConfigError("shots must be >= 1 or 'infinite'")
        if self.trials < 2:
            raise ConfigError("need at least two tomography trials")
        if self.reconstruction not in ("auto", "linear", "mle"):
            raise ConfigError(f"unknown reconstruction {self.reconstruction!r}")
        try:
            self.protocol_config()
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad protocol override: {exc}") from exc
        for p in self.sweep_swap.p_list + self.purity_sweep.p_list:
            if not (0.0 <= p <= 1.0):
                raise ConfigError("swap probabilities must lie in [0, 1]")
        if any(n < 10 for n in self.failure_scaling.shot_list):
            raise ConfigError("failure-scaling shot counts must be >= 10")
        if self.failure_scaling.runs < 10:
            raise ConfigError("failure-scaling needs at least 10 runs")
        if self.purity_sweep.samples < 1:
            raise ConfigError("purity sweep needs at least one sample")

    def protocol_config(self) -> ProtocolConfig:
        known = {f.name for f in dataclasses.fields(ProtocolConfig)}
        unknown = set(self.protocol) - known
        if unknown:
            raise ConfigError(f"unknown protocol keys: {sorted(unknown)}")
        return ProtocolConfig(**self.protocol)

    def method(self) -> str:
        if self.reconstruction != "auto":
            return self.reconstruction
        return "linear" if self.shots is None else "mle"

    def build_channel(self, parameter_override: Optional[float] = None) -> KrausChannel:
        """Materialize the configured channel; the override replaces the swap
        probability (sswap) or coherence (block) for sweep commands."""
        ch = self.channel
        d = ch.d
        u1 = None if ch.u1_seed == IDENTITY else haar_unitary(d, int(ch.u1_seed))
        u2 = None if ch.u2_seed == IDENTITY else haar_unitary(d, int(ch.u2_seed))
        if ch.kind == "sswap":
            p = ch.p if parameter_override is None else parameter_override
            inner = sswap(p)
            if u1 is None and u2 is None:
                return inner
            eye = np.eye(d, dtype=complex)
            return dressed(
                DressedChannelSpec(inner, u1 if u1 is not None else eye,
                                   u2 if u2 is not None else eye)
            )
        lam = ch.coherence if parameter_override is None else parameter_override
        spec = BlockSpec(tuple(int(x) for x in ch.block_dims), lam)
        return block_dephasing(spec, u1=u1, u2=u2)

    def to_dict(self) -> dict:
        return {
            "channel": {
                "kind": self.channel.kind,
                "p": self.channel.p,
                "block_dims": list(self.channel.block_dims),
                "coherence": self.channel.coherence,
                "u1_seed": self.channel.u1_seed,
                "u2_seed": self.channel.u2_seed,
            },
            "shots": "infinite" if self.shots is None else self.shots,
            "trials": self.trials,
            "reconstruction": self.reconstruction,
            "output_dir": self.output_dir,
            "seeds": {"master": self.master_seed},
            "protocol": dict(self.protocol),
            "sweep_swap": {"p_list": list(self.sweep_swap.p_list)},
            "purity_sweep": {
                "p_list": list(self.purity_sweep.p_list),
                "samples": self.purity_sweep.samples,
            },
            "failure_scaling": {
                "shot_list": list(self.failure_scaling.shot_list),
                "runs": self.failure_scaling.runs,
            },
        }

    def config_hash(self) -> str:
        payload = self.to_dict()
        payload.pop("output_dir")
        canonical = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def _parse_shots(value) -> Optional[int]:
    if isinstance(value, str):
        if value.lower() in ("inf", "infinite"):
            return None
        raise ConfigError(f"shots must be an integer or 'infinite', got {value!r}")
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"shots must be an integer or 'infinite', got {value!r}")
    return value


def config_from_dict(data: dict) -> ExperimentConfig:
    data = dict(data)
    cfg = ExperimentConfig()
    if "channel" in data:
        cdata = dict(data.pop("channel"))
        cfg.channel = ChannelConfig(
            kind=cdata.pop("kind", cfg.channel.kind),
            p=float(cdata.pop("p", cfg.channel.p)),
            block_dims=[int(x) for x in cdata.pop("block_dims", cfg.channel.block_dims)],
            coherence=float(cdata.pop("coherence", cfg.channel.coherence)),
            u1_seed=cdata.pop("u1_seed", cfg.channel.u1_seed),
            u2_seed=cdata.pop("u2_seed", cfg.channel.u2_seed),
        )
        if cdata:
            raise ConfigError(f"unknown channel keys: {sorted(cdata)}")
    if "shots" in data:
        cfg.shots = _parse_shots(data.pop("shots"))
    if "trials" in data:
        cfg.trials = int(data.pop("trials"))
    if "seeds" in data:
        cfg.master_seed = int(data.pop("seeds").get("master", cfg.master_seed))
    if "reconstruction" in data:
        cfg.reconstruction = str(data.pop("reconstruction"))
    if "output_dir" in data:
        cfg.output_dir = str(data.pop("output_dir"))
    if "protocol" in data:
        cfg.protocol = dict(data.pop("protocol"))
    if "sweep_swap" in data:
        cfg.sweep_swap = SweepSwapConfig(
            p_list=[float(x) for x in data.pop("sweep_swap").get("p_list", SweepSwapConfig().p_list)]
        )
    if "purity_sweep" in data:
        pdata = data.pop("purity_sweep")
        cfg.purity_sweep = PuritySweepConfig(
            p_list=[float(x) for x in pdata.get("p_list", PuritySweepConfig().p_list)],
            samples=int(pdata.get("samples", PuritySweepConfig().samples)),
        )
    if "failure_scaling" in data:
        fdata = data.pop("failure_scaling")
        cfg.failure_scaling = FailureScalingConfig(
            shot_list=[int(x) for x in fdata.get("shot_list", FailureScalingConfig().shot_list)],
            runs=int(fdata.get("runs", FailureScalingConfig().runs)),
        )
    if data:
        raise ConfigError(f"unknown config keys: {sorted(data)}")
    cfg.materialize_seeds()
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        data = toml.load(str(path))
    except (OSError, toml.TomlDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(data)


def save_config(cfg: ExperimentConfig, path: str | Path):
    Path(path).write_text(toml.dumps(cfg.to_dict()))
