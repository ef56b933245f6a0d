"""Benchmark configuration: one dataclass holding every knob of the protocol,
with canonical JSON serialization and a content hash embedded into every
output file for provenance.
"""

import hashlib
import json
import math
from dataclasses import asdict, dataclass

from .core import ConfigurationError
from .human_sim import apply_drift, default_patterns, tile_pattern
from .robot_sim import PREDICTOR_NAMES, TrialConfig

import numpy as np


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int = 0
    trajectories_per_pattern: int = 30
    trials_per_pattern_per_model: int = 20
    models: tuple = PREDICTOR_NAMES

    # offline training
    learning_rate: float = 0.001
    epochs: int = 100
    minibatch_size: int = 4
    hidden_units: int = 40

    # online adaptation
    lambda1: float = 0.998
    lambda2: float = 1.0
    gain_scale: float = 1000.0

    # human motion
    noise_sigma: float = 0.001
    training_cycles: int = 18
    trial_frames: int = 300
    drift_per_100_frames: tuple = (0.02, -0.015, 0.008)

    # robot / closed loop
    d_safe: float = 0.2
    replan_distance: float = 0.3
    v_max: float = 0.03
    base_position: tuple = (0.0, -0.45, 0.0)
    start_ee: tuple = (0.0, -0.18, 0.22)
    targets: tuple = ((0.36, -0.06, 0.10), (-0.36, -0.06, 0.10))
    reach_tolerance: float = 0.02
    service_frames: int = 60

    def __post_init__(self):
        for m in self.models:
            if m not in PREDICTOR_NAMES:
                raise ConfigurationError(f"unknown model {m!r}")

    def to_dict(self):
        d = asdict(self)
        d["models"] = list(self.models)
        d["drift_per_100_frames"] = list(self.drift_per_100_frames)
        d["base_position"] = list(self.base_position)
        d["start_ee"] = list(self.start_ee)
        d["targets"] = [list(t) for t in self.targets]
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("models", "drift_per_100_frames", "base_position", "start_ee"):
            if key in d:
                d[key] = tuple(d[key])
        if "targets" in d:
            d["targets"] = tuple(tuple(t) for t in d["targets"])
        return cls(**d)

    @classmethod
    def from_json_file(cls, path):
        with open(path) as fh:
            try:
                return cls.from_dict(json.load(fh))
            except (TypeError, ValueError) as exc:
                raise ConfigurationError(f"bad config file {path}: {exc}") from exc

    def config_hash(self):
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def patterns(self):
        """The four training motion patterns, tiled to multi-cycle sessions."""
        return [tile_pattern(p, self.training_cycles)
                for p in default_patterns(self.noise_sigma)]

    def trial_pattern(self, pattern):
        """Tiled and drifted version of a training pattern, used in trials.

        Tiled with one spare cycle past trial_frames so the trial never runs
        off the end of the interpolated motion.
        """
        cycles = math.ceil(self.trial_frames / pattern.duration_frames) + 1
        tiled = tile_pattern(pattern, cycles)
        return apply_drift(tiled, np.asarray(self.drift_per_100_frames, float))

    def trial_seed(self, pattern_label, trial_index):
        """Paired across predictor settings: depends on (pattern, trial) only."""
        ss = np.random.SeedSequence(
            [int(self.master_seed), 1, int(pattern_label), int(trial_index)])
        return int(ss.generate_state(1)[0])

    def make_trial_config(self, pattern, predictor, trial_index):
        return TrialConfig(
            predictor=predictor,
            pattern=self.trial_pattern(pattern),
            seed=self.trial_seed(pattern.label, trial_index),
            frames=self.trial_frames,
            d_safe=self.d_safe,
            replan_distance=self.replan_distance,
            v_max=self.v_max,
            base_position=tuple(self.base_position),
            start_ee=tuple(self.start_ee),
            targets=tuple(tuple(t) for t in self.targets),
            reach_tolerance=self.reach_tolerance,
            service_frames=self.service_frames,
        )
