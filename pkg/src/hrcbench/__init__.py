"""hrcbench: four human-motion prediction models (fixed/adaptable x
linear/neural) with online RLS adaptation, embedded in a closed-loop
human-robot-collaboration simulation and scored on prediction error, safety,
and efficiency.
"""

from .config import ExperimentConfig
from .core import (JointSample, MotionWindow, SlidingWindow,
                   build_linear_regressor, build_network_input, smooth)
from .human_sim import (HumanTrajectory, MotionPattern, apply_drift,
                        default_patterns, generate_dataset, generate_trajectory)
from .linear_model import LinearParams, TrainingConfig, lrm_predict, train_linear
from .neural_model import NetworkParams, nn_forward, nn_hidden, train_network
from .rls import (AdaptivePredictor, AdaptiveState, LambdaSchedule,
                  apriori_predict, gain_update, theta_update)
from .robot_sim import TrialConfig, TrialLog, run_trial

__all__ = [
    "ExperimentConfig", "JointSample", "MotionWindow", "SlidingWindow",
    "build_linear_regressor", "build_network_input", "smooth",
    "HumanTrajectory", "MotionPattern", "apply_drift", "default_patterns",
    "generate_dataset", "generate_trajectory",
    "LinearParams", "TrainingConfig", "lrm_predict", "train_linear",
    "NetworkParams", "nn_forward", "nn_hidden", "train_network",
    "AdaptivePredictor", "AdaptiveState", "LambdaSchedule",
    "apriori_predict", "gain_update", "theta_update",
    "TrialConfig", "TrialLog", "run_trial",
]

__version__ = "0.1.0"
