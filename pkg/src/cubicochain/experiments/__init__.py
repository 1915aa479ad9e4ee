"""Experiment runners: each takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentReport` with sample rows, fitted constants and verdicts."""

from .caplower import run_caplower
from .config import ExperimentConfig, HypothesisError
from .flat_holder import run_flat_holder
from .hausdorff import run_hausdorff_cap
from .holder import run_holder
from .morrey import run_morrey
from .report import ExperimentReport
from .sharp import run_sharp
from .zerocap import run_zerocap

RUNNERS = {
    "holder": run_holder,
    "flat_holder": run_flat_holder,
    "morrey": run_morrey,
    "sharp": run_sharp,
    "zerocap": run_zerocap,
    "hausdorff_cap": run_hausdorff_cap,
    "caplower": run_caplower,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    try:
        runner = RUNNERS[cfg.name.replace("-", "_")]
    except KeyError:
        raise ValueError(f"unknown experiment {cfg.name!r}; choose from {', '.join(RUNNERS)}") from None
    return runner(cfg)


__all__ = [
    "ExperimentConfig", "ExperimentReport", "HypothesisError", "RUNNERS", "run_experiment",
    "run_caplower", "run_flat_holder", "run_hausdorff_cap", "run_holder", "run_morrey", "run_sharp", "run_zerocap",
]
