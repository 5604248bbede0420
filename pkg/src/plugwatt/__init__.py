"""Occupant plugload demand-response platform.

Scoring and leaderboards for a socket-level conservation competition,
matched-pairs inference over intervention phases, ARX models of the pooled
hourly response, and a controllable building-demand simulator, all behind
a CLI and an HTTP service.
"""
from .core import (
    ComfortReport,
    Dataset,
    IncentiveSchedule,
    Phase,
    PhaseCalendar,
    PhaseKind,
    PowerReading,
    ReadingSet,
    ScreentimeSession,
    SessionSet,
    Site,
    TimeIndex,
    ValidationReport,
    screentime_in_interval,
    study_calendar,
    validate_dataset,
)
from .aggregation import Aggregator
from .inference import (
    DifferentialSample,
    TestResult,
    build_differential_sample,
    paired_t_test,
    paper_consistency_report,
    summarize_phase,
)
from .arx import (
    ArxCoefficients,
    ArxDataset,
    ArxSpec,
    build_arx_dataset,
    evaluate,
    fit_ols,
    predict,
    residual_lag_profile,
    split_train_test,
)
from .demand import (
    CHAPTER_COEFFS,
    CyclostationaryProfile,
    DemandPath,
    EpochInput,
    ReductionCoefficients,
    ingest_profile,
    integrate_demand,
    policy_rollout,
    simulate_reduction,
)
from .scoring import BaselineRecord, Scoreboard, compute_baselines, score_formula
from .storage import load_dataset, save_dataset
from .synthetic import SynthConfig, generate_incentive_schedule, generate_synthetic

__version__ = "0.1.0"
