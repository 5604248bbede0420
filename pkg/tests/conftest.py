"""Shared fixtures and the acceptance-criteria summary hook."""
from __future__ import annotations

from datetime import date

import pytest

from plugwatt.aggregation import Aggregator
from plugwatt.core import Phase, PhaseKind, Site
from plugwatt.synthetic import SynthConfig, generate_synthetic

# Compact two-phase calendar used wherever tests need a full dataset but not
# the whole eleven-week study: three baseline weeks, one feedback week.
SMALL_PHASES = (
    Phase(Site.CMU, PhaseKind.BASELINE, "B", date(2016, 9, 12), date(2016, 10, 2)),
    Phase(Site.CMU, PhaseKind.FEEDBACK, "F", date(2016, 10, 3), date(2016, 10, 9)),
)


def small_config(**overrides) -> SynthConfig:
    base = dict(site=Site.CMU, phases=SMALL_PHASES, n_participants=4,
                n_sockets=2, cadence_s=900, seed=7,
                reduction_by_kind=((PhaseKind.FEEDBACK, 0.10),))
    base.update(overrides)
    return SynthConfig(**base)


@pytest.fixture(scope="session")
def small_dataset():
    dataset, truth = generate_synthetic(small_config())
    return dataset, truth


@pytest.fixture(scope="session")
def small_agg(small_dataset):
    dataset, _ = small_dataset
    return Aggregator(dataset)


@pytest.fixture(scope="session")
def study_dataset():
    """Full CMU study calendar at coarse cadence, for phase-level tests."""
    cfg = SynthConfig(site=Site.CMU, n_participants=5, n_sockets=1,
                      cadence_s=1800, seed=11)
    dataset, truth = generate_synthetic(cfg)
    return dataset, truth


ACCEPTANCE_LABELS = {
    "test_published_arithmetic": "A1 published-arithmetic consistency",
    "test_score_formula": "A2 score formula exactness and scale invariance",
    "test_ols_correctness": "A3 OLS exact recovery, pinv agreement, 3-SE coverage",
    "test_statistical_engine": "A4 t-CDF vs quadrature, 95% CI coverage",
    "test_residual_lag_property": "A5 one lag removes residual autocorrelation",
    "test_end_to_end_pipeline": "A6 end-to-end CI coverage and null rejection",
    "test_demand_simulator": "A7 demand fixed point, decomposition, determinism",
    "test_service_contract": "A8 service matches scoring and coalescing oracles",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for outcome, tag in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::" not in nodeid or getattr(rep, "when", "call") != "call":
                continue
            name = nodeid.split("::")[-1].split("[")[0]
            if name in ACCEPTANCE_LABELS:
                rows.append((ACCEPTANCE_LABELS[name], tag))
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for label, tag in sorted(rows):
            terminalreporter.write_line(f"{tag}  {label}")
