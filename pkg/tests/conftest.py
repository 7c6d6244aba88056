import pytest

from powerforge import (
    ConfoundSpec,
    DependentVariableMeta,
    Direction,
    ExperimentDesign,
    IndependentVariable,
    PopulationModel,
    Strategy,
)

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def dv_reading():
    return DependentVariableMeta(
        name="READINGTIME",
        unit="min",
        range_min=0.0,
        range_max=60.0,
        direction=Direction.LOWER_IS_BETTER,
        variability=5.0,
    )


@pytest.fixture
def ivs_2x2():
    return (
        IndependentVariable("MEDIUM", ("P", "S")),
        IndependentVariable("LAYOUT", ("1", "2")),
    )


@pytest.fixture
def design_2x2(dv_reading, ivs_2x2):
    return ExperimentDesign(
        ivs=ivs_2x2,
        dv=dv_reading,
        strategy=Strategy.LATIN_SQUARE,
        replications=1,
        participants=16,
    )


@pytest.fixture
def null_model_2x2(design_2x2):
    spec = ConfoundSpec(residual_sd=1.0, participant_sd=0.5)
    means = {c: 10.0 for c in design_2x2.conditions}
    return PopulationModel.from_components(design_2x2, means, spec)


def model_with_effect(design, delta, residual_sd=1.0, participant_sd=0.0, confounds=None):
    """2x2 model where MEDIUM level S sits `delta` above level P."""
    spec = confounds or ConfoundSpec(residual_sd=residual_sd, participant_sd=participant_sd)
    means = {}
    for cond in design.conditions:
        means[cond] = 10.0 + (delta if cond[0] == "S" else 0.0)
    return PopulationModel.from_components(design, means, spec)
