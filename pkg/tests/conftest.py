import numpy as np
import pytest

from divpath.cli import write_synthetic_fixture
from divpath.config import load_config
from divpath.pipeline import run_pipeline


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def fixture_config(tmp_path_factory):
    """Synthetic inputs and their INI file, generated once per session."""
    return write_synthetic_fixture(tmp_path_factory.mktemp("fixture"), seed=0)


@pytest.fixture(scope="session")
def pipeline_out(fixture_config, tmp_path_factory):
    """Artifact directory of one full pipeline run on the synthetic fixture."""
    out = tmp_path_factory.mktemp("run")
    cfg = load_config(fixture_config, {"output_dir": str(out)}, environ={})
    run_pipeline(cfg)
    return out


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
