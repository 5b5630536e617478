import numpy as np
import pytest

from uqsynth._threads import single_thread_blas

_ACCEPTANCE_LINES: list[str] = []


def record_criterion(number, description, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    line = f"[{status}] criterion {number}: {description}"
    if detail:
        line += f" -- {detail}"
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True, scope="session")
def _blas_single_thread():
    """Small matrices + 2-core host: multi-threaded BLAS only adds sync cost."""
    with single_thread_blas():
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def tiny_model_config(dropout_p: float = 0.1, seed: int = 0, resolution: int = 16):
    """Small 2-block synthesis config used across unit tests."""
    from uqsynth.model import ModelConfig

    n_blocks = {16: 2, 32: 3}[resolution]
    return ModelConfig(
        image_resolution=resolution,
        n_res_blocks=n_blocks,
        fc_widths=(8, 16),
        base_channels=8,
        dropout_p=dropout_p,
        seed=seed,
    )
