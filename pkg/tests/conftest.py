import numpy as np
import pytest

from softwrap.core import one_hot_encode
from softwrap.synth import GeneratorConfig, generate
from softwrap.trees import TreeHyperparams

# (criterion number, passed, detail) lines recorded by test_acceptance.py
ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def small_data():
    """2000 uniform training scenarios, encoded."""
    return one_hot_encode(generate(GeneratorConfig("uniform", 2000, 11)))


@pytest.fixture(scope="session")
def small_cal():
    return generate(GeneratorConfig("representative", 1500, 12))


@pytest.fixture(scope="session")
def small_hp():
    return TreeHyperparams(max_depth=3, min_leaf_weight=40, n_trees=4, max_iters=60)


@pytest.fixture(scope="session")
def small_models(small_data, small_hp):
    """One small trained model per approach."""
    from softwrap.study import train_model
    from softwrap.trees import APPROACHES

    return {a: train_model(a, small_data, small_hp, seed=5) for a in APPROACHES}


@pytest.fixture
def rs():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


@pytest.fixture(scope="session")
def full_study(tmp_path_factory):
    """The 50k/20k/20k study with seed 1, written to a temporary directory."""
    from softwrap.study import run_study

    out = tmp_path_factory.mktemp("study")
    return run_study(50_000, 20_000, 20_000, seed=1, out_dir=out), out
