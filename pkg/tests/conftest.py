import random
import sys

import pytest

from scgmine import _match_py
from scgmine.corpus import build_corpus
from scgmine.lm import train_ngram
from scgmine.simulator import SimulationConfig, simulate_repository

try:
    from scgmine import _match as _match_c
except ImportError:  # extension not built
    _match_c = None

KERNELS = [pytest.param(_match_py, id="python")]
if _match_c is not None:
    KERNELS.append(pytest.param(_match_c, id="cython"))


@pytest.fixture(params=KERNELS)
def kernel(request):
    return request.param


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture(scope="session")
def small_repo():
    cfg = SimulationConfig(revisions=6, ops_per_revision=11, perturbation_prob=0.0, seed=3)
    models, log = simulate_repository(cfg)
    return cfg, models, log


@pytest.fixture(scope="session")
def small_corpus(small_repo):
    return build_corpus(small_repo[1], seed=0)


@pytest.fixture(scope="session")
def small_model(small_corpus):
    return train_ngram(small_corpus.train)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
