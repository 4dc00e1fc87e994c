import numpy as np
import pytest

from acsim.catalog import load_catalog
from acsim.synth import build_demo_corpus


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    build_demo_corpus(out, seed=12345)
    return out


@pytest.fixture(scope="session")
def catalog(corpus_dir):
    return load_catalog(corpus_dir / "assets.jsonl")


@pytest.fixture
def rng():
    return np.random.default_rng(0)
