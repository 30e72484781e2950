import shutil

import hypothesis
import pytest

from handscroll.config import EngineConfig
from handscroll.corpus import load_corpus
from handscroll.demo import build_demo_corpus

hypothesis.settings.register_profile("suite", deadline=None, max_examples=50)
hypothesis.settings.load_profile("suite")


@pytest.fixture(scope="session")
def config():
    return EngineConfig()


@pytest.fixture(scope="session")
def demo_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus") / "demo"
    return build_demo_corpus(root)


@pytest.fixture(scope="session")
def demo_corpus(demo_dir, config):
    return load_corpus(demo_dir, config)


@pytest.fixture
def demo_dir_copy(demo_dir, tmp_path):
    """Writable copy for tests that mutate files (customization log etc.)."""
    dst = tmp_path / "demo"
    shutil.copytree(demo_dir, dst)
    return dst
