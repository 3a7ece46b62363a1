import pytest

from speechstyle import SynthConfig, generate_synthetic_corpus


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """2 groups x 2 speakers x 2 prompts; enough for model round trips."""
    cfg = SynthConfig(groups=2, speakers_per_group=2, prompts=2, duration_ms=400.0, seed=5)
    out = tmp_path_factory.mktemp("tiny_corpus")
    manifest = generate_synthetic_corpus(cfg, out)
    return cfg, manifest


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """5 groups x 3 speakers x 2 prompts; smallest shape the split accepts."""
    cfg = SynthConfig(groups=5, speakers_per_group=3, prompts=2, duration_ms=450.0, seed=7)
    out = tmp_path_factory.mktemp("small_corpus")
    manifest = generate_synthetic_corpus(cfg, out)
    return cfg, manifest
