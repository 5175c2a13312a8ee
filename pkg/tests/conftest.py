from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_lines() -> list[str]:
    return (FIXTURES / "corpus_vi.txt").read_text(encoding="utf-8").splitlines()


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory, fixture_lines):
    """A small functional checkpoint for service/CLI tests (not accurate)."""
    from vispell.model import load_checkpoint
    from vispell.train import overfit_harness

    out = tmp_path_factory.mktemp("tiny_ckpt")
    path = overfit_harness(
        fixture_lines, out, n_sentences=60, max_steps=60, lr=1e-3, seed=11,
        model_overrides={"word_layers": 2, "char_layers": 1,
                         "word_hidden": 64, "char_hidden": 32, "n_max": 32},
    )
    return load_checkpoint(path)
