import json
from pathlib import Path

import pytest

from graphmark.minilang import parse

CORPUS_DIR = Path(__file__).resolve().parents[1] / "src" / "graphmark" / "corpus"
GOLDEN_DIR = Path(__file__).resolve().parent / "goldens"


@pytest.fixture(scope="session")
def corpus():
    """name -> parsed Program for every committed .gm file."""
    return {
        path.stem: parse(path.read_text(encoding="utf-8"))
        for path in sorted(CORPUS_DIR.glob("*.gm"))
    }


@pytest.fixture(scope="session")
def corpus_sources():
    return {
        path.stem: path.read_text(encoding="utf-8")
        for path in sorted(CORPUS_DIR.glob("*.gm"))
    }


@pytest.fixture(scope="session")
def corpus_inputs():
    return json.loads((CORPUS_DIR / "inputs.json").read_text(encoding="utf-8"))
