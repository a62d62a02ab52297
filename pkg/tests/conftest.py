import json
import shutil
from importlib import resources

import pytest

from teamscope.corpus import ingest_papers, load_corpus_bundle


@pytest.fixture
def synthetic_dir(tmp_path):
    """Fresh copy of the bundled synthetic corpus and its pipeline config."""
    src = resources.files("teamscope") / "data" / "synthetic"
    dst = tmp_path / "synthetic"
    dst.mkdir()
    for name in ("papers.ndjson", "ground_truth.json", "config.json"):
        shutil.copyfile(src / name, dst / name)
    return dst


@pytest.fixture(scope="session")
def ground_truth():
    src = resources.files("teamscope") / "data" / "synthetic" / "ground_truth.json"
    return json.loads(src.read_text())["papers"]


@pytest.fixture(scope="session")
def bundled_snapshot():
    src = resources.files("teamscope") / "data" / "synthetic" / "papers.ndjson"
    return load_corpus_bundle(ingest_papers(src.read_text().splitlines()))


@pytest.fixture
def small_records():
    # p1 (2000) <- p2 (2002) <- p3 (2005); p3 also cites an external paper
    return [
        {"id": "p1", "year": 2000, "venue": "V", "authors": [{"id": "a1", "name": "Ann Lee"}, "a2"],
         "refs": [], "topics": ["x", "y"]},
        {"id": "p2", "year": 2002, "venue": "V", "authors": ["a1", "a3"], "refs": ["p1"],
         "topics": ["y", "z"], "corresponding": ["a3"]},
        {"id": "p3", "year": 2005, "venue": "W", "authors": ["a2", "a3"], "refs": ["p1", "p2", "ext"],
         "topics": ["z"], "statement": "A.L. designed research."},
    ]
