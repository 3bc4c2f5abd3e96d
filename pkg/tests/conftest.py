from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
ROOT = TESTS_DIR.parent
FIXTURES = ROOT / "fixtures"

# Make sibling test helpers (oracles, synth, stub_server) importable.
if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))

from xmai.core import load_corpus, load_detections  # noqa: E402
from xmai.providers import (  # noqa: E402
    FixtureMaskFill,
    FixturePosTagger,
    FixtureTextEmbedder,
    ImageEmbeddingMap,
    ProviderBundle,
    WordEmbeddingTable,
)


@pytest.fixture(scope="session")
def fixture_corpus():
    return load_corpus(str(FIXTURES / "corpus.jsonl"))


@pytest.fixture(scope="session")
def fixture_detections():
    return load_detections(str(FIXTURES / "detections.json"))


@pytest.fixture(scope="session")
def fixture_bundle():
    table = WordEmbeddingTable.load(str(FIXTURES / "word_embeddings.txt"))
    return ProviderBundle(
        mask_fill=FixtureMaskFill.load(str(FIXTURES / "maskfill.json")),
        text_embedder=FixtureTextEmbedder(table),
        pos_tagger=FixturePosTagger.load(str(FIXTURES / "pos_lexicon.tsv")),
        image_embeddings=ImageEmbeddingMap.load(str(FIXTURES / "image_embeddings.json")),
        match_table=table,
        attr_table=table,
    )


@pytest.fixture
def fixture_cli_args():
    """Provider/corpus flags for CLI-level fixture runs."""
    return [
        "--corpus", str(FIXTURES / "corpus.jsonl"),
        "--detections", str(FIXTURES / "detections.json"),
        "--word-embeddings", str(FIXTURES / "word_embeddings.txt"),
        "--image-embeddings", str(FIXTURES / "image_embeddings.json"),
        "--maskfill", f"fixture:{FIXTURES / 'maskfill.json'}",
        "--pos", f"fixture:{FIXTURES / 'pos_lexicon.tsv'}",
    ]


@pytest.fixture
def stub_server_uri():
    return f"stdio:{sys.executable} {TESTS_DIR / 'stub_server.py'}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one [PASS]/[FAIL] line per release criterion after the run."""
    reports = [
        report
        for key in ("passed", "failed", "error")
        for report in terminalreporter.stats.get(key, [])
        if getattr(report, "when", "call") == "call"
        and "test_acceptance.py" in report.nodeid
    ]
    if not reports:
        return
    terminalreporter.section("release criteria")
    for report in sorted(reports, key=lambda r: r.nodeid):
        mark = "PASS" if report.passed else "FAIL"
        terminalreporter.write_line(f"[{mark}] {report.nodeid.split('::')[-1]}")
