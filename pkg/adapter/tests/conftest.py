"""Shared builders for adapter test corpora."""

import json

import numpy as np

SUBJECTS = ["the cat", "a bird", "the old fox", "every river", "a quiet child", "the stone"]
VERBS = ["sat", "ran", "sang", "jumped", "walked", "glowed", "stood"]
TAILS = [
    "on the mat", "over the hill", "through the garden", "near the water",
    "under a bright sky", "with great care", "by the door",
]


def english_sentence(rng) -> str:
    subject = SUBJECTS[int(rng.integers(len(SUBJECTS)))]
    verb = VERBS[int(rng.integers(len(VERBS)))]
    tail = TAILS[int(rng.integers(len(TAILS)))]
    return f"{subject} {verb} {tail}.".capitalize()


def write_english_corpus(path, n_docs=100, seed=0):
    """Deterministic English-like corpus; every doc has 1-3 sentences."""
    rng = np.random.default_rng(seed)
    with path.open("w", encoding="utf-8") as fh:
        for i in range(n_docs):
            n_sents = int(rng.integers(1, 4))
            text = " ".join(english_sentence(rng) for _ in range(n_sents))
            fh.write(json.dumps({"id": f"doc{i}", "text": text}) + "\n")
    return path


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # one verdict line per cross-package contract test, matching the
    # measurement package's acceptance checklist format
    verdicts = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_contract.py::" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            if name.startswith("test_contract_"):
                name = name[len("test_contract_"):]
            verdicts[name] = "PASS" if status == "passed" else "FAIL"
    if verdicts:
        terminalreporter.section("adapter contract")
        for name, verdict in verdicts.items():
            terminalreporter.write_line(f"[ACCEPT] {name}: {verdict}")
