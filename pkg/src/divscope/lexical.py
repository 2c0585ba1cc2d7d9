"""Unique-n lexical diversity.

The score for one n is the percentage of distinct n-grams among the total
n-grams of a corpus; when the corpus yields more than ``sample_size`` grams,
a seeded subsample of exactly ``sample_size`` gram instances is scored
instead. The reported corpus score is the arithmetic mean over the configured
n values (unigrams, bigrams, and trigrams by default).
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .corpus_io import Corpus, DiversityReport, ValidationError

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


@dataclass(frozen=True)
class LexicalConfig:
    """Parameters of the lexical score.

    Attributes
    ----------
    ns:
        n-gram orders to average over; each must be >= 1.
    sample_size:
        Number of gram instances to score when a corpus yields more than
        this many; drawn uniformly without replacement.
    seed:
        Base seed; each order n draws from its own generator seeded with
        (seed, n), so the orders sample independently.
    lowercase:
        Whether tokenization lowercases, folding "The" and "the" together.
    """

    ns: tuple[int, ...] = (1, 2, 3)
    sample_size: int = 40_000
    seed: int = 0
    lowercase: bool = True

    def __post_init__(self) -> None:
        if not self.ns:
            raise ValidationError("ns must be non-empty")
        if any(n < 1 for n in self.ns):
            raise ValidationError("every n must be >= 1")
        if self.sample_size <= 0:
            raise ValidationError("sample_size must be positive")

    def to_dict(self) -> dict:
        return {
            "ns": list(self.ns),
            "sample_size": self.sample_size,
            "seed": self.seed,
            "lowercase": self.lowercase,
        }


@dataclass(frozen=True)
class NGramMultiset:
    """All order-n windows of a corpus as a multiset.

    ``grams`` maps each distinct gram tuple to its multiplicity and preserves
    first-seen order, which fixes the instance enumeration the sampler uses.
    """

    n: int
    grams: Mapping[tuple[str, ...], int]
    total: int

    def __post_init__(self) -> None:
        if self.total != sum(self.grams.values()):
            raise ValidationError("total must equal the sum of multiplicities")
        if any(len(g) != self.n for g in self.grams):
            raise ValidationError(f"every gram must have exactly {self.n} tokens")


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Split text on Unicode word boundaries.

    Keeps alphanumeric runs and standalone punctuation marks, drops
    whitespace. Deterministic; empty input yields an empty list.

    >>> tokenize("The cat, sat.")
    ['the', 'cat', ',', 'sat', '.']
    """
    if lowercase:
        text = text.lower()
    return _TOKEN_RE.findall(text)


def extract_ngrams(corpus: Corpus, n: int, config: LexicalConfig) -> NGramMultiset:
    """Collect every contiguous n-token window of every document.

    Windows never cross document boundaries; documents shorter than n
    contribute nothing. Documents carrying a pre-tokenized sequence use it
    as-is, others are tokenized per the config.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    grams: Counter[tuple[str, ...]] = Counter()
    total = 0
    for doc in corpus.docs:
        tokens = list(doc.tokens) if doc.tokens is not None else tokenize(doc.text, config.lowercase)
        for i in range(len(tokens) - n + 1):
            grams[tuple(tokens[i : i + n])] += 1
            total += 1
    return NGramMultiset(n=n, grams=grams, total=total)


def _gram_sample(grams: NGramMultiset, config: LexicalConfig) -> tuple[np.ndarray, int]:
    """Sampled gram instances as integer codes, plus the sample size.

    Instances are enumerated in first-seen gram order, each distinct gram
    repeated by its multiplicity; when total > sample_size the draw is
    ``default_rng((seed, n)).choice(total, sample_size, replace=False)``.
    This enumeration and draw are the contract the recount oracle replays.
    """
    counts = np.fromiter(grams.grams.values(), dtype=np.int64, count=len(grams.grams))
    instances = np.repeat(np.arange(len(counts), dtype=np.int64), counts)
    if grams.total <= config.sample_size:
        return instances, grams.total
    rng = np.random.default_rng((config.seed, grams.n))
    chosen = rng.choice(grams.total, size=config.sample_size, replace=False)
    return instances[chosen], config.sample_size


def unique_n(grams: NGramMultiset, config: LexicalConfig) -> float:
    """Percentage of distinct grams in the (sub)sampled instance set.

    Returns 100 x distinct / scored-instances, in (0, 100]. Raises when the
    multiset is empty.
    """
    if grams.total == 0:
        raise ValidationError(f"no n-grams of order {grams.n}")
    sample, size = _gram_sample(grams, config)
    distinct = int(np.unique(sample).size)
    return 100.0 * distinct / size


def lexical_diversity(corpus: Corpus, config: LexicalConfig | None = None) -> DiversityReport:
    """Mean Unique-n over the configured orders, as a report.

    The report's counts carry per-order totals, sampled sizes, distinct
    counts, and sub-scores. An order with no grams fails the whole score,
    naming the failing n.
    """
    config = config or LexicalConfig()
    if len(corpus.docs) == 0:
        raise ValidationError("corpus has no documents")
    per_n: dict[str, dict] = {}
    scores: list[float] = []
    for n in config.ns:
        grams = extract_ngrams(corpus, n, config)
        if grams.total == 0:
            raise ValidationError(f"no n-grams of order {n}")
        sample, size = _gram_sample(grams, config)
        distinct = int(np.unique(sample).size)
        score = 100.0 * distinct / size
        scores.append(score)
        per_n[str(n)] = {
            "total": grams.total,
            "sampled": size,
            "distinct": distinct,
            "score": score,
        }
    return DiversityReport(
        corpus_id=corpus.id,
        metric="lexical",
        score=float(np.mean(scores)),
        config=config.to_dict(),
        counts={"documents": len(corpus.docs), "per_n": per_n},
    )
