"""Parser and embedder backends behind one small interface.

Neural backends (stanza for parsing, sentence-transformers for embedding)
are imported lazily so the package works without them installed; loading
one that is missing raises AdapterError with the install hint instead of
an ImportError from deep inside a pipeline run. The built-in ``rule``
parser and ``hash`` embedder are deterministic pure functions, good enough
to exercise every format contract in tests and air-gapped environments.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

import numpy as np

PACKAGE_VERSION = "0.1.0"

# tool ids used when the config leaves the embedder as "auto"
DEFAULT_EMBEDDER_EN = "sentence-transformers/all-MiniLM-L6-v2"
DEFAULT_EMBEDDER_MULTI = "sentence-transformers/paraphrase-multilingual-MiniLM-L12-v2"

_HASH_DEFAULT_DIMS = 64


class AdapterError(Exception):
    """Config, input, or model-loading problem the caller can act on."""


@dataclass(frozen=True)
class AdapterConfig:
    """Which models run, for which language, and how batched."""

    parser_model: str = "stanza"
    embedder_model: str = "auto"
    language: str = "en"
    batch_size: int = 32
    device: str = "cpu"

    def __post_init__(self) -> None:
        if not re.fullmatch(r"[a-z]{2,3}", self.language):
            raise AdapterError(f"language must be an ISO 639 code, got {self.language!r}")
        if self.batch_size < 1:
            raise AdapterError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.parser_model or not self.embedder_model or not self.device:
            raise AdapterError("parser_model, embedder_model, and device must be non-empty")

    def resolved_embedder(self) -> str:
        if self.embedder_model != "auto":
            return self.embedder_model
        return DEFAULT_EMBEDDER_EN if self.language == "en" else DEFAULT_EMBEDDER_MULTI

    def to_dict(self) -> dict:
        return {
            "parser_model": self.parser_model,
            "embedder_model": self.resolved_embedder(),
            "language": self.language,
            "batch_size": self.batch_size,
            "device": self.device,
        }


# ---------------------------------------------------------------------------
# sentence segmentation and the rule parser

_SENTENCE_RE = re.compile(r"[^.!?]*[.!?]+[\"')\]]*|[^.!?]+$")
_TOKEN_RE = re.compile(r"\w+|[^\w\s]")

_CLOSED_CLASS = {
    "DET": {"the", "a", "an", "this", "that", "these", "those", "every", "each", "some", "no"},
    "PRON": {
        "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us",
        "them", "who", "whom", "what", "which", "mine", "yours", "his", "hers",
        "ours", "theirs", "my", "your", "its", "our", "their",
    },
    "ADP": {
        "of", "in", "on", "at", "by", "for", "with", "from", "to", "into",
        "over", "under", "between", "through", "after", "before", "above",
        "below", "about", "against", "during", "near",
    },
    "AUX": {
        "is", "am", "are", "was", "were", "be", "been", "being", "do", "does",
        "did", "have", "has", "had", "will", "would", "can", "could", "may",
        "might", "shall", "should", "must",
    },
    "CCONJ": {"and", "or", "but", "nor", "yet"},
    "SCONJ": {"if", "because", "while", "although", "unless", "since", "whether"},
    "PART": {"not", "n't"},
    "ADV": {
        "very", "too", "also", "then", "now", "here", "there", "always",
        "never", "often", "again", "soon", "still", "just",
    },
    "INTJ": {"oh", "hey", "wow", "yes", "ah"},
    "VERB": {
        "sat", "ran", "went", "said", "made", "took", "came", "saw", "got",
        "found", "gave", "told", "knew", "thought", "left", "kept", "stood",
        "heard", "let", "put", "held", "wrote", "sang", "flew", "grew",
    },
}
_CLOSED_LOOKUP = {word: tag for tag, words in _CLOSED_CLASS.items() for word in words}

_VERB_SUFFIXES = ("ed", "ing")
_ADJ_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "less", "ish")


def segment_sentences(text: str) -> list[str]:
    """Split text at sentence-final punctuation; whitespace is normalized."""
    out = []
    for chunk in _SENTENCE_RE.findall(text):
        sentence = " ".join(chunk.split())
        if sentence:
            out.append(sentence)
    return out


def _tag(tokens: list[str]) -> list[str]:
    tags = []
    for i, tok in enumerate(tokens):
        low = tok.lower()
        if not tok[0].isalnum():
            tags.append("PUNCT")
        elif tok.isdigit():
            tags.append("NUM")
        elif low in _CLOSED_LOOKUP:
            tags.append(_CLOSED_LOOKUP[low])
        elif low.endswith("ly") and len(low) > 3:
            tags.append("ADV")
        elif low.endswith(_VERB_SUFFIXES) and len(low) > 4:
            tags.append("VERB")
        elif low.endswith(_ADJ_SUFFIXES) and len(low) > 5:
            tags.append("ADJ")
        elif i > 0 and tok[0].isupper():
            tags.append("PROPN")
        else:
            tags.append("NOUN")
    return tags


_MODIFIER_DEPRELS = {"DET": "det", "ADJ": "amod", "NUM": "nummod"}


def _attach(tags: list[str]) -> list[tuple[int, str]]:
    """Heads in file convention (0 = root, else 1-based), one per token.

    Modifiers attach to the next noun when one follows, everything else to
    the root, so the tree is single-rooted and at most two levels deep.
    """
    n = len(tags)
    root = next(
        (i for i in range(n) if tags[i] == "VERB"),
        next(
            (i for i in range(n) if tags[i] == "AUX"),
            next((i for i in range(n) if tags[i] != "PUNCT"), 0),
        ),
    )
    out = []
    for i, tag in enumerate(tags):
        if i == root:
            out.append((0, "root"))
        elif tag in _MODIFIER_DEPRELS:
            noun = next((j for j in range(i + 1, n) if tags[j] in ("NOUN", "PROPN")), None)
            if noun is not None and noun != root:
                out.append((noun + 1, _MODIFIER_DEPRELS[tag]))
            else:
                out.append((root + 1, _MODIFIER_DEPRELS[tag]))
        elif tag == "PUNCT":
            out.append((root + 1, "punct"))
        else:
            out.append((root + 1, "dep"))
    return out


class RuleParser:
    """Deterministic English tagger and attacher; no model downloads.

    Closed-class lookup plus suffix heuristics for tags, flat attachment
    for structure. Not linguistically serious, but every output tree is
    valid and the same input always produces the same bytes.
    """

    version = f"rule/{PACKAGE_VERSION}"

    def __init__(self, config: AdapterConfig) -> None:
        if config.language != "en":
            raise AdapterError(
                f"the rule parser supports only language 'en', got {config.language!r}"
            )

    def segment(self, text: str) -> list[str]:
        return segment_sentences(text)

    def parse(self, sentence: str) -> list[tuple[str, str, int, str]]:
        tokens = _TOKEN_RE.findall(sentence)
        tags = _tag(tokens)
        heads = _attach(tags)
        return [
            (tok, tag, head, deprel)
            for tok, tag, (head, deprel) in zip(tokens, tags, heads)
        ]

    def process(self, text: str) -> list[tuple[str, list[tuple[str, str, int, str]]]]:
        return [(s, self.parse(s)) for s in self.segment(text)]


class StanzaParser:
    """Neural parser via stanza; segment() and process() share its tokenizer."""

    def __init__(self, config: AdapterConfig) -> None:
        try:
            import stanza
        except ImportError as exc:
            raise AdapterError(
                "parser backend 'stanza' needs the stanza package; "
                "install with: pip install 'divscope-prep[neural]'"
            ) from exc
        self._stanza = stanza
        self.version = f"stanza/{stanza.__version__}:{config.language}"
        use_gpu = config.device != "cpu"
        try:
            self._segmenter = stanza.Pipeline(
                lang=config.language, processors="tokenize", use_gpu=use_gpu, verbose=False
            )
            self._pipeline = stanza.Pipeline(
                lang=config.language,
                processors="tokenize,pos,lemma,depparse",
                use_gpu=use_gpu,
                verbose=False,
            )
        except Exception as exc:
            raise AdapterError(
                f"failed to load stanza models for language {config.language!r}: {exc}"
            ) from exc

    def segment(self, text: str) -> list[str]:
        doc = self._segmenter(text)
        return [" ".join(s.text.split()) for s in doc.sentences if s.text.strip()]

    def process(self, text: str) -> list[tuple[str, list[tuple[str, str, int, str]]]]:
        doc = self._pipeline(text)
        out = []
        for sent in doc.sentences:
            rows = [
                (word.text, word.upos or "X", word.head, word.deprel or "dep")
                for word in sent.words
            ]
            if rows:
                out.append((" ".join(sent.text.split()), rows))
        return out


class HashEmbedder:
    """Feature-hashed bag of tokens; deterministic across runs and platforms."""

    def __init__(self, dims: int) -> None:
        if dims < 2:
            raise AdapterError(f"hash embedder needs dims >= 2, got {dims}")
        self.dims = dims
        self.version = f"hash/{PACKAGE_VERSION}:{dims}"

    def encode(self, sentences: list[str]) -> np.ndarray:
        rows = np.zeros((len(sentences), self.dims), dtype=np.float64)
        for r, sentence in enumerate(sentences):
            # constant bias bucket keeps every row nonzero, so cosine
            # distances stay defined downstream
            rows[r, 0] += 1.0
            for tok in _TOKEN_RE.findall(sentence.lower()):
                digest = hashlib.blake2b(tok.encode("utf-8"), digest_size=8).digest()
                value = int.from_bytes(digest, "big")
                sign = 1.0 if value & 1 else -1.0
                rows[r, 1 + (value >> 1) % (self.dims - 1)] += sign
        return rows.astype(np.float32)


class SentenceTransformerEmbedder:
    """Sentence embeddings via the sentence-transformers package."""

    def __init__(self, config: AdapterConfig) -> None:
        try:
            import sentence_transformers
        except ImportError as exc:
            raise AdapterError(
                "embedder backend needs the sentence-transformers package; "
                "install with: pip install 'divscope-prep[neural]'"
            ) from exc
        model_id = config.resolved_embedder()
        try:
            self._model = sentence_transformers.SentenceTransformer(
                model_id, device=config.device
            )
        except Exception as exc:
            raise AdapterError(f"failed to load embedder {model_id!r}: {exc}") from exc
        self.dims = int(self._model.get_sentence_embedding_dimension())
        self.version = f"sentence-transformers/{sentence_transformers.__version__}:{model_id}"

    def encode(self, sentences: list[str]) -> np.ndarray:
        out = self._model.encode(sentences, convert_to_numpy=True, show_progress_bar=False)
        return np.asarray(out, dtype=np.float32)


def load_parser(config: AdapterConfig):
    """Instantiate the configured parser backend, failing with a clear error."""
    if config.parser_model == "rule":
        return RuleParser(config)
    if config.parser_model == "stanza":
        return StanzaParser(config)
    raise AdapterError(f"unknown parser backend {config.parser_model!r}")


def load_embedder(config: AdapterConfig):
    """Instantiate the configured embedder backend, failing with a clear error."""
    model_id = config.resolved_embedder()
    if model_id == "hash" or model_id.startswith("hash:"):
        _, _, dims = model_id.partition(":")
        try:
            return HashEmbedder(int(dims) if dims else _HASH_DEFAULT_DIMS)
        except ValueError as exc:
            raise AdapterError(f"bad hash embedder dims in {model_id!r}") from exc
    return SentenceTransformerEmbedder(config)
