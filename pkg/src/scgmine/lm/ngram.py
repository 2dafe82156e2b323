"""Token n-gram model with stupid backoff, renormalized to a distribution.

Backoff is per context: the longest context suffix that was ever followed by
a token supplies the counts. Its stupid-backoff weight ``alpha ** skipped``
is a common factor of every token and cancels in the renormalization, so
the distribution is the relative frequency after that suffix.
"""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

from scgmine.errors import MissingArtifactError
from scgmine.lm.tokens import RESERVED

FORMAT = "scgmine-ngram"
FORMAT_VERSION = 1
DEFAULT_ORDER = 5
DEFAULT_ALPHA = 0.4


class _Dist:
    """Normalized next-token distribution for one context.

    ``explicit`` holds every token of nonzero probability, unless
    ``uniform`` is set, in which case all vocabulary tokens share it.
    """

    __slots__ = ("explicit", "uniform")

    def __init__(self, explicit, uniform=None):
        self.explicit = explicit
        self.uniform = uniform


class NGramModel:
    def __init__(self, order: int = DEFAULT_ORDER, alpha: float = DEFAULT_ALPHA, epochs: int = 1):
        if order < 2:
            raise ValueError("order must be >= 2")
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        self.order = order
        self.alpha = alpha
        self.epochs = epochs  # recorded only; counting has no epochs
        self.tables: dict[tuple, Counter] = {}
        self.vocab: set = set(RESERVED)
        self._frozen = None
        self._cache: dict[tuple, _Dist] = {}

    # -- training ----------------------------------------------------------

    def update(self, stream):
        """Accumulate counts for every context length ``0 .. order-1``."""
        stream = list(stream)
        self.vocab.update(stream)
        for i, tok in enumerate(stream):
            for k in range(0, min(self.order - 1, i) + 1):
                ctx = tuple(stream[i - k:i])
                table = self.tables.get(ctx)
                if table is None:
                    table = self.tables[ctx] = Counter()
                table[tok] += 1
        self._frozen = None
        self._cache.clear()

    def _freeze(self):
        if self._frozen is None:
            vocab = sorted(self.vocab)
            uni = self.tables.get((), Counter())
            total = sum(uni.values())
            unigram = {t: uni.get(t, 0) / total for t in vocab} if total else {t: 0.0 for t in vocab}
            self._frozen = (vocab, unigram)
        return self._frozen

    # -- queries -------------------------------------------------------------

    def _dist(self, context) -> _Dist:
        ctx = tuple(context[len(context) - (self.order - 1):]) if len(context) >= self.order - 1 else tuple(context)
        hit = self._cache.get(ctx)
        if hit is not None:
            return hit
        vocab, unigram = self._freeze()
        table = None
        for k in range(len(ctx), 0, -1):
            table = self.tables.get(ctx[len(ctx) - k:])
            if table:
                break
        if table:
            total = sum(table.values())
            dist = _Dist({t: c / total for t, c in table.items()})
        elif ctx or not any(unigram.values()):
            # not even the last token was ever followed by anything
            dist = _Dist({}, 1.0 / len(vocab))
        else:
            dist = _Dist({t: p for t, p in unigram.items() if p > 0})
        self._cache[ctx] = dist
        return dist

    def prob(self, context, token) -> float:
        d = self._dist(context)
        if d.uniform is not None:
            return d.uniform if token in self.vocab else 0.0
        return d.explicit.get(token, 0.0)

    def next_distribution(self, context) -> list[tuple[str, float]]:
        vocab = self._freeze()[0]
        d = self._dist(context)
        if d.uniform is not None:
            return [(t, d.uniform) for t in vocab]
        return [(t, d.explicit.get(t, 0.0)) for t in vocab]

    def top(self, context, min_prob: float) -> list[tuple[str, float]]:
        """Tokens with probability >= ``min_prob``, most probable first."""
        d = self._dist(context)
        if d.uniform is not None:
            return [(t, d.uniform) for t in self._freeze()[0]] if d.uniform >= min_prob else []
        out = [(t, p) for t, p in d.explicit.items() if p >= min_prob]
        out.sort(key=lambda tp: (-tp[1], tp[0]))
        return out

    def argmax(self, context) -> str:
        """Most probable next token; ties go to the lexicographically smallest."""
        d = self._dist(context)
        if d.uniform is not None:
            return self._freeze()[0][0]
        return min(d.explicit.items(), key=lambda tp: (-tp[1], tp[0]))[0]

    # -- persistence ---------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "order": self.order,
            "alpha": self.alpha,
            "epochs": self.epochs,
            "vocab": sorted(self.vocab),
            "tables": [[list(ctx), dict(sorted(table.items()))] for ctx, table in sorted(self.tables.items())],
        }

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), separators=(",", ":")) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, doc: dict) -> "NGramModel":
        if doc.get("format") != FORMAT or doc.get("version") != FORMAT_VERSION:
            raise ValueError(f"not a {FORMAT} v{FORMAT_VERSION} model file")
        model = cls(doc["order"], doc["alpha"], doc.get("epochs", 1))
        model.vocab = set(doc["vocab"])
        model.tables = {tuple(ctx): Counter(table) for ctx, table in doc["tables"]}
        return model

    @classmethod
    def load(cls, path) -> "NGramModel":
        p = Path(path)
        if not p.exists():
            raise MissingArtifactError(p)
        return cls.from_json(json.loads(p.read_text(encoding="utf-8")))


def train_ngram(corpus, order: int = DEFAULT_ORDER, alpha: float = DEFAULT_ALPHA, epochs: int = 1) -> NGramModel:
    """Count n-grams over each sample's prompt+completion stream."""
    corpus = list(corpus)
    if not corpus:
        raise ValueError("empty training corpus")
    model = NGramModel(order, alpha, epochs)
    for sample in corpus:
        model.update(sample.prompt + sample.completion)
    return model
