"""Prompt/completion training samples cut from EdgeList serializations."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from scgmine.lm.tokens import STOP, detokenize, tokenize


@dataclass(frozen=True)
class TrainingSample:
    prompt: tuple
    completion: tuple  # ends with STOP
    graph_id: int = 0
    cut: int = 0  # edges kept in the prompt
    num_edges: int = 0

    @property
    def prompt_text(self) -> str:
        return detokenize(self.prompt)

    @property
    def completion_text(self) -> str:
        return detokenize(self.completion)

    @property
    def text(self) -> str:
        return self.prompt_text + self.completion_text

    @property
    def omitted_edges(self) -> int:
        return self.num_edges - self.cut

    @property
    def stream(self) -> tuple:
        return self.prompt + self.completion

    def to_json(self) -> dict:
        return {
            "graph_id": self.graph_id,
            "cut": self.cut,
            "num_edges": self.num_edges,
            "prompt": self.prompt_text,
            "completion": self.completion_text,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "TrainingSample":
        return cls(
            tuple(tokenize(doc["prompt"])),
            tuple(tokenize(doc["completion"])) + (STOP,),
            int(doc["graph_id"]),
            int(doc["cut"]),
            int(doc["num_edges"]),
        )


def cut_bands(num_edges: int) -> list[range]:
    """Candidate cut indices for the first 10%, the middle and the last 10%.

    A cut index is the number of edge lines kept in the prompt. Band width is
    ``ceil(0.1 * num_edges)`` so every band is non-empty; if nothing is left
    for the middle band it falls back to all cut indices.
    """
    if num_edges < 1:
        raise ValueError("serialization has no edge lines")
    w = max(1, math.ceil(0.1 * num_edges))
    first = range(0, min(w, num_edges))
    last = range(max(num_edges - w, 0), num_edges)
    middle = range(w, num_edges - w)
    if not middle:
        middle = range(0, num_edges)
    return [first, middle, last]


def make_training_samples(serialization: str, rng: random.Random) -> list[TrainingSample]:
    lines = serialization.splitlines(keepends=True)
    head, edges = lines[0], lines[1:]
    graph_id = int(head.split()[2])
    samples = []
    for band in cut_bands(len(edges)):
        cut = rng.choice(band)
        prompt = head + "".join(edges[:cut])
        completion = "".join(edges[cut:])
        samples.append(TrainingSample(
            tuple(tokenize(prompt)), tuple(tokenize(completion)) + (STOP,), graph_id, cut, len(edges),
        ))
    return samples


def train_test_split(samples: list, rng: random.Random, test_fraction: float = 0.1):
    """Random 90/10 split at sample granularity, keeping input order; returns ``(train, test)``."""
    n = len(samples)
    n_test = round(n * test_fraction)
    if n >= 2:
        n_test = min(max(n_test, 1), n - 1)
    test_idx = set(rng.sample(range(n), n_test))
    train = [s for i, s in enumerate(samples) if i not in test_idx]
    test = [s for i, s in enumerate(samples) if i in test_idx]
    return train, test
