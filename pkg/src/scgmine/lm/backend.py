"""The language-model backend interface and backend-agnostic helpers."""

from __future__ import annotations

from typing import Protocol, Sequence, runtime_checkable


@runtime_checkable
class LmBackend(Protocol):
    """Anything that yields a conditional next-token distribution."""

    def next_distribution(self, context: Sequence[str]) -> list[tuple[str, float]]:
        ...


def next_distribution(backend: LmBackend, context: Sequence[str]) -> list[tuple[str, float]]:
    return backend.next_distribution(list(context))


def top_tokens(backend: LmBackend, context: Sequence[str], min_prob: float) -> list[tuple[str, float]]:
    """Tokens with probability >= ``min_prob``, most probable first."""
    fast = getattr(backend, "top", None)
    if fast is not None:
        return fast(context, min_prob)
    out = [(t, p) for t, p in backend.next_distribution(list(context)) if p >= min_prob]
    out.sort(key=lambda tp: (-tp[1], tp[0]))
    return out


def argmax_token(backend: LmBackend, context: Sequence[str]) -> str:
    fast = getattr(backend, "argmax", None)
    if fast is not None:
        return fast(context)
    return min(backend.next_distribution(list(context)), key=lambda tp: (-tp[1], tp[0]))[0]


def token_accuracy(backend: LmBackend, samples) -> float:
    """Teacher-forced argmax accuracy over all completion tokens."""
    samples = list(samples)
    if not samples:
        raise ValueError("no samples")
    hits = total = 0
    for s in samples:
        context = list(s.prompt)
        for tok in s.completion:
            hits += argmax_token(backend, context) == tok
            total += 1
            context.append(tok)
    return hits / total
