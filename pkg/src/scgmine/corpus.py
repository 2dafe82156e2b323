"""Training corpora: SCGs of successive revisions, serialized and cut into samples."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from scgmine.diff import SimpleChangeGraph, compute_difference, extract_scg, scg_components
from scgmine.edgelist import header, parse, serialize, split_documents
from scgmine.errors import MissingArtifactError, ScgMineError
from scgmine.lm.samples import TrainingSample, make_training_samples, train_test_split
from scgmine.metamodel import validate_typing
from scgmine.simulator import derive_seed


@dataclass
class Corpus:
    pair_scgs: list = field(default_factory=list)
    components: list = field(default_factory=list)
    serializations: list = field(default_factory=list)
    train: list = field(default_factory=list)
    test: list = field(default_factory=list)

    @property
    def samples(self) -> list[TrainingSample]:
        return self.train + self.test

    @property
    def num_train_tokens(self) -> int:
        return sum(len(s.prompt) + len(s.completion) for s in self.train)


def build_corpus(models, seed: int = 0, test_fraction: float = 0.1, extra_orderings: int = 0) -> Corpus:
    """Diff successive revisions and derive three samples per SCG component.

    ``extra_orderings`` adds that many random DFS orderings per component,
    each contributing its own three samples.
    """
    for i, m in enumerate(models):
        violations = validate_typing(m.graph, m.type_graph)
        if violations:
            raise ScgMineError(f"revision {i} violates its metamodel: {violations[0]}")
    corpus = Corpus()
    for old, new in zip(models, models[1:]):
        scg = extract_scg(compute_difference(old, new))
        corpus.pair_scgs.append(scg)
        corpus.components.extend(scg_components(scg))
    rng = random.Random(derive_seed(seed, "samples"))
    samples = []
    for gid, comp in enumerate(corpus.components):
        text = serialize(comp, gid)
        corpus.serializations.append(text)
        samples.extend(make_training_samples(text, rng))
        for k in range(extra_orderings):
            alt = serialize(comp, gid, random.Random(derive_seed(seed, "ordering", gid, k)))
            samples.extend(make_training_samples(alt, rng))
    corpus.train, corpus.test = train_test_split(samples, random.Random(derive_seed(seed, "split")), test_fraction)
    return corpus


def _write_jsonl(path: Path, rows):
    path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows), encoding="utf-8")


def _read_jsonl(path: Path):
    if not path.exists():
        raise MissingArtifactError(path)
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line]


def write_corpus(out_dir, corpus: Corpus):
    out = Path(out_dir)
    (out / "scg").mkdir(parents=True, exist_ok=True)
    for i, scg in enumerate(corpus.pair_scgs):
        text = serialize(scg, i) if scg.num_edges else header(i)
        (out / "scg" / f"pair_{i:04d}.el").write_text(text, encoding="utf-8")
    (out / "components.el").write_text("".join(corpus.serializations), encoding="utf-8")
    _write_jsonl(out / "train.jsonl", [s.to_json() for s in corpus.train])
    _write_jsonl(out / "test.jsonl", [s.to_json() for s in corpus.test])


def load_corpus(corpus_dir) -> Corpus:
    root = Path(corpus_dir)
    comp_file = root / "components.el"
    if not comp_file.exists():
        raise MissingArtifactError(comp_file)
    corpus = Corpus()
    for path in sorted((root / "scg").glob("pair_*.el")):
        corpus.pair_scgs.append(SimpleChangeGraph.of(parse(path.read_text(encoding="utf-8"))[1]))
    for doc in split_documents(comp_file.read_text(encoding="utf-8")):
        corpus.serializations.append(doc)
        corpus.components.append(SimpleChangeGraph.of(parse(doc)[1]))
    corpus.train = [TrainingSample.from_json(r) for r in _read_jsonl(root / "train.jsonl")]
    corpus.test = [TrainingSample.from_json(r) for r in _read_jsonl(root / "test.jsonl")]
    return corpus
