"""Edit-pattern mining and model completion from serialized simple change graphs."""

__version__ = "0.1.0"

from scgmine.graph import (  # noqa: E402
    KERNEL_BACKEND,
    LabeledGraph,
    count_embeddings,
    has_embedding,
    is_isomorphic,
    wl_hash,
)
from scgmine.diff import SimpleChangeGraph, VersionedModel, compute_difference, extract_scg  # noqa: E402
from scgmine.edgelist import parse, serialize  # noqa: E402
from scgmine.metamodel import TypeGraph, simple_component_metamodel  # noqa: E402

__all__ = [
    "KERNEL_BACKEND",
    "LabeledGraph",
    "SimpleChangeGraph",
    "TypeGraph",
    "VersionedModel",
    "compute_difference",
    "count_embeddings",
    "extract_scg",
    "has_embedding",
    "is_isomorphic",
    "parse",
    "serialize",
    "simple_component_metamodel",
    "wl_hash",
]
