"""Run manifests: one per artifact directory, chained through input hashes."""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path

from scgmine import __version__

MANIFEST = "manifest.json"
VOLATILE = ("created_at",)


def canonical(doc) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def config_hash(cfg) -> str:
    return hashlib.sha256(canonical(cfg)).hexdigest()


def file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def stable_view(doc: dict) -> dict:
    """The manifest without its timestamps."""
    return {k: v for k, v in doc.items() if k not in VOLATILE}


def manifest_hash(artifact_dir) -> str | None:
    """Hash of a directory's manifest, ignoring timestamps; None if absent."""
    p = Path(artifact_dir) / MANIFEST
    if not p.exists():
        return None
    return hashlib.sha256(canonical(stable_view(json.loads(p.read_text(encoding="utf-8"))))).hexdigest()


def _rel(path, base: Path) -> str:
    return Path(os.path.relpath(Path(path).resolve(), base.resolve())).as_posix()


def write_manifest(artifact_dir, command: str, cfg: dict, seed: int, inputs=(), extra: dict | None = None):
    """Write ``manifest.json`` listing every file below ``artifact_dir``.

    Input paths are stored relative to ``artifact_dir``. Staging directories
    are siblings of their final location, so the relative paths survive the
    final rename.
    """
    root = Path(artifact_dir)
    outputs = {}
    for p in sorted(root.rglob("*")):
        if p.is_file() and p.name != MANIFEST:
            outputs[p.relative_to(root).as_posix()] = file_digest(p)
    doc = {
        "tool": "scgmine",
        "version": __version__,
        "command": command,
        "config_hash": config_hash(cfg),
        "seed": seed,
        "inputs": {_rel(i, root): manifest_hash(i) for i in inputs},
        "outputs": outputs,
        "created_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    if extra:
        doc.update(extra)
    (root / MANIFEST).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return doc


def _replaceable(out: Path) -> bool:
    return not out.exists() or (out.is_dir() and (not any(out.iterdir()) or (out / MANIFEST).exists()))


@contextmanager
def staged_output(out_dir):
    """Yield a temp directory that replaces ``out_dir`` only on success.

    An existing ``out_dir`` is only replaced if it is empty or a previous
    artifact directory (it holds a manifest).
    """
    out = Path(out_dir)
    if not _replaceable(out):
        raise FileExistsError(f"{out} exists and is not an scgmine artifact directory")
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    try:
        yield tmp
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    if out.exists():
        shutil.rmtree(out)
    tmp.rename(out)
