"""Workspace directory layout, stage manifests, and the writer lock.

Every stage records a manifest with the hash of its relevant configuration
plus content hashes of its input and output artifacts. A stage is fresh
when all of those still match, which lets reruns skip untouched stages and
makes any upstream edit invalidate everything downstream.
"""

from __future__ import annotations

import hashlib
import json
import os
from contextlib import contextmanager
from pathlib import Path

from .errors import WorkspaceLockError

ARTIFACTS = {
    "clean_edges": "clean_edges.csv",
    "diagnostics": "diagnostics.tsv",
    "graph_edges": "graph_edges.csv",
    "graph_nodes": "graph_nodes.csv",
    "graph_stats": "reports/graph_stats.csv",
    "corpus": "corpus.txt",
    "embedding": "embedding.txt",
    "sweep": "reports/sweep.csv",
    "sweep_png": "reports/sweep.png",
    "composition": "reports/composition.csv",
    "misclassified": "reports/misclassified.csv",
    "jaccard": "reports/jaccard.csv",
    "jaccard_png": "reports/jaccard.png",
    "scatter": "reports/scatter.csv",
    "scatter_png": "reports/scatter.png",
    "cohesion": "reports/cohesion.csv",
    "cohesion_png": "reports/cohesion.png",
    "projection": "reports/projection.csv",
    "projection_png": "reports/projection.png",
    "grid": "reports/grid.csv",
    "grid_png": "reports/grid.png",
    "grid_best": "reports/grid_best.json",
    "grid_corpus": "grid_corpus.txt",
    "grid_embedding": "grid_embedding.txt",
    "grid_progress": "grid_progress.csv",
}


def hash_json(obj) -> str:
    return hashlib.sha256(
        json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def file_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Workspace:
    def __init__(self, root):
        self.root = Path(root)

    def ensure(self) -> None:
        (self.root / "reports").mkdir(parents=True, exist_ok=True)
        (self.root / "manifests").mkdir(parents=True, exist_ok=True)

    def path(self, artifact: str) -> Path:
        if artifact in ARTIFACTS:
            return self.root / ARTIFACTS[artifact]
        return self.root / artifact

    def _manifest_path(self, stage: str) -> Path:
        return self.root / "manifests" / f"{stage}.json"

    def _current_hashes(self, names) -> dict[str, str] | None:
        hashes = {}
        for name in names:
            p = self.path(name)
            if not p.is_file():
                return None
            hashes[name] = file_hash(p)
        return hashes

    def stage_fresh(self, stage: str, config: dict, inputs, outputs) -> bool:
        """True when the recorded manifest still matches config and files."""
        mp = self._manifest_path(stage)
        if not mp.is_file():
            return False
        try:
            manifest = json.loads(mp.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, OSError):
            return False
        if manifest.get("config_hash") != hash_json(config):
            return False
        current_in = self._current_hashes(inputs)
        current_out = self._current_hashes(outputs)
        if current_in is None or current_out is None:
            return False
        return manifest.get("inputs") == current_in and manifest.get("outputs") == current_out

    def record_stage(self, stage: str, config: dict, inputs, outputs) -> None:
        manifest = {
            "stage": stage,
            "config": config,
            "config_hash": hash_json(config),
            "inputs": self._current_hashes(inputs) or {},
            "outputs": self._current_hashes(outputs) or {},
        }
        self._manifest_path(stage).write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @contextmanager
    def lock(self):
        """Advisory single-writer lock; stale locks from dead pids are reclaimed."""
        self.ensure()
        lock_path = self.root / ".lock"
        for _attempt in (0, 1):
            try:
                fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
                os.write(fd, str(os.getpid()).encode())
                os.close(fd)
                break
            except FileExistsError:
                try:
                    pid = int(lock_path.read_text().strip() or "0")
                except (OSError, ValueError):
                    pid = 0
                alive = False
                if pid > 0:
                    try:
                        os.kill(pid, 0)
                        alive = True
                    except ProcessLookupError:
                        alive = False
                    except PermissionError:
                        alive = True
                if alive:
                    raise WorkspaceLockError(
                        f"workspace {self.root} is locked by running pid {pid}"
                    ) from None
                lock_path.unlink(missing_ok=True)
        else:  # pragma: no cover - both attempts raced
            raise WorkspaceLockError(f"could not acquire lock in {self.root}")
        try:
            yield self
        finally:
            lock_path.unlink(missing_ok=True)
