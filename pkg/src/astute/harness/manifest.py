"""Run manifests: config hash, artifact inventory, stage timings."""
from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

from .. import __version__
from ..ioutil import sha256_file

MANIFEST_SCHEMA = "astute-manifest/1"


def config_hash(raw: dict) -> str:
    """Hash of the canonical JSON form; stable under key reordering."""
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class StageTimer:
    """Collects wall-clock seconds per named stage."""

    def __init__(self):
        self.stages: dict[str, float] = {}

    def time(self, name: str):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.start = time.perf_counter()

            def __exit__(self, *exc):
                elapsed = time.perf_counter() - self.start
                timer.stages[name] = timer.stages.get(name, 0.0) + elapsed
                return False

        return _Ctx()


def write_manifest(out_dir, command: str, raw_config: dict, stages: dict, artifacts) -> Path:
    """List every emitted file with its hash next to the run metadata."""
    out_dir = Path(out_dir)
    entries = []
    for path in sorted(Path(p) for p in artifacts):
        entries.append(
            {
                "path": str(path.relative_to(out_dir)),
                "sha256": sha256_file(path),
            }
        )
    doc = {
        "schema": MANIFEST_SCHEMA,
        "command": command,
        "config_hash": config_hash(raw_config),
        "version": __version__,
        "stages_seconds": {k: round(v, 6) for k, v in sorted(stages.items())},
        "artifacts": entries,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(doc, indent=1), encoding="utf-8")
    return path
