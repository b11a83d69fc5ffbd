"""Small I/O helpers: deterministic float formatting, CSV writing, hashing."""
from __future__ import annotations

import hashlib
from pathlib import Path


def fmt(x) -> str:
    """Decimal with 17 significant digits; round-trips float64 bit-exactly."""
    return format(float(x), ".17g")


def write_csv(path, header, rows) -> Path:
    """Write rows of already-stringified cells with a fixed '\\n' newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines.extend(",".join(str(c) for c in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
