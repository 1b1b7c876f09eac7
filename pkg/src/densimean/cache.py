"""Append-only JSON-lines store of factorizations.

Each line is ``{"n": "<decimal>", "factors": [["<prime>", <exp>], ...]}``.
Lines that fail to parse, do not reconstruct their key, or list a composite
"prime" are skipped with a warning.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from pathlib import Path

from . import numtheory as nt

log = logging.getLogger(__name__)

ENV_VAR = "DENSIMEAN_CACHE"


def default_cache_path() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "densimean" / "factors.jsonl"


def _parse_line(line: str) -> tuple[int, list[tuple[int, int]]]:
    obj = json.loads(line)
    if set(obj) != {"n", "factors"} or not isinstance(obj["n"], str):
        raise ValueError("unexpected keys")
    n = int(obj["n"])
    factors = [(int(p), int(e)) for p, e in obj["factors"]]
    product = 1
    for p, e in factors:
        if e < 1 or not nt.is_probable_prime(p):
            raise ValueError(f"bad factor {p}^{e}")
        product *= p**e
    if product != n:
        raise ValueError("factors do not reconstruct the key")
    return n, sorted(factors)


class FactorCache:
    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        self._entries: dict[int, list[tuple[int, int]]] = {}
        self._lock = threading.Lock()
        self.skipped = 0
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            return
        with self.path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    n, factors = _parse_line(line)
                except (ValueError, TypeError, KeyError) as exc:
                    self.skipped += 1
                    log.warning("%s:%d: skipping corrupt cache line (%s)", self.path, lineno, exc)
                    continue
                self._entries.setdefault(n, factors)

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, n: int) -> list[tuple[int, int]] | None:
        return self._entries.get(n)

    def put(self, n: int, factors: list[tuple[int, int]]) -> None:
        with self._lock:
            if n in self._entries:
                return
            self._entries[n] = sorted(factors)
            self.path.parent.mkdir(parents=True, exist_ok=True)
            record = {"n": str(n), "factors": [[str(p), e] for p, e in sorted(factors)]}
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record) + "\n")

    def stats(self) -> dict:
        size = self.path.stat().st_size if self.path.exists() else 0
        return {"path": str(self.path), "entries": len(self), "skipped": self.skipped, "bytes": size}

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()
            if self.path.exists():
                self.path.unlink()
