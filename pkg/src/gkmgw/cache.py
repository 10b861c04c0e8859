"""Content-addressed result cache: a directory of JSON files.

Keys are SHA-256 hashes of the canonicalized input payload; writes are
atomic (write to a temp file, then rename), so concurrent runs can share a
cache directory.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

ENV_VAR = "GKMGW_CACHE_DIR"
DEFAULT_DIR = ".gkmgw-cache"


def cache_key(payload: dict) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()


class ResultCache:
    def __init__(self, root: str | Path | None = None):
        root = root or os.environ.get(ENV_VAR) or DEFAULT_DIR
        self.root = Path(root)

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, payload: dict) -> dict | None:
        path = self._path(cache_key(payload))
        try:
            with open(path) as fh:
                return json.load(fh)["record"]
        except (OSError, json.JSONDecodeError, KeyError):
            return None

    def put(self, payload: dict, record: dict) -> str:
        key = cache_key(payload)
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        blob = json.dumps(
            {"key": key, "payload": payload, "record": record},
            sort_keys=True,
            indent=1,
            default=str,
        )
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(blob)
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return key

    def entries(self) -> list[str]:
        if not self.root.exists():
            return []
        return sorted(p.stem for p in self.root.glob("*/*.json"))

    def clear(self) -> int:
        n = 0
        for p in list(self.root.glob("*/*.json")):
            p.unlink()
            n += 1
        return n
