"""Content-stamped binary caches for expensive corpus-derived stores.

Format (internal, not stability-guaranteed): a magic header line, the
content stamp of the inputs that produced the payload, then a pickle of
the payload object. A cache whose stamp no longer matches the current
inputs is treated as absent.
"""

from __future__ import annotations

import hashlib
import json
import logging
import pickle
from pathlib import Path
from typing import Any

log = logging.getLogger(__name__)

_MAGIC = b"TRIPLESCORE-CACHE 1\n"
_CHUNK = 1 << 20


def content_stamp(paths: list[Path], params: dict[str, Any]) -> str:
    """SHA-256 over the input files' bytes and the canonicalized params."""
    digest = hashlib.sha256()
    for path in paths:
        digest.update(str(path.name).encode("utf-8"))
        with open(path, "rb") as fh:
            while chunk := fh.read(_CHUNK):
                digest.update(chunk)
    digest.update(json.dumps(params, sort_keys=True).encode("utf-8"))
    return digest.hexdigest()


def save(path: Path, stamp: str, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(stamp.encode("ascii") + b"\n")
        pickle.dump(payload, fh, protocol=pickle.HIGHEST_PROTOCOL)


def load(path: Path, stamp: str) -> Any | None:
    """Return the payload if the cache exists and matches *stamp*."""
    if not path.exists():
        return None
    try:
        with open(path, "rb") as fh:
            if fh.read(len(_MAGIC)) != _MAGIC:
                log.warning("%s: unrecognized cache header; rebuilding", path)
                return None
            stored = fh.readline().strip().decode("ascii")
            if stored != stamp:
                log.info("%s: inputs changed; rebuilding", path)
                return None
            return pickle.load(fh)
    except (OSError, pickle.UnpicklingError, EOFError, UnicodeDecodeError) as exc:
        log.warning("%s: unreadable cache (%s); rebuilding", path, exc)
        return None
