"""Versioned JSON serialization of canonical MPS and a per-point checkpoint store."""

import hashlib
import json
import os
from pathlib import Path
import tempfile

import numpy as np

from .errors import ConfigError
from .mps import CanonicalMps

FORMAT = "mpsberry.mps"
VERSION = 1


def mps_to_dict(mps, point=None):
    t = np.asarray(mps.tensor, dtype=complex)
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "d": int(t.shape[0]),
        "D": int(t.shape[1]),
        "re": t.real.tolist(),
        "im": t.imag.tolist(),
        "schmidt": np.asarray(mps.schmidt, dtype=float).tolist(),
        "eta1": float(mps.eta1),
    }
    if point is not None:
        doc["point"] = point
    return doc


def mps_from_dict(doc):
    if doc.get("format") != FORMAT:
        raise ConfigError(f"not an MPS document (format={doc.get('format')!r})")
    if doc.get("version") != VERSION:
        raise ConfigError(f"unsupported MPS document version {doc.get('version')}")
    t = np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc["im"], dtype=float)
    if t.shape != (doc["d"], doc["D"], doc["D"]):
        raise ConfigError(f"tensor shape {t.shape} does not match d={doc['d']}, D={doc['D']}")
    if not np.any(t.imag):
        t = t.real
    return CanonicalMps(t, np.asarray(doc["schmidt"], dtype=float), float(doc.get("eta1", 0.0)))


def save_mps(path, mps, point=None):
    _atomic_write(Path(path), json.dumps(mps_to_dict(mps, point)))


def load_mps(path):
    with open(path) as fh:
        return mps_from_dict(json.load(fh))


def _atomic_write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def stable_hash(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=repr).encode()).hexdigest()[:16]


class CheckpointStore:
    """One file per solved point, keyed by a hash of the point and solver options.

    Each key has a single writer (the worker solving that point); writes are
    atomic renames so a killed run leaves only complete files behind.
    """

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, key):
        return self.root / f"{stable_hash(key)}.json"

    def get(self, key):
        p = self.path(key)
        if not p.exists():
            return None
        with open(p) as fh:
            doc = json.load(fh)
        if doc.get("point") != json.loads(json.dumps(key, default=repr)):
            return None
        return mps_from_dict(doc)

    def put(self, key, mps):
        save_mps(self.path(key), mps, json.loads(json.dumps(key, default=repr)))
