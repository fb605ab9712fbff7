"""Replicate batches on disk: binary tree batches, manifests, and the
deterministic worker pool.

A batch is a length-prefixed concatenation of binary tree records plus a
manifest recording everything needed to reproduce it bit for bit: master
seed, stream range, family hash, conditioning, and attempt/overflow counts.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor

from .errors import ConfigError
from .trees import tree_from_bytes, tree_to_bytes

MANIFEST_VERSION = 1


def worker_count(default=None):
    """Worker count: BIENAYME_THREADS wins, else the CPU count."""
    env = os.environ.get("BIENAYME_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"BIENAYME_THREADS={env!r} is not an integer") from exc
    if default is not None:
        return default
    return max(1, os.cpu_count() or 1)


def parallel_map(fn, items, workers=None, chunksize=1):
    """Map preserving item order; runs serially for a single worker."""
    workers = worker_count() if workers is None else workers
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))


def write_batch(path, trees):
    with open(path, "wb") as fh:
        for t in trees:
            fh.write(tree_to_bytes(t))


def read_batch(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    trees = []
    off = 0
    while off < len(buf):
        t, off = tree_from_bytes(buf, off)
        trees.append(t)
    return trees


def write_manifest(path, *, family, seed, stream_lo, stream_hi, conditioning,
                   outputs, attempts=0, overflows=0, extra=None):
    doc = {
        "manifest_version": MANIFEST_VERSION,
        "family_hash": family.family_hash(),
        "family_name": family.name,
        "seed": int(seed),
        "stream_range": [int(stream_lo), int(stream_hi)],
        "conditioning": conditioning,
        "outputs": outputs,
        "attempts": int(attempts),
        "overflows": int(overflows),
    }
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return doc


def read_manifest(path):
    with open(path) as fh:
        return json.load(fh)
