"""Reproducible random streams and sampling budgets.

All randomness flows from a (master_seed, stream_id) pair through numpy's
SeedSequence, so distinct stream ids give independent streams and reruns are
bit-identical. No OS entropy is used anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_id: int = 0

    def generator(self):
        """A fresh Generator deterministically keyed by (master_seed, stream_id)."""
        ss = np.random.SeedSequence((int(self.master_seed), int(self.stream_id)))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, offset):
        return RngStream(self.master_seed, (int(self.stream_id) << 20) + int(offset))


@dataclass(frozen=True)
class SampleBudget:
    """Caps for conditioned sampling: vertices per attempt, attempts per sample."""

    max_vertices: int = 1_000_000
    max_attempts: int = 10_000_000

    def __post_init__(self):
        if self.max_vertices <= 0 or self.max_attempts <= 0:
            raise ConfigError("budget entries must be positive")


DEFAULT_BUDGET = SampleBudget()
