from __future__ import annotations

from contextvars import ContextVar, Token
from dataclasses import dataclass, field

import numpy as np

from .hashing import fnv1a_64


@dataclass(slots=True)
class RunContext:
    """Command-scoped context: the root seed and the command being run."""

    seed: int
    command: str = "library"
    streams: dict[str, int] = field(default_factory=dict)

    def rng(self, stream: str) -> np.random.Generator:
        """Generator for a named sub-stream ("split", "shuffle", "init", ...)."""
        self.streams[stream] = self.streams.get(stream, 0) + 1
        return derive_rng(self.seed, stream)


def derive_rng(seed: int, stream: str) -> np.random.Generator:
    """Independent generator for ``stream`` under ``seed``.

    Adding a new stream never shifts the draws of existing ones.
    """
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, fnv1a_64(stream) & 0xFFFFFFFF])


_current_run_context: ContextVar[RunContext | None] = ContextVar(
    "current_run_context",
    default=None,
)


def set_run_context(context: RunContext) -> Token[RunContext | None]:
    return _current_run_context.set(context)


def reset_run_context(token: Token[RunContext | None]) -> None:
    _current_run_context.reset(token)


def get_run_context() -> RunContext | None:
    return _current_run_context.get()
