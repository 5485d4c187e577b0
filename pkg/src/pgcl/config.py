"""Order gates for extensional (enumerative) computation.

``enumerate`` bounds brute-force checks such as power-abelian tests and the
Lemma-D suite; ``kset`` bounds full commutator-set enumeration through the
regular representation; ``pairs`` bounds the number of centre-coset pairs
walked by the collector when the regular representation is too large;
``table`` bounds construction of the regular representation itself.

The environment variable ``PGCL_GATE`` overrides ``enumerate``.
"""

from __future__ import annotations

import contextlib
import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Gates:
    enumerate: int = 5 ** 6
    kset: int = 5 ** 7
    pairs: int = 5 ** 8
    table: int = 5 ** 8


_override: Gates | None = None


def gates() -> Gates:
    if _override is not None:
        return _override
    g = Gates()
    env = os.environ.get("PGCL_GATE")
    if env:
        g = replace(g, enumerate=int(env))
    return g


@contextlib.contextmanager
def using_gates(**changes):
    global _override
    old = _override
    _override = replace(gates(), **changes)
    try:
        yield _override
    finally:
        _override = old
