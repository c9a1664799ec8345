"""Stable seed derivation.

Every randomized operation takes an integer seed and derives per-subtask
sub-seeds from (seed, token, ...) tuples.  Derivation goes through SHA-256
so it is reproducible across processes, platforms and PYTHONHASHSEED
settings, and so that results of concurrent subtasks do not depend on
execution order.
"""

import hashlib

import numpy as np

_SEP = b"\x1f"


def derive_seed(*tokens) -> int:
    """Map a tuple of ints/strings to a stable 64-bit seed."""
    h = hashlib.sha256()
    for tok in tokens:
        if isinstance(tok, (bool, np.bool_)):
            raise TypeError("boolean seed tokens are ambiguous")
        if isinstance(tok, (int, np.integer)):
            h.update(b"i" + str(int(tok)).encode("ascii"))
        elif isinstance(tok, str):
            h.update(b"s" + tok.encode("utf-8"))
        else:
            raise TypeError(f"unsupported seed token type: {type(tok)!r}")
        h.update(_SEP)
    return int.from_bytes(h.digest()[:8], "little")


def rng_for(*tokens) -> np.random.Generator:
    """Deterministic generator for the given (seed, token, ...) tuple."""
    return np.random.default_rng(derive_seed(*tokens))
