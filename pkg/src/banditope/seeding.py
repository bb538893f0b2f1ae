"""Named, reproducible random streams.

Every stochastic step of a protocol draws from its own stream, derived from
the master seed plus a string label (and optionally a replicate index).
Streams are independent of execution order, so replicates can run in any
schedule and still see identical randomness.
"""

import hashlib

import numpy as np


def _label_words(label: str) -> list[int]:
    digest = hashlib.blake2s(label.encode("utf-8"), digest_size=16).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


def named_rng(seed: int, label: str, index: int | None = None) -> np.random.Generator:
    """Return a generator keyed by ``(seed, label[, index])``.

    Parameters
    ----------
    seed : int
        Master run seed.
    label : str
        Stream name, e.g. ``"eval-reveal"``.
    index : int, optional
        Replicate or restart number, when the stream is per-replicate.
    """
    entropy = [int(seed)] + _label_words(label)
    if index is not None:
        entropy.append(int(index))
    return np.random.default_rng(np.random.SeedSequence(entropy))
