"""Multiclass dataset loading and synthetic stand-in generation.

The on-disk format is the plain UCI-style CSV this package consumes
everywhere: comma-separated numeric features with a 1-based integer class
label in the last column.  Labels are converted to 0-based on load and the
action count is inferred as the maximum 1-based label, so class indices in
files and action indices in memory always line up (classes may be empty).

Because the canonical benchmark files cannot always be fetched, the
module can synthesize stand-in datasets with the same example counts,
feature dimensions and class counts as the well-known small benchmarks.
The stand-ins are Gaussian class clusters with enough overlap that a
linear model of the 0/1 loss is sensible but visibly imperfect, which is
the regime the estimators are meant to be compared in.  Generation is
deterministic given the seed.
"""

import math
from typing import Sequence

import numpy as np

from .core import CostVectorExample, MulticlassExample
from .bandit_data import to_cost_sensitive
from .errors import InputError, ParseError
from .seeding import named_rng

# (examples, features, classes) of the small public benchmarks the
# stand-ins imitate.
DATASET_SHAPES: dict[str, tuple[int, int, int]] = {
    "ecoli": (336, 7, 8),
    "glass": (214, 9, 6),
    "vehicle": (846, 18, 4),
    "yeast": (1484, 8, 10),
}


def load_csv_dataset(path, add_bias: bool = True) -> list[MulticlassExample]:
    """Parse a UCI-style CSV into examples (labels converted to 0-based).

    ``add_bias`` appends a constant-1 feature to every context, which is
    how the linear models get an intercept.
    """
    examples: list[MulticlassExample] = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if width is None:
                if len(parts) < 2:
                    raise ParseError("rows need at least one feature and a label", lineno)
                width = len(parts)
            elif len(parts) != width:
                raise ParseError(
                    f"expected {width} columns, found {len(parts)}", lineno
                )
            try:
                feats = [float(t) for t in parts[:-1]]
            except ValueError as exc:
                raise ParseError(f"bad feature value ({exc})", lineno) from exc
            try:
                label = int(parts[-1])
            except ValueError as exc:
                raise ParseError(f"label must be an integer, got {parts[-1]!r}", lineno) from exc
            if label < 1:
                raise ParseError(f"labels are 1-based, got {label}", lineno)
            if not all(math.isfinite(v) for v in feats):
                raise ParseError("features must be finite", lineno)
            if add_bias:
                feats.append(1.0)
            examples.append(MulticlassExample(np.array(feats), label - 1))
    if not examples:
        raise ParseError(f"no data rows in {path}")
    return examples


def write_dataset_csv(examples: Sequence[MulticlassExample], path) -> None:
    """Write examples in the loadable CSV format (1-based labels)."""
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            feats = ",".join(f"{v:.10g}" for v in ex.context)
            fh.write(f"{feats},{ex.label + 1}\n")


def infer_action_count(examples: Sequence[MulticlassExample]) -> int:
    """Number of actions implied by the labels (max label + 1)."""
    if len(examples) == 0:
        raise InputError("examples must be nonempty")
    return max(ex.label for ex in examples) + 1


def cost_vectors(examples: Sequence[MulticlassExample], k: int) -> list[CostVectorExample]:
    """0/1 cost vectors for every example."""
    return [to_cost_sensitive(ex, k) for ex in examples]


def synthetic_dataset(
    name: str,
    seed: int = 2024,
    n: int | None = None,
    d: int | None = None,
    k: int | None = None,
    spread: float = 4.2,
    noise: float = 1.0,
) -> list[MulticlassExample]:
    """Deterministic Gaussian-cluster stand-in for a benchmark dataset.

    ``name`` selects a preset shape from :data:`DATASET_SHAPES` (explicit
    ``n``/``d``/``k`` override it).  Class priors are mildly imbalanced.
    Class means are drawn with scale ``spread / sqrt(d)`` so that the
    typical inter-class distance, and with it the difficulty, does not
    grow with the feature dimension.  Contexts are raw features without a
    bias column; the CSV loader adds one.
    """
    shape = DATASET_SHAPES.get(name)
    if shape is None and None in (n, d, k):
        raise InputError(
            f"unknown dataset {name!r}; pass n, d and k explicitly "
            f"or use one of {sorted(DATASET_SHAPES)}"
        )
    n = n if n is not None else shape[0]
    d = d if d is not None else shape[1]
    k = k if k is not None else shape[2]

    rng = named_rng(seed, f"synthetic-{name}")
    priors = np.maximum(rng.dirichlet(np.full(k, 5.0)), 0.04)
    priors /= priors.sum()
    means = rng.normal(0.0, spread / math.sqrt(d), size=(k, d))
    labels = rng.choice(k, size=n, p=priors)
    X = means[labels] + rng.normal(0.0, noise, size=(n, d))
    return [MulticlassExample(x, int(c)) for x, c in zip(X, labels)]
