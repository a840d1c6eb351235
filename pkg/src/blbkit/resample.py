"""All randomness: labeled reproducible streams, subsample index drawing,
multinomial/Poisson count generation, and weighted resample construction.

Every operation takes an :class:`RngStream`. Streams are derived from a
(master seed, label) pair via counter-based Philox keyed through
``SeedSequence`` spawn keys, so results are reproducible regardless of
execution order or thread count: two streams with the same seed and label
yield bit-identical sequences, and distinct labels give statistically
independent streams.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import SamplingError, ValidationError
from .model import DataMatrix, IndexSubset, WeightedSample

_SEED_MASK = (1 << 64) - 1


def _encode_label_part(part) -> int:
    if isinstance(part, (int, np.integer)):
        value = int(part)
        if value < 0:
            raise ValidationError("integer label parts must be nonnegative")
        return value
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "big")
    raise ValidationError(f"label parts must be int or str, got {type(part).__name__}")


class RngStream:
    """A named, reproducible random stream.

    The stream's generator state is fully determined by ``(seed, label)``;
    ``child`` derives sub-streams by extending the label, which is how the
    drivers hand independent randomness to every (subsample, resample)
    work unit.
    """

    __slots__ = ("seed", "label", "generator")

    def __init__(self, seed: int, label: tuple = ()):
        self.seed = int(seed)
        self.label = tuple(label)
        key = tuple(_encode_label_part(part) for part in self.label)
        seq = np.random.SeedSequence(entropy=self.seed & _SEED_MASK, spawn_key=key)
        self.generator = np.random.Generator(np.random.Philox(seq))

    def child(self, *parts) -> "RngStream":
        return RngStream(self.seed, self.label + parts)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, label={self.label!r})"


def draw_subset(n: int, b: int, rng: RngStream) -> IndexSubset:
    """b distinct indices drawn uniformly from [0, n) without replacement."""
    if not 1 <= b <= n:
        raise ValidationError(f"need 1 <= b <= n, got b={b}, n={n}")
    indices = rng.generator.choice(n, size=b, replace=False)
    return IndexSubset(indices.astype(np.int64))


def draw_partition(n: int, b: int, rng: RngStream) -> list[IndexSubset]:
    """floor(n/b) disjoint size-b subsets from one random permutation.

    The leftover ``n mod b`` indices are discarded.
    """
    if not 1 <= b <= n:
        raise ValidationError(f"need 1 <= b <= n, got b={b}, n={n}")
    perm = rng.generator.permutation(n).astype(np.int64)
    return [IndexSubset(perm[i * b : (i + 1) * b]) for i in range(n // b)]


def draw_multinomial_counts(n: int, b: int, rng: RngStream) -> np.ndarray:
    """One draw of b counts from Multinomial(n, uniform over b categories)."""
    if n < 1 or b < 1:
        raise ValidationError(f"need n >= 1 and b >= 1, got n={n}, b={b}")
    counts = rng.generator.multinomial(n, np.full(b, 1.0 / b)).astype(np.int64)
    # Exact support is guaranteed by the generator; guard it anyway since
    # everything downstream assumes total mass n.
    assert int(counts.sum()) == n
    return counts


def draw_poisson_counts(n: int, b: int, rng: RngStream) -> np.ndarray:
    """b i.i.d. Poisson(n/b) counts; redraws once if the total is zero."""
    if n < 1 or b < 1:
        raise ValidationError(f"need n >= 1 and b >= 1, got n={n}, b={b}")
    rate = n / b
    counts = rng.generator.poisson(rate, size=b).astype(np.int64)
    if counts.sum() == 0:
        counts = rng.generator.poisson(rate, size=b).astype(np.int64)
        if counts.sum() == 0:
            raise SamplingError(
                f"Poisson resample (rate {rate:g}) drew an empty sample twice"
            )
    return counts


def resample_weighted(
    data: DataMatrix,
    subset: IndexSubset,
    nominal: int,
    flavor: str,
    rng: RngStream,
) -> WeightedSample:
    """A weighted resample of nominal size ``nominal`` over a subset's rows.

    Multinomial counts make the weights sum to ``nominal`` exactly; Poisson
    counts are independent per row and the realized total is recorded as
    the sample's nominal size. Either way the resample touches at most
    ``subset.b`` distinct rows.
    """
    if nominal < 1:
        raise ValidationError("nominal resample size must be >= 1")
    feats, resp = data.take(subset.indices)
    if flavor == "multinomial":
        counts = draw_multinomial_counts(nominal, subset.b, rng)
        total = nominal
    elif flavor == "poisson":
        counts = draw_poisson_counts(nominal, subset.b, rng)
        total = int(counts.sum())
    else:
        raise ValidationError(f"unknown resample flavor {flavor!r}")
    return WeightedSample(feats, counts, total, resp)


def resample_classical(data: DataMatrix, rng: RngStream) -> WeightedSample:
    """A classical bootstrap resample: n draws with replacement from all rows.

    Implemented as a single Multinomial(n, uniform over n) count draw over
    the full dataset; the row arrays are shared, not copied.
    """
    n = data.n
    counts = draw_multinomial_counts(n, n, rng)
    return WeightedSample(data.features, counts, n, data.response)
