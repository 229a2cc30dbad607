"""
Multi-indices of partial derivatives
"""

from dataclasses import dataclass
from typing import Iterator, Tuple


@dataclass(frozen=True, order=False)
class MultiIndex:
    """
    Derivative count per independent variable, aligned with the context's variable order
    """

    counts: Tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError(f"Multi-index entries must be non-negative: {self.counts}")

    @classmethod
    def zero(cls, n: int) -> 'MultiIndex':
        return cls((0,) * n)

    @classmethod
    def unit(cls, n: int, i: int) -> 'MultiIndex':
        counts = [0] * n
        counts[i] = 1
        return cls(tuple(counts))

    @property
    def order(self) -> int:
        return sum(self.counts)

    def __len__(self) -> int:
        return len(self.counts)

    def __add__(self, other: 'MultiIndex') -> 'MultiIndex':
        return MultiIndex(tuple(a + b for a, b in zip(self.counts, other.counts)))

    def __sub__(self, other: 'MultiIndex') -> 'MultiIndex':
        return MultiIndex(tuple(a - b for a, b in zip(self.counts, other.counts)))

    def shifted(self, i: int, by: int = 1) -> 'MultiIndex':
        counts = list(self.counts)
        counts[i] += by
        return MultiIndex(tuple(counts))

    def dominates(self, other: 'MultiIndex') -> bool:
        """True if self is a derivative of other (componentwise >=)"""
        return all(a >= b for a, b in zip(self.counts, other.counts))

    def rank_key(self) -> Tuple[int, Tuple[int, ...]]:
        """Graded-lex key: total order first, then counts in variable order"""
        return (self.order, self.counts)

    def steps(self) -> Iterator[int]:
        """Variable positions, with repetition, that build this index from zero"""
        for i, c in enumerate(self.counts):
            for _ in range(c):
                yield i

    def is_bounded_by(self, bound: 'MultiIndex') -> bool:
        return bound.dominates(self)
