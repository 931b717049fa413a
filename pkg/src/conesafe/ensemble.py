"""Ensembles, choices and the choice-space algebra.

An ensemble maps variable names to finite value domains; a choice picks
one value per name.  Choice spaces are exponential in size, so nothing
here builds one unless :func:`enumerate_choice_space` is asked to with an
explicit bound.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass

from .errors import CapacityError, DisjointnessError, DomainError

DEFAULT_BOUND = 10**6

Scalar = int | str


def _check_scalar(value) -> None:
    # bool is an int subclass; it would silently compare equal to 0/1.
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise DomainError(f"domain values must be integers or symbols, got {value!r}")


class Choice(Mapping):
    """Immutable assignment of one scalar value per index.

    Iteration order is sorted by index name, so two equal choices always
    serialize identically.
    """

    __slots__ = ("_data", "_hash")

    def __init__(self, assignments: Mapping[str, Scalar] | Iterable[tuple[str, Scalar]] = ()):
        data = dict(assignments)
        for k, v in data.items():
            if not isinstance(k, str):
                raise DomainError(f"choice indices must be strings, got {k!r}")
            _check_scalar(v)
        self._data = dict(sorted(data.items()))
        self._hash = None

    @classmethod
    def _trusted(cls, data: dict) -> "Choice":
        # caller guarantees sorted keys and valid scalars
        obj = cls.__new__(cls)
        obj._data = data
        obj._hash = None
        return obj

    def __getitem__(self, key: str) -> Scalar:
        return self._data[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._data.items()))
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, Choice):
            return self._data == other._data
        if isinstance(other, Mapping):
            return self._data == dict(other)
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self._data.items())
        return f"Choice({inner})"

    def __lt__(self, other: "Choice") -> bool:
        return _order_key(self) < _order_key(other)

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(self._data)

    def to_dict(self) -> dict[str, Scalar]:
        return dict(self._data)


def _order_key(choice: Choice):
    # ints sort before symbols; mixed domains stay totally ordered
    return tuple((k, (1, v) if isinstance(v, str) else (0, v)) for k, v in choice.items())


class Ensemble(Mapping):
    """Finite, non-empty family of finite, non-empty, duplicate-free domains.

    The empty ensemble exists only as :meth:`Ensemble.empty`, which is what a
    basis without volatile variables partitions into.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[str, Iterable[Scalar]]):
        if not terms:
            raise DomainError("an ensemble needs at least one index")
        self._terms = self._validated(terms)
        self._hash = None

    @staticmethod
    def _validated(terms: Mapping[str, Iterable[Scalar]]) -> dict[str, tuple]:
        out: dict[str, tuple] = {}
        for name in sorted(terms):
            if not isinstance(name, str) or not name:
                raise DomainError(f"ensemble indices must be non-empty strings, got {name!r}")
            values = tuple(terms[name])
            if not values:
                raise DomainError(f"domain of {name!r} is empty")
            for v in values:
                _check_scalar(v)
            if len(set(values)) != len(values):
                raise DomainError(f"domain of {name!r} has duplicate values")
            out[name] = values
        return out

    @classmethod
    def empty(cls) -> "Ensemble":
        obj = cls.__new__(cls)
        obj._terms = {}
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, values: Mapping[str, Scalar]) -> "Ensemble":
        """Ensemble whose every domain holds one value (a Hobson's choice)."""
        return cls({k: (v,) for k, v in values.items()})

    def __getitem__(self, key: str) -> tuple:
        return self._terms[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, Ensemble):
            return self._terms == other._terms
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={list(v)!r}" for k, v in self._terms.items())
        return f"Ensemble({inner})"

    @property
    def is_empty(self) -> bool:
        return not self._terms

    @property
    def indices(self) -> frozenset[str]:
        return frozenset(self._terms)

    def cardinality(self) -> int:
        """Size of the generated choice space, computed without enumerating it."""
        return math.prod(len(v) for v in self._terms.values())

    def contains(self, choice: Mapping[str, Scalar]) -> bool:
        """True when ``choice`` is a member of this ensemble's choice space."""
        if len(choice) != len(self._terms):
            return False
        for k, dom in self._terms.items():
            if k not in choice or choice[k] not in dom:
                return False
            v = choice[k]
            if isinstance(v, bool):
                return False
        return True

    def restrict(self, indices: Iterable[str]) -> "Ensemble":
        idx = set(indices)
        missing = idx - self.indices
        if missing:
            raise DomainError(f"indices {sorted(missing)} not in ensemble")
        if not idx:
            return Ensemble.empty()
        return Ensemble({k: self._terms[k] for k in idx})

    def difference(self, other: "Ensemble") -> "Ensemble":
        keep = {k: v for k, v in self._terms.items() if k not in other}
        return Ensemble(keep) if keep else Ensemble.empty()

    def includes(self, other: "Ensemble") -> bool:
        """Term-by-term inclusion: every index of ``other`` is here with the same domain."""
        return all(k in self._terms and self._terms[k] == v for k, v in other.items())

    def product(self, other: "Ensemble") -> "Ensemble":
        """Dyadic ensemble product (union of disjoint families)."""
        overlap = self.indices & other.indices
        if overlap:
            raise DisjointnessError(f"ensembles overlap on {sorted(overlap)}")
        merged = {**self._terms, **dict(other.items())}
        return Ensemble(merged) if merged else Ensemble.empty()

    def index_of(self, choice: Mapping[str, Scalar]) -> tuple[int, ...]:
        """Position of each chosen value inside its domain, in index order."""
        return tuple(self._terms[k].index(choice[k]) for k in self._terms)


def restrict_choice(choice: Mapping[str, Scalar], indices: Iterable[str]) -> Choice:
    """Subchoice of ``choice`` on ``indices``; the empty index set gives the empty choice."""
    idx = set(indices)
    missing = idx - set(choice)
    if missing:
        raise DomainError(f"indices {sorted(missing)} not in choice domain")
    return Choice._trusted({k: choice[k] for k in sorted(idx)})


def dyadic_product(a: Mapping[str, Scalar], b: Mapping[str, Scalar]) -> Choice:
    """Union of two choices over disjoint index sets."""
    overlap = set(a) & set(b)
    if overlap:
        raise DisjointnessError(f"choices overlap on {sorted(overlap)}")
    merged = {**a, **b}
    return Choice._trusted(dict(sorted(merged.items())))


@dataclass(frozen=True)
class Basis:
    """Stimulus ensemble with its persistent sub-ensemble."""

    stimulus: Ensemble
    persistent: Ensemble

    def __post_init__(self):
        if not self.stimulus.includes(self.persistent):
            raise DomainError("persistent ensemble is not contained in the stimulus ensemble")

    @property
    def volatile(self) -> Ensemble:
        return self.stimulus.difference(self.persistent)


@dataclass(frozen=True)
class Partition:
    persistent: Ensemble
    volatile: Ensemble

    @property
    def has_event_space(self) -> bool:
        return not self.volatile.is_empty


def partition_basis(basis: Basis) -> Partition:
    """Split the stimulus ensemble into its persistent and volatile parts.

    When every stimulus variable is persistent the volatile part is the empty
    ensemble and ``has_event_space`` is False.
    """
    return Partition(basis.persistent, basis.volatile)


def enumerate_choice_space(ensemble: Ensemble, bound: int = DEFAULT_BOUND) -> Iterator[Choice]:
    """Yield every choice of ``ensemble``, lexicographic by index name then domain order."""
    size = ensemble.cardinality()
    if size > bound:
        raise CapacityError("choice space", size, bound)
    names = list(ensemble)
    return (
        Choice._trusted(dict(zip(names, values)))
        for values in itertools.product(*(ensemble[n] for n in names))
    )
