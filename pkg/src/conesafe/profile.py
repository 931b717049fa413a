"""Operational profiles: orbits under a usage pattern, arrival counts and rates."""

from __future__ import annotations

import hashlib
import itertools
import math
from collections import Counter
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .automaton import Automaton, Step, Walk, walk
from .ensemble import Choice
from .errors import DomainError, InsufficientDataError, PreconditionError, TruncationError
from .expr import Expression, frame_env

_CHUNK = 4096
_EPS = 1e-300


def derive_seed(seed: int, run: int) -> int:
    """Per-run seed: ``seed`` XOR a 64-bit blake2b hash of the run index."""
    h = hashlib.blake2b(str(run).encode(), digest_size=8).digest()
    return (seed ^ int.from_bytes(h, "big")) & (2**64 - 1)


@dataclass
class UsagePattern:
    """Source of volatile excitations.

    ``independent`` draws every volatile variable from its own categorical
    distribution, i.i.d. per step; ``trace`` replays recorded excitations.
    """

    mode: str = "independent"
    distributions: dict[str, list[tuple[object, float]]] = field(default_factory=dict)
    trace: list[Mapping] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("independent", "trace"):
            raise DomainError(f"unknown usage mode {self.mode!r}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned value")
        self.distributions = {k: [(v, float(p)) for v, p in d] for k, d in self.distributions.items()}
        for name, dist in self.distributions.items():
            ps = [p for _, p in dist]
            if any(p < 0 or not math.isfinite(p) for p in ps):
                raise DomainError(f"distribution of {name!r} has an invalid probability")
            if abs(sum(ps) - 1.0) > 1e-9:
                raise DomainError(f"distribution of {name!r} sums to {sum(ps)!r}, not 1")
            values = [v for v, _ in dist]
            if len(set(values)) != len(values):
                raise DomainError(f"distribution of {name!r} repeats a value")

    @classmethod
    def uniform(cls, automaton: Automaton, seed: int = 0) -> "UsagePattern":
        dists = {}
        for name, dom in automaton.volatile.items():
            dists[name] = [(v, 1.0 / len(dom)) for v in dom]
        return cls("independent", dists, seed=seed)

    def with_seed(self, seed: int) -> "UsagePattern":
        return UsagePattern(self.mode, self.distributions, self.trace, seed)

    def validate(self, automaton: Automaton) -> None:
        if self.mode == "trace":
            for xi in self.trace:
                automaton.check_excitation(xi)
            return
        vol = automaton.volatile
        if set(self.distributions) != set(vol):
            raise DomainError(f"distributions cover {sorted(self.distributions)}, "
                              f"volatile variables are {sorted(vol)}")
        for name, dist in self.distributions.items():
            bad = [v for v, _ in dist if v not in vol[name] or isinstance(v, bool)]
            if bad:
                raise DomainError(f"distribution of {name!r} has values outside the domain: {bad}")

    def excitations(self, automaton: Automaton) -> Iterator[Choice]:
        """Endless (independent) or finite (trace) excitation stream."""
        self.validate(automaton)
        if self.mode == "trace":
            for xi in self.trace:
                yield automaton.check_excitation(xi)
            return
        if automaton.volatile.is_empty:
            while True:
                yield Choice()
        rng = np.random.default_rng(self.seed)
        names = sorted(self.distributions)
        values = [[v for v, _ in self.distributions[n]] for n in names]
        probs = [np.array([p for _, p in self.distributions[n]]) for n in names]
        probs = [p / p.sum() for p in probs]
        # one prebuilt Choice per value combination; draws are mixed-radix codes
        radix = [len(vs) for vs in values]
        table = [Choice._trusted(dict(zip(names, combo))) for combo in itertools.product(*values)]
        while True:
            code = np.zeros(_CHUNK, dtype=np.int64)
            for r, p in zip(radix, probs):
                code = code * r + rng.choice(r, size=_CHUNK, p=p)
            for c in code.tolist():
                yield table[c]


def simulate_orbit(automaton: Automaton, start: Step, pattern: UsagePattern, length: int) -> Walk:
    """Walk of ``length`` steps from ``start`` driven by ``pattern``."""
    if not automaton.is_consistent(start):
        raise DomainError("orbit start step is inconsistent")
    return walk(automaton, start, pattern.excitations(automaton), length)


class _Predicate:
    name = "Z"

    def matches(self, step: Step) -> bool:
        raise NotImplementedError

    def __call__(self, step: Step) -> bool:
        return self.matches(step)

    def __or__(self, other: "_Predicate") -> "AnyOf":
        return AnyOf((self, other), name=f"{self.name}|{other.name}")


@dataclass(frozen=True, eq=False)
class StepPredicate(_Predicate):
    """Reference set of steps.  Every given field must match; no fields means all steps.

    ``where`` is a frame predicate: plain names read the abscissa, primed
    names (``x'``) read the ordinate.
    """

    loci: frozenset[str] | None = None
    functionalities: frozenset[str] | None = None
    where: Expression | None = None
    steps: frozenset[Step] | None = None
    name: str = "Z"

    def __post_init__(self):
        for attr in ("loci", "functionalities", "steps"):
            v = getattr(self, attr)
            if v is not None:
                object.__setattr__(self, attr, frozenset(v))
        if isinstance(self.where, str):
            object.__setattr__(self, "where", Expression(self.where))

    def matches(self, step: Step) -> bool:
        if self.steps is not None and step not in self.steps:
            return False
        if self.loci is not None and step.locus not in self.loci:
            return False
        if self.functionalities is not None and step.functionality not in self.functionalities:
            return False
        if self.where is not None:
            return self.where.test(frame_env(step.abscissa, step.ordinate))
        return True

    def describe(self) -> dict:
        out: dict = {"name": self.name}
        if self.loci is not None:
            out["loci"] = sorted(self.loci)
        if self.functionalities is not None:
            out["functionalities"] = sorted(self.functionalities)
        if self.where is not None:
            out["where"] = self.where.source
        if self.steps is not None:
            out["steps"] = len(self.steps)
        return out


@dataclass(frozen=True, eq=False)
class AnyOf(_Predicate):
    parts: tuple[_Predicate, ...]
    name: str = "Z"

    def matches(self, step: Step) -> bool:
        return any(p.matches(step) for p in self.parts)

    def describe(self) -> dict:
        return {"name": self.name, "any_of": [p.describe() for p in self.parts]}


NOTHING = StepPredicate(steps=frozenset(), name="empty")
EVERYTHING = StepPredicate(name="all")


def _steps(w: Walk | Sequence[Step]) -> Sequence[Step]:
    return w.steps if isinstance(w, Walk) else w


def _check_k(steps: Sequence[Step], k: int) -> None:
    if not 0 <= k <= len(steps):
        raise DomainError(f"k={k} outside 0..{len(steps)}")


def count_arrivals(w: Walk | Sequence[Step], Z: _Predicate, k: int) -> int:
    """Number of steps among the first ``k`` that belong to ``Z``."""
    steps = _steps(w)
    _check_k(steps, k)
    return sum(1 for s in steps[:k] if Z.matches(s))


def arrival_times(w: Walk | Sequence[Step], Z: _Predicate) -> list[int]:
    """1-based positions of the steps in ``Z``, increasing."""
    return [i for i, s in enumerate(_steps(w), 1) if Z.matches(s)]


def absolute_profile(w: Walk | Sequence[Step], Z: _Predicate) -> float:
    steps = _steps(w)
    return count_arrivals(steps, Z, len(steps)) / len(steps)


@dataclass
class RelativeProfile:
    """Conditional occurrence probabilities over the observed members of a reference set."""

    support: tuple[Step, ...]
    probability: dict[Step, float]
    counts: dict[Step, int]
    total_matches: int
    walk_length: int
    reference: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        if any(p < 0 for p in self.probability.values()):
            raise DomainError("negative profile probability")
        if abs(sum(self.probability.values()) - 1.0) > 1e-9:
            raise DomainError("profile probabilities do not sum to 1")

    @classmethod
    def uniform(cls, steps: Sequence[Step]) -> "RelativeProfile":
        steps = tuple(dict.fromkeys(steps))
        if not steps:
            raise InsufficientDataError("uniform profile over an empty set")
        p = 1.0 / len(steps)
        return cls(steps, {s: p for s in steps}, {s: 0 for s in steps}, 0, 0, {"name": "uniform"})

    def __getitem__(self, step: Step) -> float:
        return self.probability.get(step, 0.0)


def estimate_relative_profile(w: Walk | Sequence[Step], Z: _Predicate, seed: int | None = None) -> RelativeProfile:
    steps = _steps(w)
    counts = Counter(s for s in steps if Z.matches(s))
    total = sum(counts.values())
    if total == 0:
        raise InsufficientDataError(f"reference set {Z.name!r} never occurs in the walk")
    support = tuple(counts)
    prob = {s: counts[s] / total for s in support}
    describe = Z.describe() if hasattr(Z, "describe") else {"name": Z.name}
    return RelativeProfile(support, prob, dict(counts), total, len(steps), describe, seed)


def sync(automaton: Automaton, w: Walk | Sequence[Step], k: int) -> float:
    """Elapsed time of the first ``k`` steps: sum of their functionalities' durations."""
    steps = _steps(w)
    _check_k(steps, k)
    fs = automaton.functionalities
    return math.fsum(fs[s.functionality].duration for s in steps[:k])


@dataclass(frozen=True)
class NormEstimate:
    value: float
    window_delta: float
    steps_used: int
    converged: bool


def counting_norm(automaton: Automaton, w: Walk | Sequence[Step], Z: _Predicate,
                  window: int, tol: float = 0.01) -> NormEstimate:
    """Arrival rate of ``Z`` per unit time, with a last-window convergence diagnostic."""
    steps = _steps(w)
    k = len(steps)
    if window < 1 or k < 2 * window:
        raise DomainError(f"walk of {k} steps is too short for two windows of {window}")
    fs = automaton.functionalities
    n = t = 0.0
    n_prev = t_prev = 0.0
    for i, s in enumerate(steps, 1):
        if Z.matches(s):
            n += 1
        t += fs[s.functionality].duration
        if i == k - window:
            n_prev, t_prev = n, t
    value = n / t
    prev = n_prev / t_prev
    delta = abs(value - prev) / max(value, _EPS) if (value or prev) else 0.0
    return NormEstimate(value, delta, k, delta <= tol)


@dataclass(frozen=True)
class LimitReport:
    seeds: tuple[int, ...]
    ratios: tuple[float, ...]
    rates: tuple[float, ...]
    ratio_deviation: float
    rate_deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.ratio_deviation <= self.tol and self.rate_deviation <= self.tol


def _spread(xs: Sequence[float]) -> float:
    # max pairwise deviation relative to the mean
    if not xs:
        return 0.0
    mean = math.fsum(xs) / len(xs)
    return (max(xs) - min(xs)) / max(abs(mean), _EPS) if max(xs) != min(xs) else 0.0


def check_limit_conjectures(automaton: Automaton, start: Step, pattern: UsagePattern | Sequence[UsagePattern],
                            Z: _Predicate, U: _Predicate, runs: int, length: int, tol: float,
                            seeds: Sequence[int] | None = None) -> LimitReport:
    """Empirical check that N_U/N_Z and N_Z/sync agree across independent orbits.

    ``pattern`` may be a list with one pattern per run (to probe a violated
    premise).  Run seeds default to :func:`derive_seed` of the pattern seed.
    """
    if runs < 2:
        raise DomainError("need at least two runs")
    patterns = list(pattern) if isinstance(pattern, Sequence) else [pattern] * runs
    if len(patterns) != runs:
        raise DomainError("one pattern per run required")
    if seeds is None:
        seeds = [derive_seed(p.seed, r) for r, p in enumerate(patterns)]
    elif len(seeds) != runs:
        raise DomainError("one seed per run required")
    ratios, rates = [], []
    fs = automaton.functionalities
    for p, sd in zip(patterns, seeds):
        orbit = simulate_orbit(automaton, start, p.with_seed(sd), length)
        nz = nu = 0
        t = 0.0
        for s in orbit.steps:
            t += fs[s.functionality].duration
            u = U.matches(s)
            if Z.matches(s):
                nz += 1
                nu += u
            elif u:
                raise PreconditionError("U is not contained in Z on the simulated orbit")
        ratios.append(nu / nz if nz else 0.0)
        rates.append(nz / t)
    return LimitReport(tuple(seeds), tuple(ratios), tuple(rates), _spread(ratios), _spread(rates), tol)


__all__ = [
    "AnyOf", "EVERYTHING", "LimitReport", "NOTHING", "NormEstimate", "RelativeProfile",
    "StepPredicate", "TruncationError", "UsagePattern", "absolute_profile", "arrival_times",
    "check_limit_conjectures", "count_arrivals", "counting_norm", "derive_seed",
    "estimate_relative_profile", "simulate_orbit", "sync",
]
