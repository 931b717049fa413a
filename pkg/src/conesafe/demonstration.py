"""Safety demonstrations: sample cone walks by edge profile, replay them, tally outcomes."""

from __future__ import annotations

import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .automaton import Automaton, Step
from .errors import BindingError, ConsistencyError, DomainError, ExpressionError, PreconditionError
from .expr import Expression, frame_env
from .inference import Cone, PredecessorWalk, edge, edge_bijection, replay, to_test
from .profile import RelativeProfile
from .risk import ALPHA, acceptance_probability, indemnify, indifference_proportion

__all__ = [
    "ALPHA", "DemonstrationReport", "EdgeSampler", "ItemRecord", "SafetyConstraint",
    "acceptance_probability", "bind_profile_to_edge", "run_demonstration",
]


@dataclass(frozen=True)
class SafetyConstraint:
    """Named frame predicate that must hold where the hazard would show."""

    name: str
    predicate: Expression

    def __post_init__(self):
        if isinstance(self.predicate, str):
            object.__setattr__(self, "predicate", Expression(self.predicate))

    def holds(self, step: Step) -> bool:
        try:
            return self.predicate.test(frame_env(step.abscissa, step.ordinate))
        except ExpressionError as exc:
            raise DomainError(f"constraint {self.name!r} is not total: {exc}") from exc


@dataclass
class EdgeSampler:
    """Draws edge steps i.i.d. by profile and returns the walk each one ends."""

    cone: Cone
    steps: tuple[Step, ...]
    walks: tuple[PredecessorWalk, ...]
    probabilities: np.ndarray
    provenance: dict = field(default_factory=dict)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Positions (into ``steps`` and ``walks``) of ``n`` draws with replacement."""
        return rng.choice(len(self.steps), size=n, p=self.probabilities)

    def walk_index(self, i: int) -> int:
        return self._positions[i]

    def __post_init__(self):
        pos = {id(w): k for k, w in enumerate(self.cone.walks)}
        self._positions = [pos[id(w)] for w in self.walks]


def bind_profile_to_edge(cone: Cone, profile: RelativeProfile | None = None) -> EdgeSampler:
    """Tie a relative profile (or the uniform fallback) to the cone's edge."""
    if not cone.acyclic:
        raise PreconditionError("demonstrations need an acyclic cone")
    b = edge_bijection(cone)
    steps = edge(cone)
    if profile is None:
        probs = np.full(len(steps), 1.0 / len(steps))
        prov = {"profile": "uniform"}
    else:
        offenders = [s for s in profile.support if s not in b]
        if offenders:
            raise BindingError("profile support contains steps outside the cone edge", offenders)
        probs = np.array([profile[s] for s in steps], dtype=float)
        if probs.sum() <= 0:
            raise BindingError("profile puts no mass on the cone edge", [])
        probs = probs / probs.sum()
        prov = {"profile": profile.reference, "total_matches": profile.total_matches,
                "walk_length": profile.walk_length, "seed": profile.seed}
    return EdgeSampler(cone, steps, tuple(b[s] for s in steps), probs, prov)


@dataclass(frozen=True)
class ItemRecord:
    item: int
    walk_id: int
    edge_step: Step
    passed: bool
    violated: tuple[str, ...] = ()


@dataclass
class DemonstrationReport:
    sample_size: int
    failures: int
    items: list[ItemRecord]
    seed: int
    provenance: dict
    indifference_upper_bound: float | None = None
    indemnification_per_second: float | None = None
    edge_norm: float | None = None
    alpha: float = ALPHA

    def __post_init__(self):
        if not 0 <= self.failures <= self.sample_size:
            raise DomainError("failures outside 0..N")

    @property
    def accepted(self) -> bool:
        return self.failures == 0

    @property
    def mle(self) -> float:
        """n/N; diagnostic only, it carries no assurance."""
        return self.failures / self.sample_size

    @property
    def status(self) -> str:
        return "accepted" if self.accepted else "reliability growth needed"

    @property
    def indemnification_per_hour(self) -> float | None:
        if self.indemnification_per_second is None:
            return None
        return self.indemnification_per_second * 3600.0

    def to_json(self) -> str:
        from .formats import report_to_dict
        return json.dumps(report_to_dict(self), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        def fmt(x):
            return "n/a" if x is None else f"{x:.6g}"
        head = [
            f"{'status':<28}{self.status}",
            f"{'sample size N':<28}{self.sample_size}",
            f"{'failures n':<28}{self.failures}",
            f"{'seed':<28}{self.seed}",
            f"{'alpha (false rejection)':<28}{self.alpha:g}",
            f"{'rho_I (50% upper bound)':<28}{fmt(self.indifference_upper_bound)}",
            f"{'edge norm [1/s]':<28}{fmt(self.edge_norm)}",
            f"{'lambda_I [1/s]':<28}{fmt(self.indemnification_per_second)}",
            f"{'lambda_I [1/h]':<28}{fmt(self.indemnification_per_hour)}",
            f"{'n/N (no assurance)':<28}{self.mle:g}",
            "",
            f"{'item':>6} {'walk':>6} {'edge locus':<14} {'outcome':<8} violated",
        ]
        for r in self.items:
            head.append(f"{r.item:>6} {r.walk_id:>6} {r.edge_step.locus:<14} "
                        f"{'pass' if r.passed else 'FAIL':<8} {','.join(r.violated)}")
        return "\n".join(line.rstrip() for line in head) + "\n"


def _check_compatible(model: Automaton, impl: Automaton) -> None:
    if impl.stimulus != model.stimulus or impl.persistent != model.persistent:
        raise DomainError("implementation basis differs from the model basis")
    if set(impl.loci) != set(model.loci):
        raise DomainError("implementation loci differ from the model loci")


def run_demonstration(automaton: Automaton, cone: Cone, sampler: EdgeSampler,
                      constraints: Iterable[SafetyConstraint], N: int, seed: int,
                      implementation: Automaton | None = None,
                      edge_norm: float | None = None) -> DemonstrationReport:
    """Draw N walks with replacement, replay each as a forward test, judge the final frame.

    Every test is first replayed on ``automaton`` and must reproduce its
    source walk.  The verdict frame is the crux itself, or, when an
    ``implementation`` is given, the last step that implementation takes
    when driven from the edge stimulus with the test's recorded excitations.
    """
    if isinstance(N, bool) or not isinstance(N, int) or N < 1:
        raise DomainError("sample size N must be >= 1")
    if sampler.cone is not cone:
        raise DomainError("sampler is bound to a different cone")
    constraints = list(constraints)
    if implementation is not None:
        _check_compatible(automaton, implementation)
    rng = np.random.default_rng(seed)
    drawn = sampler.draw(rng, N)  # drawn up front, before any replay
    verdicts: dict[int, tuple[str, ...]] = {}
    items = []
    for k, j in enumerate(drawn.tolist()):
        if j not in verdicts:
            verdicts[j] = _judge(automaton, sampler.walks[j], constraints, implementation,
                                 sampler.walk_index(j))
        violated = verdicts[j]
        items.append(ItemRecord(k, sampler.walk_index(j), sampler.steps[j], not violated, violated))
    n = sum(1 for r in items if not r.passed)
    rho = lam = None
    if n == 0:
        rho = indifference_proportion(N)
        if edge_norm is not None:
            lam = indemnify(N, edge_norm).per_second
    return DemonstrationReport(N, n, items, seed, dict(sampler.provenance), rho, lam, edge_norm)


def _judge(automaton: Automaton, w: PredecessorWalk, constraints: Sequence[SafetyConstraint],
           implementation: Automaton | None, walk_id: int) -> tuple[str, ...]:
    test = to_test(w)
    if replay(automaton, test) != list(test.steps):
        raise ConsistencyError(f"walk {walk_id} does not replay to itself; model or cone is corrupt")
    if implementation is None:
        final = test.steps[-1]
    else:
        final = replay(implementation, test, from_edge_stimulus=True)[-1]
    return tuple(c.name for c in constraints if not c.holds(final))
