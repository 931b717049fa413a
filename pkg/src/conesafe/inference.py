"""Reverse inference: converse steps, predecessor walks and cones."""

from __future__ import annotations

import weakref
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .automaton import Automaton, Step, _transit, make_consistent_step
from .ensemble import DEFAULT_BOUND, Choice, restrict_choice
from .errors import BindingError, CapacityError, DomainError

_INDEX: "weakref.WeakKeyDictionary[Automaton, dict]" = weakref.WeakKeyDictionary()


def _converse_index(automaton: Automaton, bound: int) -> dict:
    # Solution set of the backward equations: group canonical steps by
    # (next locus, persistent output), the only real constraint.
    size = len(automaton.loci) * automaton.stimulus.cardinality()
    if size > bound:
        raise CapacityError("locus x stimulus space", size, bound)
    index = _INDEX.get(automaton)
    if index is None:
        index = {}
        for s in automaton.canonical_steps(bound):
            key = (automaton.jump_target(s.locus, s.abscissa), s.ordinate)
            index.setdefault(key, []).append(s)
        index = {k: tuple(v) for k, v in index.items()}
        _INDEX[automaton] = index
    return index


def converse(automaton: Automaton, target: Step, bound: int = DEFAULT_BOUND) -> tuple[Step, ...]:
    """All canonical steps whose successor, under the target's own excitation, is ``target``.

    Result is in canonical (locus, stimulus) order.  A target that no
    canonical step can produce (e.g. an inconsistent one) has no predecessors.
    """
    index = _converse_index(automaton, bound)
    automaton.check_step(target)
    if not automaton.is_canonical(target):
        return ()
    phi0 = automaton.persistent_part(target.abscissa)
    return index.get((target.locus, phi0), ())


def precedes(automaton: Automaton, earlier: Step, later: Step) -> bool:
    """``earlier`` is a converse step of ``later``."""
    xi0 = automaton.volatile_part(later.abscissa)
    return automaton.is_canonical(earlier) and _transit(automaton, earlier, xi0) == later


def predecessor_generations(automaton: Automaton, crux: Step, depth: int,
                            bound: int = DEFAULT_BOUND) -> list[tuple[Step, ...]]:
    """Generations G0..G_depth: G0 = {crux}, G(n+1) = union of converses of G(n)."""
    if depth < 0:
        raise DomainError("depth must be non-negative")
    gens = [(crux,)]
    for _ in range(depth):
        nxt: dict[Step, None] = {}
        for s in gens[-1]:
            for p in converse(automaton, s, bound):
                nxt[p] = None
        gens.append(tuple(sorted(nxt, key=automaton.step_key)))
    return gens


@dataclass(frozen=True)
class PredecessorWalk:
    """Backward walk; ``steps[k]`` is the step at index ``-k`` (``steps[0]`` is the crux)."""

    steps: tuple[Step, ...]

    def __post_init__(self):
        if not self.steps:
            raise DomainError("a predecessor walk has at least the crux step")
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    def at(self, i: int) -> Step:
        """Step at non-positive index ``i``."""
        if i > 0 or -i >= len(self.steps):
            raise IndexError(i)
        return self.steps[-i]

    @property
    def crux(self) -> Step:
        return self.steps[0]

    @property
    def edge_step(self) -> Step:
        return self.steps[-1]

    def path(self) -> list[str]:
        return [s.locus for s in self.steps]

    def has_cycle(self) -> bool:
        p = self.path()
        return len(set(p)) != len(p)


@dataclass(frozen=True)
class StoppingRule:
    max_depth: int
    entry_loci: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.max_depth < 1:
            raise DomainError("stopping rule needs max_depth >= 1")
        object.__setattr__(self, "entry_loci", frozenset(self.entry_loci))


@dataclass(frozen=True)
class Cone:
    crux: Step
    walks: tuple[PredecessorWalk, ...]
    stopping: StoppingRule
    acyclic: bool

    def __len__(self) -> int:
        return len(self.walks)


def build_cone(automaton: Automaton, crux: Step, stopping: StoppingRule,
               bound: int = DEFAULT_BOUND) -> Cone:
    """Expand every backward chain from ``crux`` until a stopping condition.

    A branch ends when its last step has no converse, reaches an entry
    locus, hits ``max_depth`` predecessors, or revisits a locus already on
    the walk (the revisiting step is kept and the cone is marked cyclic).
    Only the maximal chains are kept, so the result is independent; every
    interior step carries all of its converse steps, so it is complete.
    """
    automaton.check_step(crux)
    if not automaton.is_consistent(crux):
        raise DomainError("crux step is inconsistent")
    walks: list[PredecessorWalk] = []
    acyclic = True
    # explicit stack of partial walks; children pushed in reverse for canonical DFS order
    stack: list[tuple[Step, ...]] = [(crux,)]
    while stack:
        partial = stack.pop()
        last = partial[-1]
        depth = len(partial) - 1
        stop = depth >= stopping.max_depth
        if depth > 0:
            if last.locus in stopping.entry_loci:
                stop = True
            if last.locus in {s.locus for s in partial[:-1]}:
                stop = True
                acyclic = False
        preds = () if stop else converse(automaton, last, bound)
        if not preds:
            walks.append(PredecessorWalk(partial))
            if len(walks) > bound:
                raise CapacityError("cone walk set", len(walks), bound)
            continue
        for p in reversed(preds):
            stack.append(partial + (p,))
    return Cone(crux, tuple(walks), stopping, acyclic)


@dataclass(frozen=True)
class CompletenessResult:
    complete: bool
    counterexample: tuple[int, int, Step] | None = None

    def __bool__(self) -> bool:
        return self.complete


def check_complete(automaton: Automaton, walks: Sequence[PredecessorWalk],
                   bound: int = DEFAULT_BOUND, pointwise: bool = False) -> CompletenessResult:
    """Completeness of a walk set around a shared crux.

    For every walk, every interior index ``i`` and every converse step ``s``
    of the step at ``i``, some member must continue from the same place
    through ``s``.  By default "same place" means the same crux-side prefix;
    ``pointwise=True`` only requires the same step at index ``i``, which is
    weaker when distinct chains pass through an identical step.

    The counterexample is ``(walk position, index i, missing step)``.
    """
    walks = list(walks)
    ids: dict[Step, int] = {}
    # prefix mode keys trie edges by (parent node, step id); pointwise keys
    # them by (index, parent step id, step id)
    children: dict[tuple, int] = {}
    interior: dict[tuple, tuple[int, int, Step]] = {}  # node -> first (walk, k, step) through it
    for wi, w in enumerate(walks):
        steps = w.steps
        last = len(steps) - 1
        node = (-1, -1)
        for k, s in enumerate(steps):
            sid = ids.get(s)
            if sid is None:
                sid = ids[s] = len(ids)
            if pointwise:
                child = (k, sid)
                children[(k - 1, node[1], sid)] = 0
            else:
                key = (node, sid)
                child = children.get(key)
                if child is None:
                    child = children[key] = (len(children), sid)
            if k < last and child not in interior:
                interior[child] = (wi, k, s)
            node = child
    conv: dict[Step, tuple[Step, ...]] = {}
    for node, (wi, k, s) in sorted(interior.items(), key=lambda kv: kv[1][:2]):
        preds = conv.get(s)
        if preds is None:
            preds = conv[s] = converse(automaton, s, bound)
        for p in preds:
            pid = ids.get(p)
            key = (k, node[1], pid) if pointwise else (node, pid)
            if pid is None or key not in children:
                return CompletenessResult(False, (wi, -k, p))
    return CompletenessResult(True)


def check_independent(walks: Iterable[PredecessorWalk]) -> bool:
    """False iff some member is a crux-side prefix of another member (or a duplicate)."""
    walks = list(walks)
    proper = {w.steps[:k] for w in walks for k in range(1, len(w))}
    full = [w.steps for w in walks]
    if len(set(full)) != len(full):
        return False
    return not any(f in proper for f in full)


def edge(cone: Cone) -> tuple[Step, ...]:
    """Distinct edge steps of the cone's walks, in walk order."""
    return tuple(dict.fromkeys(w.edge_step for w in cone.walks))


def edge_bijection(cone: Cone) -> dict[Step, PredecessorWalk]:
    """Map each edge step to its walk; raises if two walks share an edge step."""
    out: dict[Step, PredecessorWalk] = {}
    clashes = []
    for w in cone.walks:
        if w.edge_step in out:
            clashes.append(w.edge_step)
        out[w.edge_step] = w
    if clashes:
        raise BindingError("edge steps shared by several walks; edge relation is not a bijection",
                           clashes)
    return out


def edge_is_bijective(cone: Cone) -> bool:
    return len(edge(cone)) == len(cone.walks)


@dataclass(frozen=True)
class Test:
    """Forward test: ``steps[0]`` is the edge step (index 1), ``steps[-1]`` the crux (index n)."""

    steps: tuple[Step, ...]
    source: PredecessorWalk = field(compare=False)

    def __len__(self) -> int:
        return len(self.steps)

    def at(self, i: int) -> Step:
        if not 1 <= i <= len(self.steps):
            raise IndexError(i)
        return self.steps[i - 1]

    def excitations(self, automaton: Automaton) -> list[Choice]:
        """Volatile stimuli fixed by the source walk, one per transition."""
        return [automaton.volatile_part(s.abscissa) for s in self.steps[1:]]

    def to_walk(self) -> PredecessorWalk:
        n = len(self.steps)
        # w_j = t_{j+n} for j = 0 .. -(n-1)
        return PredecessorWalk(tuple(self.at(j + n) for j in range(0, -n, -1)))


def to_test(walk: PredecessorWalk) -> Test:
    """Reverse and re-index: test index ``i`` holds walk index ``i - n``."""
    n = len(walk)
    return Test(tuple(walk.at(i - n) for i in range(1, n + 1)), walk)


def replay(automaton: Automaton, test: Test, *, from_edge_stimulus: bool = False) -> list[Step]:
    """Run a test forward.

    By default the edge step itself is the start.  With
    ``from_edge_stimulus`` the start is rebuilt as the step ``automaton``
    takes at the edge locus on the edge stimulus, which is how a test is
    applied to an implementation other than the model it came from.
    """
    first = test.steps[0]
    if from_edge_stimulus:
        step = make_consistent_step(automaton, first.locus, first.abscissa)
    else:
        automaton.check_step(first)
        step = first
    out = [step]
    for xi in test.excitations(automaton):
        step = _transit(automaton, step, xi)
        out.append(step)
    return out


def cone_sort_key(automaton: Automaton, walk: PredecessorWalk):
    return tuple(automaton.step_key(s) for s in walk.steps)


def restrict_persistent(automaton: Automaton, psi) -> Choice:
    return restrict_choice(psi, automaton.persistent)
