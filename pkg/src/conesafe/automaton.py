"""Actuated automata and their induced iteration on step space.

A step is ``(locus, functionality, (psi, phi))``.  :func:`transit` is the
iterative operator: given a step and the next volatile excitation it
produces the successor step, which is always consistent whatever the input.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field

from .ensemble import (
    DEFAULT_BOUND,
    Basis,
    Choice,
    Ensemble,
    dyadic_product,
    enumerate_choice_space,
    restrict_choice,
)
from .errors import (
    CapacityError,
    DomainError,
    ExpressionError,
    RangeCheckError,
    TruncationError,
    ValidationError,
)
from .expr import Expression


@dataclass(frozen=True)
class Frame:
    abscissa: Choice
    ordinate: Choice

    def __hash__(self) -> int:
        # steps are hashed constantly during cone work; cache outside the fields
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((self.abscissa, self.ordinate))
            object.__setattr__(self, "_h", h)
        return h


@dataclass(frozen=True)
class Step:
    locus: str
    functionality: str
    frame: Frame

    def __hash__(self) -> int:
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((self.locus, self.functionality, self.frame))
            object.__setattr__(self, "_h", h)
        return h

    @property
    def abscissa(self) -> Choice:
        return self.frame.abscissa

    @property
    def ordinate(self) -> Choice:
        return self.frame.ordinate


@dataclass(frozen=True)
class Functionality:
    """Named block of assignments, one expression per persistent variable."""

    name: str
    assignments: Mapping[str, Expression]
    duration: float = 1.0

    def __post_init__(self):
        if not (self.duration > 0):
            raise ValidationError("duration not positive", f"functionality {self.name!r}")
        object.__setattr__(self, "assignments", dict(sorted(self.assignments.items())))

    def __hash__(self) -> int:
        return hash((self.name, tuple(self.assignments.items()), self.duration))


@dataclass(frozen=True)
class Actuator:
    """First-match guard list selecting a functionality, with a mandatory default."""

    name: str
    rules: tuple[tuple[Expression, str], ...]
    default: str

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple((g, f) for g, f in self.rules))

    def select(self, psi: Mapping) -> str:
        for guard, target in self.rules:
            if guard.test(psi):
                return target
        return self.default


@dataclass(frozen=True)
class JumpTable:
    """Per-locus jump rules: first matching guard names the next locus."""

    rules: tuple[tuple[Expression, str], ...]
    default: str

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple((g, t) for g, t in self.rules))

    def target(self, psi: Mapping) -> str:
        for guard, locus in self.rules:
            if guard.test(psi):
                return locus
        return self.default


class Automaton:
    """The seven catalogs: basis (stimulus, persistent), functionalities,
    actuators, loci, locator and jump.

    Construction validates cross references, locator totality and
    surjectivity, jump totality, and (when the stimulus space has at most
    ``bound`` members) range-checks every functionality exhaustively.
    Larger spaces are range-checked on each application instead.
    """

    def __init__(
        self,
        basis: Basis,
        functionalities: Iterable[Functionality],
        actuators: Iterable[Actuator],
        loci: Sequence[str],
        locator: Mapping[str, str],
        jump: Mapping[str, JumpTable],
        bound: int = DEFAULT_BOUND,
    ):
        self.basis = basis
        self.functionalities = {f.name: f for f in functionalities}
        self.actuators = {a.name: a for a in actuators}
        self.loci = tuple(loci)
        self.locator = dict(locator)
        self.jump = dict(jump)
        self.bound = bound
        self._locus_pos = {lam: i for i, lam in enumerate(self.loci)}
        self._volatile_ensemble = basis.volatile
        self._persistent = tuple(basis.persistent)
        self._volatile = tuple(self._volatile_ensemble)
        self._apply_cache: dict = {}
        self._select_cache: dict = {}
        self._jump_cache: dict = {}
        self._transit_cache: dict = {}
        self._validate()
        self.range_checked = False
        if basis.stimulus.cardinality() <= bound:
            self._exhaustive_check()
            self.range_checked = True

    # -- structure -----------------------------------------------------------

    @property
    def stimulus(self) -> Ensemble:
        return self.basis.stimulus

    @property
    def persistent(self) -> Ensemble:
        return self.basis.persistent

    @property
    def volatile(self) -> Ensemble:
        return self._volatile_ensemble

    def _validate(self) -> None:
        if not self.loci:
            raise ValidationError("no loci")
        if len(set(self.loci)) != len(self.loci):
            raise ValidationError("duplicate loci")
        if not self.functionalities:
            raise ValidationError("no functionalities")
        if not self.actuators:
            raise ValidationError("no actuators")
        psi_names = set(self.stimulus)
        phi_names = set(self.persistent)

        def check_refs(expr: Expression, where: str) -> None:
            if expr.primed_names:
                raise ValidationError("primed variable outside frame predicate",
                                      f"{where}: {sorted(expr.primed_names)}")
            unknown = expr.names - psi_names
            if unknown:
                raise ValidationError("unknown variable", f"{where}: {sorted(unknown)}")

        for f in self.functionalities.values():
            if set(f.assignments) != phi_names:
                missing = sorted(phi_names - set(f.assignments))
                extra = sorted(set(f.assignments) - phi_names)
                raise ValidationError(
                    "functionality does not assign every persistent variable exactly once",
                    f"{f.name!r}: missing {missing}, extra {extra}")
            for var, expr in f.assignments.items():
                check_refs(expr, f"functionality {f.name!r} assignment {var!r}")
        for a in self.actuators.values():
            for guard, target in a.rules:
                check_refs(guard, f"actuator {a.name!r}")
                if target not in self.functionalities:
                    raise ValidationError("dangling functionality", f"actuator {a.name!r} -> {target!r}")
            if a.default not in self.functionalities:
                raise ValidationError("dangling functionality", f"actuator {a.name!r} -> {a.default!r}")
        missing = [lam for lam in self.loci if lam not in self.locator]
        if missing:
            raise ValidationError("locator not total", f"no actuator for {missing}")
        extra = sorted(set(self.locator) - set(self.loci))
        if extra:
            raise ValidationError("unknown locus", f"locator names {extra}")
        for lam, a in self.locator.items():
            if a not in self.actuators:
                raise ValidationError("dangling actuator", f"locus {lam!r} -> {a!r}")
        unlocated = sorted(set(self.actuators) - set(self.locator.values()))
        if unlocated:
            raise ValidationError("locator not surjective", f"actuators {unlocated} are never located")
        missing = [lam for lam in self.loci if lam not in self.jump]
        if missing:
            raise ValidationError("jump not total", f"no jump table for {missing}")
        extra = sorted(set(self.jump) - set(self.loci))
        if extra:
            raise ValidationError("unknown locus", f"jump names {extra}")
        for lam, table in self.jump.items():
            for guard, target in table.rules:
                check_refs(guard, f"jump from {lam!r}")
                if target not in self._locus_pos:
                    raise ValidationError("dangling locus", f"jump {lam!r} -> {target!r}")
            if table.default not in self._locus_pos:
                raise ValidationError("dangling locus", f"jump {lam!r} -> {table.default!r}")

    def _exhaustive_check(self) -> None:
        for psi in enumerate_choice_space(self.stimulus, self.bound):
            for f in self.functionalities.values():
                self.apply(f.name, psi)
            for a in self.actuators.values():
                self._select(a.name, psi)
            for lam in self.loci:
                self.jump_target(lam, psi)

    # -- mechanism -----------------------------------------------------------

    def apply(self, functionality: str, psi: Choice) -> Choice:
        """Evaluate a functionality on a stimulus, range-checking the result."""
        key = (functionality, psi)
        hit = self._apply_cache.get(key)
        if hit is not None:
            return hit
        f = self.functionalities[functionality]
        out = {}
        for var, expr in f.assignments.items():
            try:
                value = expr(psi)
            except ExpressionError as exc:
                raise ValidationError("assignment not total",
                                      f"functionality {f.name!r} variable {var!r} at psi={dict(psi)}: {exc}") from exc
            dom = self.persistent[var]
            if isinstance(value, bool) or value not in dom:
                raise RangeCheckError(f.name, var, psi, value)
            out[var] = value
        phi = Choice._trusted(out)
        if len(self._apply_cache) < self.bound:
            self._apply_cache[key] = phi
        return phi

    def _select(self, actuator: str, psi: Choice) -> str:
        key = (actuator, psi)
        hit = self._select_cache.get(key)
        if hit is None:
            try:
                hit = self.actuators[actuator].select(psi)
            except ExpressionError as exc:
                raise ValidationError("actuator guard not total", f"{actuator!r} at psi={dict(psi)}: {exc}") from exc
            if len(self._select_cache) < self.bound:
                self._select_cache[key] = hit
        return hit

    def select(self, locus: str, psi: Choice) -> str:
        """Functionality chosen at ``locus`` for stimulus ``psi`` (the actuator of the locus)."""
        return self._select(self.locator[locus], psi)

    def jump_target(self, locus: str, psi: Choice) -> str:
        key = (locus, psi)
        hit = self._jump_cache.get(key)
        if hit is None:
            try:
                hit = self.jump[locus].target(psi)
            except ExpressionError as exc:
                raise ValidationError("jump guard not total", f"from {locus!r} at psi={dict(psi)}: {exc}") from exc
            if len(self._jump_cache) < self.bound:
                self._jump_cache[key] = hit
        return hit

    def volatile_part(self, psi: Mapping) -> Choice:
        return restrict_choice(psi, self._volatile)

    def persistent_part(self, psi: Mapping) -> Choice:
        return restrict_choice(psi, self._persistent)

    # -- validation helpers --------------------------------------------------

    def check_stimulus(self, psi: Mapping) -> Choice:
        if not self.stimulus.contains(psi):
            raise DomainError(f"{dict(psi)} is not a stimulus choice")
        return psi if isinstance(psi, Choice) else Choice(psi)

    def check_excitation(self, xi: Mapping) -> Choice:
        if self.volatile.is_empty:
            if len(xi):
                raise DomainError(f"{dict(xi)} given but the basis has no volatile variables")
            return Choice()
        if not self.volatile.contains(xi):
            raise DomainError(f"{dict(xi)} is not a volatile excitation")
        return xi if isinstance(xi, Choice) else Choice(xi)

    def check_step(self, step: Step) -> None:
        if step.locus not in self._locus_pos:
            raise DomainError(f"unknown locus {step.locus!r}")
        if step.functionality not in self.functionalities:
            raise DomainError(f"unknown functionality {step.functionality!r}")
        self.check_stimulus(step.abscissa)
        if not self.persistent.contains(step.ordinate):
            raise DomainError(f"{dict(step.ordinate)} is not a persistent choice")

    def is_consistent(self, step: Step) -> bool:
        return step.ordinate == self.apply(step.functionality, step.abscissa)

    def is_canonical(self, step: Step) -> bool:
        """Consistent, and carrying the functionality its locus' actuator selects."""
        return (step.functionality == self.select(step.locus, step.abscissa)
                and self.is_consistent(step))

    def locus_index(self, locus: str) -> int:
        return self._locus_pos[locus]

    def step_key(self, step: Step):
        """Canonical ordering key: locus declaration order, then stimulus value positions."""
        return (self._locus_pos[step.locus], self.stimulus.index_of(step.abscissa),
                step.functionality, self.persistent.index_of(step.ordinate))

    def canonical_steps(self, bound: int | None = None) -> Iterator[Step]:
        """Every step ``make_consistent_step`` can produce, in canonical order."""
        bound = self.bound if bound is None else bound
        size = len(self.loci) * self.stimulus.cardinality()
        if size > bound:
            raise CapacityError("locus x stimulus space", size, bound)
        psis = list(enumerate_choice_space(self.stimulus, bound))
        for lam in self.loci:
            for psi in psis:
                yield self._consistent(lam, psi)

    def _consistent(self, locus: str, psi: Choice) -> Step:
        f = self.select(locus, psi)
        return Step(locus, f, Frame(psi, self.apply(f, psi)))


def make_consistent_step(automaton: Automaton, locus: str, stimulus: Mapping) -> Step:
    """The step the automaton takes at ``locus`` when presented ``stimulus``."""
    if locus not in automaton.locator:
        raise DomainError(f"unknown locus {locus!r}")
    psi = automaton.check_stimulus(stimulus)
    return automaton._consistent(locus, psi)


def _transit(automaton: Automaton, step: Step, xi: Choice) -> Step:
    psi = step.frame.abscissa
    # the successor depends on (locus, functionality, psi, xi) only, not on the ordinate
    key = (step.locus, step.functionality, psi, xi)
    cache = automaton._transit_cache
    hit = cache.get(key)
    if hit is not None:
        return hit
    next_locus = automaton.jump_target(step.locus, psi)
    phi = automaton.apply(step.functionality, psi)
    next_psi = dyadic_product(phi, xi)
    out = automaton._consistent(next_locus, next_psi)
    if len(cache) < automaton.bound:
        cache[key] = out
    return out


def transit(automaton: Automaton, step: Step, next_excitation: Mapping) -> Step:
    """Apply the automaton's iterative operator to ``step`` under excitation ``next_excitation``.

    The successor's stimulus is the functionality's output joined with the
    excitation; its locus comes from the jump table evaluated on the current
    stimulus.  The input step need not be consistent.
    """
    automaton.check_step(step)
    xi = automaton.check_excitation(next_excitation)
    return _transit(automaton, step, xi)


@dataclass
class Walk:
    steps: list[Step]
    excitations: list[Choice] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, i):
        return self.steps[i]


def iterate(automaton: Automaton, start: Step, excitations: Iterable[Mapping]) -> Iterator[tuple[Step, Choice | None]]:
    """Lazily yield ``(step, excitation_that_produced_it)``; the start carries None."""
    automaton.check_step(start)
    step = start
    yield step, None
    for xi in excitations:
        xi = automaton.check_excitation(xi)
        step = _transit(automaton, step, xi)
        yield step, xi


def walk(automaton: Automaton, start: Step, excitations: Iterable[Mapping], length: int) -> Walk:
    """First ``length`` steps of the walk of ``start`` under the excitation sequence."""
    if length < 1:
        raise DomainError("walk length must be at least 1")
    automaton.check_step(start)
    steps = [start]
    used: list[Choice] = []
    source = iter(excitations)
    step = start
    for i in range(1, length):
        try:
            xi = next(source)
        except StopIteration:
            raise TruncationError(i) from None
        xi = automaton.check_excitation(xi)
        step = _transit(automaton, step, xi)
        steps.append(step)
        used.append(xi)
    return Walk(steps, used)


def project(walk: Walk | Sequence[Step], which: str) -> list:
    """Sequential path, process or procedure projection of a walk."""
    steps = walk.steps if isinstance(walk, Walk) else walk
    if which == "path":
        return [s.locus for s in steps]
    if which == "process":
        return [s.frame for s in steps]
    if which == "procedure":
        return [s.functionality for s in steps]
    raise DomainError(f"unknown projection {which!r}; use path, process or procedure")


def conjoins(frame: Frame, following: Frame) -> bool:
    """True when ``following`` starts from the persistent state ``frame`` ended in."""
    return restrict_choice(following.abscissa, frame.ordinate.domain) == frame.ordinate


def is_process(frames: Sequence[Frame]) -> bool:
    return all(conjoins(a, b) for a, b in zip(frames, frames[1:]))


def covers(automaton: Automaton, procedure: Sequence[str], frames: Sequence[Frame]) -> bool:
    return len(procedure) == len(frames) and all(
        fr.ordinate == automaton.apply(f, fr.abscissa) for f, fr in zip(procedure, frames)
    )


@dataclass(frozen=True)
class PigeonholeResult:
    witnessed: bool
    max_homogeneous_count: int
    witness: Choice | None


def check_under_pigeonhole(catalog_size: int, process_prefix: Iterable[Frame]) -> PigeonholeResult:
    """Finite-prefix under-pigeonhole test.

    Counts, for each abscissa, the distinct ordinates seen with it.  If some
    abscissa has more distinct ordinates than there are functionalities, no
    catalog of that size can cover the process.
    """
    seen: dict[Choice, set[Choice]] = {}
    for fr in process_prefix:
        seen.setdefault(fr.abscissa, set()).add(fr.ordinate)
    best, witness = 0, None
    for psi, outs in seen.items():
        if len(outs) > best:
            best, witness = len(outs), psi
    return PigeonholeResult(catalog_size < best, best, witness)
