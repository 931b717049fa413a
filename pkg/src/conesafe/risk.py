"""Zero-failure sampling statistics, compound Poisson risk and MIL-STD-882E classification."""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .errors import DomainError

SECONDS_PER_HOUR = 3600.0
HOURS_PER_YEAR = 8766.0  # 365.25 days

# layout of the published tables
POWER_N = (1, 5, 10, 15, 20, 30, 50, 100, 200, 500, 1000, 2000, 5000, 10000)
POWER_RHO = (0.001, 0.01, 0.05, 0.10, 0.50, 0.90)
POWER_RHO_LABELS = (".001", ".01", ".05", ".10", ".50", ".90")
INDIFFERENCE_N = POWER_N

LEVELS = ("A", "B", "C", "D", "E", "F")
LEVEL_NAMES = {"A": "Frequent", "B": "Probable", "C": "Occasional", "D": "Remote",
               "E": "Improbable", "F": "Eliminated"}
CATEGORIES = (1, 2, 3, 4)
CATEGORY_NAMES = {1: "Catastrophic", 2: "Critical", 3: "Marginal", 4: "Negligible"}
# lower bounds of levels A..D; E is everything below 1e-6
LEVEL_THRESHOLDS = (("A", 1e-1), ("B", 1e-2), ("C", 1e-3), ("D", 1e-6))
# monetary lower bounds of categories 1..3; 4 is everything below 100K
CATEGORY_THRESHOLDS = ((1, 10_000_000), (2, 1_000_000), (3, 100_000))

RISK_MATRIX = {
    "A": ("High", "High", "Serious", "Medium"),
    "B": ("High", "High", "Serious", "Medium"),
    "C": ("High", "Serious", "Medium", "Low"),
    "D": ("Serious", "Medium", "Medium", "Low"),
    "E": ("Medium", "Medium", "Medium", "Low"),
    "F": ("Eliminated",) * 4,
}


def _check_n(N) -> None:
    if isinstance(N, bool) or not isinstance(N, int) or N < 1:
        raise DomainError(f"sample size must be an integer >= 1, got {N!r}")


def _check_prob(x: float, what: str) -> None:
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"{what} must lie in [0, 1], got {x!r}")


@dataclass(frozen=True)
class SamplingPlan:
    N: int
    tolerated_failures: int = 0
    confidence: float = 0.5

    def __post_init__(self):
        _check_n(self.N)
        if self.tolerated_failures != 0:
            raise DomainError("only zero-failure plans are supported")
        if not 0.0 < self.confidence < 1.0:
            raise DomainError("confidence must lie strictly between 0 and 1")

    def power(self, rho: float) -> float:
        return power_function(self.N, rho)

    def upper_bound(self) -> float:
        return upper_bound(self.N, self.confidence)


def acceptance_probability(rho: float, N: int) -> float:
    """Chance that a zero-failure plan of size N accepts a population with failure proportion rho."""
    _check_prob(rho, "rho")
    _check_n(N)
    if rho == 1.0:
        return 0.0
    # (1-rho)^N through logs; the naive power loses ~N ulps near the indifference point
    return math.exp(N * math.log1p(-rho))


def power_function(N: int, rho: float) -> float:
    """Rejection probability of the zero-failure plan of size N."""
    return 1.0 - acceptance_probability(rho, N)


# a zero-failure plan never rejects a perfect population
ALPHA = 0.0


def upper_bound(N: int, confidence: float = 0.5) -> float:
    _check_n(N)
    if not 0.0 < confidence < 1.0:
        raise DomainError("confidence must lie strictly between 0 and 1")
    # 1 - (1-c)^(1/N), via expm1 to keep precision for large N
    return -math.expm1(math.log1p(-confidence) / N)


def indifference_proportion(N: int) -> float:
    return upper_bound(N, 0.5)


@dataclass(frozen=True)
class Indemnification:
    per_second: float
    per_hour: float
    rho_hat: float
    sample_size: int


def indemnify(N: int, edge_norm: float) -> Indemnification:
    """Upper bound on hazard intensity from a passed demonstration of size N.

    ``edge_norm`` is the edge arrival rate in events per second.
    """
    if not edge_norm >= 0:
        raise DomainError(f"edge norm must be non-negative, got {edge_norm!r}")
    rho = indifference_proportion(N)
    lam = rho * edge_norm
    return Indemnification(lam, lam * SECONDS_PER_HOUR, rho, N)


def poisson_pmf(lam: float, t: float, k: int) -> float:
    if lam < 0 or t < 0 or k < 0 or int(k) != k:
        raise DomainError("poisson_pmf needs lam >= 0, t >= 0 and integer k >= 0")
    mu = lam * t
    if mu == 0:
        return 1.0 if k == 0 else 0.0
    return math.exp(-mu + k * math.log(mu) - math.lgamma(k + 1))


@dataclass(frozen=True)
class CompoundPoissonModel:
    """Arrival rate ``lam`` (per hour), mean loss per arrival, idle ratio.

    ``idle_ratio`` 0 is the plain process.  When on/off mean durations are
    given they must reproduce the idle ratio.
    """

    lam: float
    loss_mean: float
    idle_ratio: float = 0.0
    mean_on: float | None = None
    mean_off: float | None = None

    def __post_init__(self):
        if self.lam < 0 or self.loss_mean < 0:
            raise DomainError("rate and mean loss must be non-negative")
        _check_prob(self.idle_ratio, "idle ratio")
        if (self.mean_on is None) != (self.mean_off is None):
            raise DomainError("give both on and off durations or neither")
        if self.mean_on is not None:
            if self.mean_on < 0 or self.mean_off < 0 or self.mean_on + self.mean_off <= 0:
                raise DomainError("on/off durations must be non-negative with a positive sum")
            iota = self.mean_off / (self.mean_on + self.mean_off)
            if abs(iota - self.idle_ratio) > 1e-9:
                raise DomainError(f"on/off durations give idle ratio {iota}, not {self.idle_ratio}")

    @classmethod
    def from_durations(cls, lam: float, loss_mean: float, mean_on: float, mean_off: float):
        total = mean_on + mean_off
        if total <= 0:
            raise DomainError("on/off durations must have a positive sum")
        return cls(lam, loss_mean, mean_off / total, mean_on, mean_off)


def cpp_expectation(model: CompoundPoissonModel, t: float) -> float:
    if t < 0:
        raise DomainError("duration must be non-negative")
    return (1.0 - model.idle_ratio) * model.lam * t * model.loss_mean


def statistical_risk(model: CompoundPoissonModel | Iterable[CompoundPoissonModel]) -> float:
    """Loss per unit time; a collection of independent hazards adds up."""
    if isinstance(model, CompoundPoissonModel):
        return (1.0 - model.idle_ratio) * model.lam * model.loss_mean
    return math.fsum(statistical_risk(m) for m in model)


def classify_level(annual_probability: float, eliminated: bool = False) -> str:
    if eliminated:
        return "F"
    _check_prob(annual_probability, "probability")
    for level, lower in LEVEL_THRESHOLDS:
        if annual_probability >= lower:
            return level
    return "E"


def classify_severity(monetary_loss: float) -> int:
    if monetary_loss < 0:
        raise DomainError("monetary loss must be non-negative")
    for cat, lower in CATEGORY_THRESHOLDS:
        if monetary_loss >= lower:
            return cat
    return 4


def risk_matrix(level: str, category: int) -> str:
    if level not in RISK_MATRIX:
        raise DomainError(f"unknown probability level {level!r}")
    if category not in CATEGORIES:
        raise DomainError(f"unknown severity category {category!r}")
    return RISK_MATRIX[level][category - 1]


@dataclass(frozen=True)
class MilStdAssessment:
    severity_category: int
    probability_level: str
    risk_value: str

    @classmethod
    def of(cls, level: str, category: int) -> "MilStdAssessment":
        return cls(category, level, risk_matrix(level, category))


def annual_probability(model: CompoundPoissonModel, hours: float = HOURS_PER_YEAR) -> float:
    """Chance of at least one arrival over ``hours`` of calendar time."""
    return -math.expm1(-(1.0 - model.idle_ratio) * model.lam * hours)


def standardize_exposure(natural_units: float, kappa: float, iota: float, p: float) -> float:
    if p <= 0:
        raise DomainError("years per life must be positive")
    _check_prob(iota, "idle ratio")
    return kappa * (1.0 - iota) / p * natural_units


# -- tables ------------------------------------------------------------------

def bare_decimal(x: float, places: int) -> str:
    """Fixed decimals with the leading zero dropped (``.0010``, ``1.0000``)."""
    s = f"{x:.{places}f}"
    return s[1:] if s.startswith("0.") else s


def power_table(ns: Sequence[int] = POWER_N, rhos: Sequence[float] = POWER_RHO) -> list[list[float]]:
    return [[power_function(n, r) for r in rhos] for n in ns]


def indifference_table(ns: Sequence[int] = INDIFFERENCE_N) -> list[float]:
    return [indifference_proportion(n) for n in ns]


def _power_rows() -> tuple[list[str], list[list[str]]]:
    header = ["N", *POWER_RHO_LABELS]
    rows = [[str(n)] + [bare_decimal(v, 4) for v in vals] for n, vals in zip(POWER_N, power_table())]
    return header, rows


def _indifference_rows() -> tuple[list[str], list[list[str]]]:
    header = ["N", "rho_I"]
    return header, [[str(n), bare_decimal(v, 5)] for n, v in zip(INDIFFERENCE_N, indifference_table())]


def _matrix_rows() -> tuple[list[str], list[list[str]]]:
    header = ["level"] + [str(c) for c in CATEGORIES]
    return header, [[lvl] + list(RISK_MATRIX[lvl]) for lvl in LEVELS]


def _levels_rows() -> tuple[list[str], list[list[str]]]:
    header = ["level", "lower_bound", "upper_bound"]
    rows, upper = [], "1"
    for lvl, lower in LEVEL_THRESHOLDS:
        rows.append([lvl, f"{lower:g}", upper])
        upper = f"{lower:g}"
    rows.append(["E", "0", upper])
    return header, rows


TABLES = {"power": _power_rows, "indifference": _indifference_rows,
          "matrix": _matrix_rows, "levels": _levels_rows}


def render_table(which: str, fmt: str = "text") -> str:
    if which not in TABLES:
        raise DomainError(f"unknown table {which!r}; choose from {sorted(TABLES)}")
    header, rows = TABLES[which]()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    if fmt == "json":
        return json.dumps({"table": which, "header": header, "rows": rows}, indent=2) + "\n"
    if fmt != "text":
        raise DomainError(f"unknown format {fmt!r}")
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    lines = ["  ".join(c.rjust(wd) for c, wd in zip(r, widths)) for r in [header, *rows]]
    lines.insert(1, "  ".join("-" * wd for wd in widths))
    return "\n".join(lines) + "\n"
