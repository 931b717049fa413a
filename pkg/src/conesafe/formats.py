"""JSON forms of walks, cones, profiles and demonstration reports.

Frames are written with explicit variable names so dumps diff cleanly.
Every ``*_to_dict`` has a ``*_from_dict`` inverse that rebuilds an equal value.
"""

from __future__ import annotations

import json
from collections.abc import Mapping

import numpy as np

from .automaton import Frame, Step, Walk
from .ensemble import Choice
from .inference import Cone, PredecessorWalk, StoppingRule


def step_to_dict(s: Step) -> dict:
    return {"locus": s.locus, "functionality": s.functionality,
            "abscissa": s.abscissa.to_dict(), "ordinate": s.ordinate.to_dict()}


def step_from_dict(d: Mapping) -> Step:
    return Step(d["locus"], d["functionality"], Frame(Choice(d["abscissa"]), Choice(d["ordinate"])))


def walk_to_dict(w: Walk) -> dict:
    return {"steps": [step_to_dict(s) for s in w.steps],
            "excitations": [x.to_dict() for x in w.excitations]}


def walk_from_dict(d: Mapping) -> Walk:
    return Walk([step_from_dict(s) for s in d["steps"]], [Choice(x) for x in d.get("excitations", [])])


def cone_to_dict(c: Cone) -> dict:
    return {
        "crux": step_to_dict(c.crux),
        "stopping": {"max_depth": c.stopping.max_depth, "entry_loci": sorted(c.stopping.entry_loci)},
        "walks": [[step_to_dict(s) for s in w.steps] for w in c.walks],
        "acyclic": c.acyclic,
    }


def cone_from_dict(d: Mapping) -> Cone:
    stop = StoppingRule(d["stopping"]["max_depth"], frozenset(d["stopping"].get("entry_loci", ())))
    walks = tuple(PredecessorWalk(tuple(step_from_dict(s) for s in w)) for w in d["walks"])
    return Cone(step_from_dict(d["crux"]), walks, stop, bool(d["acyclic"]))


def profile_to_dict(p) -> dict:
    return {
        "reference": p.reference,
        "support": [{"step": step_to_dict(s), "probability": p.probability[s], "count": p.counts[s]}
                    for s in p.support],
        "total_matches": p.total_matches,
        "walk_length": p.walk_length,
        "seed": p.seed,
    }


def profile_from_dict(d: Mapping):
    from .profile import RelativeProfile
    support, prob, counts = [], {}, {}
    for item in d["support"]:
        s = step_from_dict(item["step"])
        support.append(s)
        prob[s] = float(item["probability"])
        counts[s] = int(item["count"])
    return RelativeProfile(tuple(support), prob, counts, int(d["total_matches"]),
                           int(d["walk_length"]), dict(d.get("reference", {})), d.get("seed"))


def _plain(x):
    # numpy scalars and tuples into JSON-native values
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, Mapping):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def report_to_dict(r) -> dict:
    return {
        "sample_size": r.sample_size,
        "failures": r.failures,
        "status": r.status,
        "seed": r.seed,
        "alpha": r.alpha,
        "mle_no_assurance": r.mle,
        "indifference_upper_bound": r.indifference_upper_bound,
        "edge_norm_per_second": r.edge_norm,
        "indemnification_per_second": r.indemnification_per_second,
        "indemnification_per_hour": r.indemnification_per_hour,
        "provenance": _plain(r.provenance),
        "items": [{"item": it.item, "walk_id": it.walk_id, "edge_step": step_to_dict(it.edge_step),
                   "outcome": "pass" if it.passed else "fail", "violated": list(it.violated)}
                  for it in r.items],
    }


def report_from_dict(d: Mapping):
    from .demonstration import DemonstrationReport, ItemRecord
    items = [ItemRecord(it["item"], it["walk_id"], step_from_dict(it["edge_step"]),
                        it["outcome"] == "pass", tuple(it["violated"])) for it in d["items"]]
    return DemonstrationReport(d["sample_size"], d["failures"], items, d["seed"], dict(d["provenance"]),
                               d["indifference_upper_bound"], d["indemnification_per_second"],
                               d["edge_norm_per_second"], d["alpha"])


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
