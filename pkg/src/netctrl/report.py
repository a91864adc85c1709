"""Assemble every analysis into one JSON-serialisable report."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from .ctrb import (
    DEFAULT_TOL_RANK,
    default_tol_eig,
    kalman_decompose,
    left_eigen_obstruction,
    max_independent_row_sets,
    pbh_target_check,
    target_controllable,
    target_ctrb_matrix,
    theorem2_check,
)
from .extensions import (
    GeneralLinearSpec,
    Prop5Verdict,
    general_linear_triple,
    prop5_check,
    scc_analyze,
    theorem3_check,
)
from .graph import Graph, system_triple
from .partition import suggest_targets_cor1, theorem1_check
from .reachability import analyze_reachability, prop1_check

SCHEMA = 1


@dataclass
class AnalysisOptions:
    exact: bool = True
    tol_eig: float | None = None
    tol_rank: float = DEFAULT_TOL_RANK
    cap: int = 64
    order: int = 1
    general_linear: GeneralLinearSpec | None = None


def graph_summary(g: Graph) -> dict:
    return {
        "n": g.n,
        "edges": [[s, d, str(w)] for s, d, w in g.edges],
        "leaders": list(g.leaders),
        "targets": list(g.targets),
    }


def build_report(g: Graph, opts: AnalysisOptions | None = None) -> dict:
    """Run the full pipeline.  ``report["verdict"]["target_controllable"]`` is
    True, False or None (undetermined by the enabled checks)."""
    opts = opts or AnalysisOptions()
    t = system_triple(g)
    tol_eig = opts.tol_eig if opts.tol_eig is not None else default_tol_eig(t.a.to_numpy())
    report: dict = {
        "schema": SCHEMA,
        "tool_version": __version__,
        "graph": graph_summary(g),
        "tolerances": {"eig": tol_eig, "rank": opts.tol_rank},
        "exact": opts.exact,
    }
    certificates: list[dict] = []

    reach = analyze_reachability(g)
    report["reachability"] = reach.to_dict()
    thm1 = theorem1_check(g, exact=opts.exact)
    report["partition"] = thm1.to_dict()

    rank = None
    if opts.exact:
        w = target_ctrb_matrix(t)
        rank = target_controllable(t, w)
        report["rank"] = rank.to_dict()
        report["prop1"] = prop1_check(g, w).to_dict()
        dec = kalman_decompose(t)
        sets, truncated = max_independent_row_sets(dec.p1, opts.cap)
        report["kalman"] = {
            "kappa": dec.kappa,
            "p1": [[str(x) for x in r] for r in dec.p1.iter_rows()],
            "admissible_target_sets": [list(s) for s in sets],
            "truncated": truncated,
            "theorem2": theorem2_check(t, dec, rank.dim).to_dict(),
        }
        report["corollary1_candidates"] = [
            {"targets": list(c.targets), "rank": c.rank} for c in suggest_targets_cor1(g, opts.cap)
        ]
        if not rank.controllable:
            certificates.append({"kind": "rank-deficit", "dim": rank.dim, "p": rank.p,
                                 "left_null": [str(x) for x in rank.left_null]})

    pbh = pbh_target_check(t, tol_eig, opts.tol_rank)
    report["pbh"] = [e.to_dict() for e in pbh]
    report["pbh_all_pass"] = all(e.passed for e in pbh)
    obstruction = left_eigen_obstruction(t, tol_eig)
    report["obstruction"] = obstruction.to_dict() if obstruction else None

    scc = scc_analyze(g)
    p5 = prop5_check(g, exact=opts.exact, scc=scc)
    report["scc"] = scc.to_dict()
    report["prop5"] = p5.to_dict()

    if opts.order > 1:
        if opts.exact:
            report["lift"] = {"order": opts.order, **theorem3_check(t, opts.order).to_dict()}
        else:
            report["lift"] = {"order": opts.order, "skipped": "exact arithmetic disabled"}
    if opts.general_linear is not None:
        spec = opts.general_linear
        gl = {"sigma": spec.sigma, "prop5": prop5_check(g, spec, exact=opts.exact, scc=scc).to_dict()}
        if opts.exact:
            gl["rank"] = target_controllable(general_linear_triple(g, spec)).to_dict()
        report["general_linear"] = gl

    if reach.unreachable_targets:
        certificates.append({"kind": "unreachable-targets",
                             "nodes": sorted(reach.unreachable_targets)})
    if thm1.applicable and thm1.controllable is False and max(thm1.cell_target_counts) > 1:
        crowded = [list(c) for c, k in zip(thm1.partition.cells, thm1.cell_target_counts) if k > 1]
        certificates.append({"kind": "targets-share-cell", "cells": crowded})
    if p5.verdict is Prop5Verdict.NOT_TARGET_CONTROLLABLE:
        certificates.append({"kind": "scc-witness", "component": p5.witness})
    if obstruction is not None:
        certificates.append({"kind": "left-eigenvector", **obstruction.to_dict()})
    failing = [e.to_dict() for e in pbh if not e.passed]
    if failing:
        certificates.append({"kind": "pbh-rank", "failures": failing})

    if rank is not None:
        verdict, decided_by = rank.controllable, "exact-rank"
    elif thm1.applicable:
        verdict, decided_by = thm1.controllable, "partition"
    elif certificates:
        verdict, decided_by = False, certificates[0]["kind"]
    else:
        verdict, decided_by = None, "undetermined"
    report["verdict"] = {
        "target_controllable": verdict,
        "decided_by": decided_by,
        "certificates": certificates if verdict is False else [],
    }
    return report


def _encode(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"cannot encode {obj!r} in JSON")
        text = format(obj, ".17g")
        if not any(c in text for c in ".en"):
            text += ".0"
        out.append(text)
    elif isinstance(obj, Fraction):
        _encode(str(obj), out)
    elif isinstance(obj, str):
        import json
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            _encode(str(k), out)
            out.append(": ")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    else:
        try:
            import numpy as np
            if isinstance(obj, np.generic):
                _encode(obj.item(), out)
                return
        except ImportError:  # pragma: no cover
            pass
        raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    out: list[str] = []
    _encode(obj, out)
    return "".join(out)
