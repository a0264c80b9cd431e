#!/usr/bin/env python3
"""External MILP backend: solves a model.json with scipy.optimize.milp (HiGHS).

usage: scipy_milp_backend.py MODEL_JSON SOLUTION_JSON
"""
import json
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import csr_matrix


def main(argv):
    if len(argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    with open(argv[1]) as f:
        model = json.load(f)
    n = len(model["variables"])
    sign = -1.0 if model["sense"] == "max" else 1.0
    c = sign * np.asarray(model["objective"], dtype=float)
    lb = np.array([-np.inf if v["lb"] is None else v["lb"] for v in model["variables"]], dtype=float)
    ub = np.array([np.inf if v["ub"] is None else v["ub"] for v in model["variables"]], dtype=float)
    integrality = np.array([1 if v["binary"] else 0 for v in model["variables"]])

    rows, cols, vals, lo, hi = [], [], [], [], []
    for r, con in enumerate(model["constraints"]):
        rows += [r] * len(con["index"])
        cols += con["index"]
        vals += con["value"]
        rel, rhs = con["relation"], con["rhs"]
        lo.append(-np.inf if rel == "<=" else rhs)
        hi.append(np.inf if rel == ">=" else rhs)
    constraints = []
    if lo:
        a = csr_matrix((vals, (rows, cols)), shape=(len(lo), n))
        constraints.append(LinearConstraint(a, lo, hi))

    params = model.get("params", {})
    options = {
        "mip_rel_gap": params.get("relative_gap", 1e-6),
        "time_limit": params.get("time_limit_seconds", 300.0),
        "disp": False,
    }
    res = milp(c, constraints=constraints, integrality=integrality,
               bounds=Bounds(lb, ub), options=options)

    out = {}
    if res.status == 0:
        out["status"] = "optimal"
    elif res.status == 2:
        out["status"] = "infeasible"
    elif res.status == 3:
        out["status"] = "unbounded"
    else:
        out["status"] = "limit-reached"
    if res.x is not None:
        out["values"] = [float(v) for v in res.x]
        const = model.get("objective_constant", 0.0)
        bound = getattr(res, "mip_dual_bound", None)
        if bound is not None and np.isfinite(bound):
            out["bound"] = sign * float(bound) + const
    out["nodes"] = int(getattr(res, "mip_node_count", 0) or 0)
    with open(argv[2], "w") as f:
        json.dump(out, f)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
