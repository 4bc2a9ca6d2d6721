#!/usr/bin/env python3
"""Cross-check an exported MPS model against GLPK (via cvxopt).

Usage:
    sorc export-mps scenario.json --out model.mps
    python3 tools/crosscheck_glpk.py model.mps

Parses the free-format MPS file independently of the Rust code, hands the
matrices to GLPK, and prints the optimal objective for comparison with the
tool's own solve. Requires cvxopt built with GLPK.
"""

import sys

from cvxopt import glpk, matrix, spmatrix


def parse_mps(path):
    rows = []  # (name, sense)
    obj_row = None
    cols = {}
    col_order = []
    obj_coef = {}
    rhs = {}
    bounds = {}
    integer = set()
    in_int = False
    cur = None
    for raw in open(path):
        line = raw.rstrip("\n")
        if not line.strip() or line.strip().startswith("*"):
            continue
        toks = line.split()
        if not line.startswith((" ", "\t")):
            cur = toks[0]
            continue
        if cur == "ROWS":
            sense, name = toks
            if sense == "N":
                obj_row = name
            else:
                rows.append((name, sense))
        elif cur == "COLUMNS":
            if len(toks) >= 3 and toks[1] == "'MARKER'":
                in_int = toks[2] == "'INTORG'"
                continue
            col = toks[0]
            if col not in cols:
                cols[col] = []
                col_order.append(col)
                if in_int:
                    integer.add(col)
            for rname, val in zip(toks[1::2], toks[2::2]):
                if rname == obj_row:
                    obj_coef[col] = obj_coef.get(col, 0.0) + float(val)
                else:
                    cols[col].append((rname, float(val)))
        elif cur == "RHS":
            for rname, val in zip(toks[1::2], toks[2::2]):
                rhs[rname] = float(val)
        elif cur == "BOUNDS":
            btype, _set, col = toks[0], toks[1], toks[2]
            val = float(toks[3]) if len(toks) > 3 else None
            lo, up = bounds.get(col, (0.0, None))
            if btype == "UP":
                up = val
            elif btype == "LO":
                lo = val
            elif btype == "FX":
                lo = up = val
            elif btype == "FR":
                lo, up = None, None
            elif btype == "MI":
                lo = None
            elif btype == "PL":
                up = None
            elif btype == "BV":
                lo, up = 0.0, 1.0
            bounds[col] = (lo, up)
    return rows, cols, col_order, obj_coef, rhs, bounds, integer


def main(path):
    rows, cols, col_order, obj_coef, rhs, bounds, integer = parse_mps(path)
    n = len(col_order)
    cidx = {name: i for i, name in enumerate(col_order)}
    c = matrix([obj_coef.get(name, 0.0) for name in col_order])

    eq_rows = [name for name, s in rows if s == "E"]
    eq_pos = {name: k for k, name in enumerate(eq_rows)}
    row_sense = dict(rows)
    row_slot = {}
    ineq = 0
    h = []
    for name, s in rows:
        if s != "E":
            row_slot[name] = ineq
            ineq += 1
            h.append(rhs.get(name, 0.0) * (1 if s == "L" else -1))
    Ai, Aj, Av = [], [], []
    Gi, Gj, Gv = [], [], []
    for col, entries in cols.items():
        j = cidx[col]
        for rname, val in entries:
            if row_sense[rname] == "E":
                Ai.append(eq_pos[rname])
                Aj.append(j)
                Av.append(val)
            else:
                sign = 1.0 if row_sense[rname] == "L" else -1.0
                Gi.append(row_slot[rname])
                Gj.append(j)
                Gv.append(sign * val)
    b = [rhs.get(name, 0.0) for name in eq_rows]
    for col in col_order:
        j = cidx[col]
        lo, up = bounds.get(col, (0.0, None))
        if up is not None:
            Gi.append(ineq)
            Gj.append(j)
            Gv.append(1.0)
            h.append(up)
            ineq += 1
        if lo is not None:
            Gi.append(ineq)
            Gj.append(j)
            Gv.append(-1.0)
            h.append(-lo)
            ineq += 1

    G = spmatrix(Gv, Gi, Gj, (ineq, n))
    A = spmatrix(Av, Ai, Aj, (len(eq_rows), n))
    binaries = set(cidx[name] for name in integer)
    glpk.options["msg_lev"] = "GLP_MSG_OFF"
    status, x = glpk.ilp(c, G, matrix(h), A, matrix(b), B=binaries)
    if status != "optimal":
        print(f"GLPK status: {status}")
        return 1
    obj = sum(obj_coef.get(name, 0.0) * x[cidx[name]] for name in col_order)
    print(f"GLPK objective: {obj:.12g}")
    print(f"({n} columns, {len(eq_rows)} equalities, {ineq} inequalities, {len(binaries)} binaries)")
    return 0


if __name__ == "__main__":
    if len(sys.argv) != 2:
        print(__doc__)
        sys.exit(2)
    sys.exit(main(sys.argv[1]))
