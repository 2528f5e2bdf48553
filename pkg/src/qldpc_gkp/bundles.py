"""Generators for the code bundles shipped in ``qldpc_gkp/data``.

Run ``python -m qldpc_gkp.bundles [out_dir]`` to regenerate them.
"""

from __future__ import annotations

import sys
from pathlib import Path

from . import codes
from .io import save_bundle
from .schedule import coloring_schedule, greedy_schedule, serial_schedule, split_levels, term_schedule


def _per_basis(code, make):
    return {b: (make(code.check_matrix(b)) if code.check_matrix(b).shape[0] else None) for b in ("X", "Z")}


def bb144_schedules(code):
    a_mats, b_mats = codes.bivariate_bicycle_terms(**codes.BB144)
    half = code.n // 2
    # H_X = [A | B], H_Z = [B^T | A^T]; every monomial is a perfect matching
    sx = term_schedule(a_mats + b_mats, [0] * 3 + [half] * 3)
    sz = term_schedule([m.T for m in b_mats] + [m.T for m in a_mats], [0] * 3 + [half] * 3)
    return {"depth6": {"X": sx, "Z": sz}, "greedy": _per_basis(code, greedy_schedule)}


def lp1054_schedules(code):
    shallow = _per_basis(code, coloring_schedule)
    deep = {b: split_levels(s, 5) for b, s in shallow.items()}
    return {"depth8": shallow, "depth40": deep}


def small_schedules(code):
    return {"greedy": _per_basis(code, greedy_schedule), "serial": _per_basis(code, serial_schedule)}


def builtin_codes():
    rep = codes.repetition_code(3)
    hgp = codes.hypergraph_product(codes.repetition_checks(3), codes.repetition_checks(3), name="hgp13")
    hgp = codes.CssCode(hgp.h_x, hgp.h_z, d=3, name="hgp13")
    steane = codes.steane_code()
    bb = codes.bb144()
    lp = codes.tanner_lifted_product()
    return [
        (rep, small_schedules(rep)),
        (hgp, small_schedules(hgp)),
        (steane, small_schedules(steane)),
        (bb, bb144_schedules(bb)),
        (lp, lp1054_schedules(lp)),
    ]


def write_builtin_bundles(out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    return [save_bundle(out_dir / code.name, code, schedules) for code, schedules in builtin_codes()]


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent / "data"
    for p in write_builtin_bundles(target):
        print(p)
