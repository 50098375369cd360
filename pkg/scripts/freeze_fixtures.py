#!/usr/bin/env python3
"""Regenerate the frozen regression fixtures under tests/fixtures/.

The values written here are oracle outputs (exhaustive enumerations and
direct integer scans), frozen on first run; the test suite replays the same
computations and demands bit-identical results.  Rerun only when a deliberate
behaviour change invalidates them, and commit the diff.
"""

from __future__ import annotations

import json
import pathlib
import sys
import time
from fractions import Fraction

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from kakeya.analysis import certify_lemma_bounds, vsd_counterexample_scan
from kakeya.families import kakeya_line_family
from kakeya.measure import decay_report
from kakeya.phi import PhiVariant, phi_dh_eval
from kakeya.ring import (
    add,
    element_from_cell,
    format_element,
    padic_ring,
    power_series_ring,
    truncate,
)

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def decay_fixture_csv(report) -> str:
    # seconds are wall time, the one nondeterministic field; fixtures omit it
    lines = ["D,hit_cells,total_cells,estimate_rational,estimate_decimal,input_depth"]
    for r in report.rows:
        est = r.estimate
        q, rem = divmod(round(est * 10 ** 6), 10 ** 6)
        lines.append(f"{r.depth},{r.hit_cells},{r.total_cells},"
                     f"{est.numerator}/{est.denominator},{q}.{rem:06d},"
                     f"{r.input_depth}")
    return "\n".join(lines) + "\n"


def freeze_decay():
    f2 = power_series_ring(2)
    fam = kakeya_line_family(f2)
    for variant, name in ((PhiVariant.SAWYER, "decay_kakeya_sawyer_fq2.csv"),
                          (PhiVariant.DH, "decay_kakeya_dh_fq2.csv")):
        t0 = time.perf_counter()
        rep = decay_report(fam, variant, 2, 10)
        (FIXTURES / name).write_text(decay_fixture_csv(rep))
        print(f"{name}: {time.perf_counter() - t0:.1f}s")


def freeze_lemma_minimal_n():
    out = {}
    for ell in (2, 3):
        table = {}
        for A in range(9):
            for B in range(9):
                rep = certify_lemma_bounds(A, B, 10 ** 6, ell)
                table[f"{A},{B}"] = rep.minimal_n
        out[str(ell)] = table
    path = FIXTURES / "lemma_minimal_n.json"
    path.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    print(f"{path.name}: {2 * 81} scans frozen")


def freeze_dh_carry_counterexample():
    z2 = padic_ring(2)
    for a in range(2 ** 6):
        for b in range(2 ** 6):
            ea = element_from_cell(z2, a, 6, 6)
            eb = element_from_cell(z2, b, 6, 6)
            lhs = phi_dh_eval(truncate(add(ea, eb), 6), 5)
            rhs = truncate(add(phi_dh_eval(ea, 5), phi_dh_eval(eb, 5)), 5)
            if lhs != rhs:
                doc = {
                    "ring": "zp:2",
                    "input_depth": 6,
                    "output_depth": 5,
                    "a": format_element(ea),
                    "b": format_element(eb),
                    "map_of_sum": format_element(lhs),
                    "sum_of_maps": format_element(rhs),
                }
                path = FIXTURES / "dh_carry_counterexample.json"
                path.write_text(json.dumps(doc, indent=1) + "\n")
                print(f"{path.name}: first failing pair ({a}, {b})")
                return
    raise SystemExit("no counterexample found; additivity unexpectedly holds")


def freeze_diff_example():
    scan = vsd_counterexample_scan(2, 10 ** 4, Fraction(1, 10))
    doc = {
        "p": 2,
        "k_max": 10 ** 4,
        "alpha": "1/10",
        "crossover": scan.crossover,
        "final_strict_margin": scan.final_strict_margin,
    }
    path = FIXTURES / "diff_example.json"
    path.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"{path.name}: crossover {scan.crossover}, "
          f"final strict margin {scan.final_strict_margin}")


if __name__ == "__main__":
    FIXTURES.mkdir(parents=True, exist_ok=True)
    freeze_decay()
    freeze_lemma_minimal_n()
    freeze_dh_carry_counterexample()
    freeze_diff_example()
