"""Finite-depth covering-measure estimation of constructed sets.

Everything here is exhaustive and exact: a set is materialized as the full
collection of depth-D residue cells it touches, never sampled.  The covering
estimate (hit cells / total cells) is therefore a true upper bound for the
measure of the set inside the unit window R^d x R^(n-d), and refining D can
only shrink it.  Decay of the estimate with D is the desk-scale shadow of
the measure-zero property; the decay tables are frozen as regression
fixtures, not asserted against a rate.

Enumeration cost is governed by an explicit budget (cells stored and (x, w)
pairs visited); exceeding it raises :class:`~kakeya.errors.BudgetExceeded`
with the exact counts.

The built-in line families carry a packed-residue fast path evaluated with
numpy; families without one fall back to element-level evaluation.  Both
routes are exact and the tests require them to produce identical cell sets.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import BudgetExceeded
from .families import FamilyDescriptor, phi_for_family
from .phi import PhiConfig, PhiVariant, phi_input_depth, variant_residue_table
from .ring import ElementVector, cell_index, element_from_cell

DEFAULT_CELL_BUDGET = 2 ** 28
DEFAULT_PAIR_BUDGET = 2 ** 28


@dataclass(frozen=True)
class CellSet:
    """The depth-D residue cells hit by a constructed set.

    ``bits`` is a flat boolean array over all ell^((d + n-d) * D) cells,
    indexed by w-cell code (major) and z-cell code (minor).  Immutable after
    construction.
    """

    depth: int
    ell: int
    w_dim: int
    z_dim: int
    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.bits.setflags(write=False)

    @property
    def total_cells(self) -> int:
        return self.ell ** ((self.w_dim + self.z_dim) * self.depth)

    @property
    def hit_count(self) -> int:
        return int(self.bits.sum())

    def estimate(self) -> Fraction:
        return Fraction(self.hit_count, self.total_cells)

    def contains(self, w_code: int, z_code: int) -> bool:
        return bool(self.bits[w_code * self.ell ** (self.z_dim * self.depth)
                              + z_code])

    def __eq__(self, other):
        if not isinstance(other, CellSet):
            return NotImplemented
        return (self.depth == other.depth and self.ell == other.ell
                and self.w_dim == other.w_dim and self.z_dim == other.z_dim
                and np.array_equal(self.bits, other.bits))


def covering_estimate(cs: CellSet) -> Fraction:
    """Hit count over total cells, an exact rational in [0, 1]."""
    return cs.estimate()


def _check_budget(cells: int, pairs: int, budget_cells: int, budget_pairs: int):
    if cells > budget_cells or pairs > budget_pairs:
        raise BudgetExceeded(cells, pairs, budget_cells, budget_pairs)


def _component_codes(combined: int, base: int, dim: int) -> list[int]:
    return [(combined // base ** i) % base for i in range(dim)]


def _element_vector(ring, combined: int, depth: int, dim: int) -> ElementVector:
    base = ring.ell ** depth
    return ElementVector(tuple(
        element_from_cell(ring, c, depth, depth)
        for c in _component_codes(combined, base, dim)))


def _vector_cell_code(v: ElementVector, D: int) -> int:
    base = v.ring.ell ** D
    code = 0
    for i in range(v.dim - 1, -1, -1):
        code = code * base + cell_index(v[i], D)
    return code


def build_set_cells(fam: FamilyDescriptor, phi_variant: PhiVariant, D: int, *,
                    budget_cells: int = DEFAULT_CELL_BUDGET,
                    budget_pairs: int = DEFAULT_PAIR_BUDGET,
                    x_cells=None, input_depth: int | None = None,
                    workers: int = 1) -> CellSet:
    """Exact hit-set of {(w, f(x, phi(x), w))} over the unit window.

    Enumerates every x in R^p at depth X = max(D, depth the phi variant
    needs) -- deep enough that the z-cell is fully determined -- and every w
    in R^d at depth D.  ``x_cells`` restricts the x enumeration to the given
    depth-X combined codes (diagnostic use); ``input_depth`` overrides X
    (used by the input-depth sufficiency re-check).
    """
    ell = fam.ring.ell
    X = input_depth if input_depth is not None else max(
        D, phi_input_depth(phi_variant, D, ell))
    nd = fam.out_dim
    total_cells = ell ** ((fam.d_dim + nd) * D)
    n_x = ell ** (fam.p_dim * X) if x_cells is None else len(x_cells)
    n_w = ell ** (fam.d_dim * D)
    _check_budget(total_cells, n_x * n_w, budget_cells, budget_pairs)

    fast = (fam.cells_eval is not None and fam.p_dim == 1 and fam.q_dim == 1
            and fam.d_dim == 1)
    if fast:
        bits = _build_fast(fam, phi_variant, D, X, x_cells, workers)
    else:
        bits = _build_generic(fam, phi_variant, D, X, x_cells, workers)
    return CellSet(depth=D, ell=ell, w_dim=fam.d_dim, z_dim=nd, bits=bits)


def _build_fast(fam, variant, D, X, x_cells, workers) -> np.ndarray:
    ell = fam.ring.ell
    cfg = PhiConfig(fam.ring, 1, 1)
    phi_tab = variant_residue_table(variant, cfg, D, X)
    if x_cells is None:
        codes = np.arange(ell ** X, dtype=np.int64)
    else:
        codes = np.asarray(sorted(x_cells), dtype=np.int64)
        phi_tab = phi_tab[codes]
    x_res = codes % ell ** D
    zc = ell ** D
    total = ell ** (2 * D)

    def run(w_lo: int, w_hi: int) -> np.ndarray:
        part = np.zeros(total, dtype=bool)
        for w in range(w_lo, w_hi):
            z = fam.cells_eval(fam.ring, D, x_res, phi_tab, w)
            part[w * zc + z] = True
        return part

    if workers <= 1:
        return run(0, zc)
    bounds = np.linspace(0, zc, workers + 1, dtype=int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda b: run(b[0], b[1]),
                              zip(bounds[:-1], bounds[1:])))
    bits = parts[0]
    for p in parts[1:]:
        bits |= p
    return bits


def _build_generic(fam, variant, D, X, x_cells, workers) -> np.ndarray:
    ell = fam.ring.ell
    nd = fam.out_dim
    zc = ell ** (nd * D)
    total = ell ** ((fam.d_dim + nd) * D)
    xs = range(ell ** (fam.p_dim * X)) if x_cells is None else sorted(x_cells)
    w_codes = range(ell ** (fam.d_dim * D))

    def run(x_chunk) -> np.ndarray:
        part = np.zeros(total, dtype=bool)
        for xc in x_chunk:
            x = _element_vector(fam.ring, xc, X, fam.p_dim)
            y = phi_for_family(fam, variant, x, D)
            for wc in w_codes:
                w = _element_vector(fam.ring, wc, D, fam.d_dim)
                z = fam.eval(x, y, w, D)
                part[wc * zc + _vector_cell_code(z, D)] = True
        return part

    if workers <= 1:
        return run(xs)
    xs = list(xs)
    chunks = [xs[i::workers] for i in range(workers)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run, chunks))
    bits = parts[0]
    for p in parts[1:]:
        bits |= p
    return bits


def cross_section_cells(fam: FamilyDescriptor, phi_variant: PhiVariant,
                        w: ElementVector, D: int, *,
                        budget_cells: int = DEFAULT_CELL_BUDGET,
                        budget_pairs: int = DEFAULT_PAIR_BUDGET,
                        input_depth: int | None = None) -> CellSet:
    """Hit z-cells for one fixed w (the cross-section of the built set).

    Probes the descriptor's right inverse at this w first, so rank
    deficiency surfaces as the descriptor's own error.
    """
    ell = fam.ring.ell
    X = input_depth if input_depth is not None else max(
        D, phi_input_depth(phi_variant, D, ell))
    nd = fam.out_dim
    total = ell ** (nd * D)
    n_x = ell ** (fam.p_dim * X)
    _check_budget(total, n_x, budget_cells, budget_pairs)

    zero_x = _element_vector(fam.ring, 0, max(X, D), fam.p_dim)
    y0 = phi_for_family(fam, phi_variant, zero_x, D)
    fam.dfdy_right_inverse(zero_x, y0, w, D)  # rank probe; may raise

    bits = np.zeros(total, dtype=bool)
    if (fam.cells_eval is not None and fam.p_dim == 1 and fam.q_dim == 1
            and fam.d_dim == 1):
        cfg = PhiConfig(fam.ring, 1, 1)
        phi_tab = variant_residue_table(phi_variant, cfg, D, X)
        codes = np.arange(ell ** X, dtype=np.int64)
        z = fam.cells_eval(fam.ring, D, codes % ell ** D, phi_tab,
                           cell_index(w[0], D))
        bits[z] = True
    else:
        for xc in range(n_x):
            x = _element_vector(fam.ring, xc, X, fam.p_dim)
            y = phi_for_family(fam, phi_variant, x, D)
            z = fam.eval(x, y, w, D)
            bits[_vector_cell_code(z, D)] = True
    return CellSet(depth=D, ell=ell, w_dim=0, z_dim=nd, bits=bits)


# ---------------------------------------------------------------------------
# Decay tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayRow:
    depth: int
    hit_cells: int
    total_cells: int
    estimate: Fraction
    input_depth: int
    seconds: float


@dataclass(frozen=True)
class DecayReport:
    family: str
    variant: str
    ring: str
    rows: tuple[DecayRow, ...]


def decay_report(fam: FamilyDescriptor, phi_variant: PhiVariant,
                 D_min: int, D_max: int, *,
                 budget_cells: int = DEFAULT_CELL_BUDGET,
                 budget_pairs: int = DEFAULT_PAIR_BUDGET,
                 workers: int = 1) -> DecayReport:
    """One exact hit-set per depth in [D_min, D_max].

    The refinement property (estimates non-increasing in D) is a theorem for
    exact hit-sets, so it is asserted here as an internal tripwire."""
    if D_min > D_max or D_min < 1:
        raise ValueError(f"bad depth range [{D_min}, {D_max}]")
    ell = fam.ring.ell
    for D in range(D_min, D_max + 1):  # fail fast before any work
        X = max(D, phi_input_depth(phi_variant, D, ell))
        _check_budget(ell ** ((fam.d_dim + fam.out_dim) * D),
                      ell ** (fam.p_dim * X + fam.d_dim * D),
                      budget_cells, budget_pairs)
    rows = []
    prev = None
    for D in range(D_min, D_max + 1):
        t0 = time.perf_counter()
        cs = build_set_cells(fam, phi_variant, D, budget_cells=budget_cells,
                             budget_pairs=budget_pairs, workers=workers)
        dt = time.perf_counter() - t0
        est = cs.estimate()
        if prev is not None and est > prev:
            raise RuntimeError(
                f"refinement violated: estimate rose from {prev} to {est} "
                f"at depth {D}")
        prev = est
        rows.append(DecayRow(D, cs.hit_count, cs.total_cells, est,
                             max(D, phi_input_depth(phi_variant, D, fam.ring.ell)),
                             dt))
    return DecayReport(fam.name, phi_variant.value, str(fam.ring), tuple(rows))


def _decimal6(x: Fraction) -> str:
    q, r = divmod(round(x * 10 ** 6), 10 ** 6)
    return f"{q}.{r:06d}"


DECAY_CSV_HEADER = "D,hit_cells,total_cells,estimate_rational,estimate_decimal,input_depth,seconds"


def decay_csv(report: DecayReport) -> str:
    lines = [DECAY_CSV_HEADER]
    for r in report.rows:
        lines.append(
            f"{r.depth},{r.hit_cells},{r.total_cells},"
            f"{r.estimate.numerator}/{r.estimate.denominator},"
            f"{_decimal6(r.estimate)},{r.input_depth},{r.seconds:.3f}")
    return "\n".join(lines) + "\n"


def decay_json(report: DecayReport, experimental: bool = False) -> str:
    doc = {
        "family": report.family,
        "phi": report.variant,
        "ring": report.ring,
        "experimental": experimental,
        "rows": [
            {
                "D": r.depth,
                "hit_cells": r.hit_cells,
                "total_cells": r.total_cells,
                "estimate_rational":
                    f"{r.estimate.numerator}/{r.estimate.denominator}",
                "estimate_decimal": _decimal6(r.estimate),
                "input_depth": r.input_depth,
                "seconds": round(r.seconds, 3),
            }
            for r in report.rows
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def input_depth_sufficiency(fam: FamilyDescriptor, phi_variant: PhiVariant,
                            D: int, *, extra: int = 2,
                            budget_cells: int = DEFAULT_CELL_BUDGET,
                            budget_pairs: int = DEFAULT_PAIR_BUDGET) -> bool:
    """Re-build with input depth X + extra and compare cell sets.

    Exactness of the hit-set means deepening the x enumeration must change
    nothing."""
    X = max(D, phi_input_depth(phi_variant, D, fam.ring.ell))
    a = build_set_cells(fam, phi_variant, D, budget_cells=budget_cells,
                        budget_pairs=budget_pairs)
    b = build_set_cells(fam, phi_variant, D, input_depth=X + extra,
                        budget_cells=budget_cells, budget_pairs=budget_pairs)
    return a == b


# ---------------------------------------------------------------------------
# Direction coverage audit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverageReport:
    family: str
    variant: str
    depth: int
    direction_cells: int
    w_cells: int
    missing: tuple[tuple[int, int], ...]
    vertical_excluded: bool = True

    @property
    def missing_count(self) -> int:
        return len(self.missing)


def direction_coverage(fam: FamilyDescriptor, phi_variant: PhiVariant, D: int,
                       *, budget_cells: int = DEFAULT_CELL_BUDGET,
                       budget_pairs: int = DEFAULT_PAIR_BUDGET,
                       drop_direction_cell: int | None = None) -> CoverageReport:
    """Audit that the built set contains a full line for every direction.

    Builds the cell set, then independently re-enumerates the construction
    and records, per (depth-D direction cell, w cell), whether a surface
    point from that direction is present in the set.  A (direction, w) pair
    with no present point is reported as missing.  ``drop_direction_cell``
    deletes one direction's row from the record afterwards (fault injection
    for tests).  The vertical line w = const is not a member of the family
    and is reported as excluded by design, never as a failure.
    """
    ell = fam.ring.ell
    X = max(D, phi_input_depth(phi_variant, D, ell))
    n_dirs = ell ** (fam.p_dim * D)
    n_w = ell ** (fam.d_dim * D)
    _check_budget(n_dirs * n_w, ell ** (fam.p_dim * X) * n_w,
                  budget_cells, budget_pairs)
    cs = build_set_cells(fam, phi_variant, D, budget_cells=budget_cells,
                         budget_pairs=budget_pairs)

    presence = np.zeros((n_dirs, n_w), dtype=bool)
    if (fam.cells_eval is not None and fam.p_dim == 1 and fam.q_dim == 1
            and fam.d_dim == 1):
        cfg = PhiConfig(fam.ring, 1, 1)
        phi_tab = variant_residue_table(phi_variant, cfg, D, X)
        codes = np.arange(ell ** X, dtype=np.int64)
        x_res = codes % ell ** D
        zc = ell ** D
        for w in range(n_w):
            z = fam.cells_eval(fam.ring, D, x_res, phi_tab, w)
            ok = cs.bits[w * zc + z]
            presence[x_res[ok], w] = True
    else:
        x_base = ell ** X
        for xc in range(ell ** (fam.p_dim * X)):
            x = _element_vector(fam.ring, xc, X, fam.p_dim)
            y = phi_for_family(fam, phi_variant, x, D)
            dcode = 0
            for i in range(fam.p_dim - 1, -1, -1):
                dcode = dcode * ell ** D + ((xc // x_base ** i) % x_base) % ell ** D
            for wc in range(n_w):
                w = _element_vector(fam.ring, wc, D, fam.d_dim)
                z = fam.eval(x, y, w, D)
                if cs.contains(wc, _vector_cell_code(z, D)):
                    presence[dcode, wc] = True

    if drop_direction_cell is not None:
        presence[drop_direction_cell, :] = False
    missing = tuple((int(d), int(w)) for d, w in zip(*np.nonzero(~presence)))
    return CoverageReport(fam.name, phi_variant.value, D, n_dirs, n_w,
                          missing)
