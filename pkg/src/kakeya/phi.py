"""The layered series construction of a universal function phi : R^p -> R^q.

The construction combines three ingredients:

* a digit schedule ``alpha(j) = j(j+1)/2`` slicing an input into blocks of
  degrees [alpha(j), alpha(j+1)) (:func:`projection`);
* finite value sets ``S_k`` (digit support on degrees [-lambda(k), k]) and the
  finite spaces ``Omega_k`` of S_k-valued functions constant on depth-k cells,
  enumerated as q-by-p matrix functions r_0, r_1, ... block by block
  (:func:`decode_matrix_fn`);
* the series  phi(x) = sum_k r_k(x) . p_k(x),  which converges because the
  slice valuations grow quadratically while the value floors sink only
  logarithmically.

Everything here is exact at an explicit digit depth.  A vectorized twin of
the evaluator (:func:`phi_residue_table`) computes phi on every residue cell
at once using the packed-code layer of :mod:`kakeya.ring`; tests pin it to
the element-level evaluator.

The alternative digit-shift construction (variant tag ``dh``) is
:func:`phi_dh_eval`: output digit j is input digit j+1, except forced to zero
when j+2 is a power of two.  Applied verbatim in both ring modes; over the
carrying ring it is deliberately *not* additive, and tests pin a
counterexample.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import BadIndex, InsufficientDepth, NegativeValuation, NotInSk
from .ring import (
    Element,
    ElementMatrix,
    ElementVector,
    RingSpec,
    cell_index,
    element_from_digits,
    mat_vec,
    reduce_to_R,
    residue_add,
    residue_mul,
    residue_shift_down,
    truncate,
    zero,
)


class PhiVariant(enum.Enum):
    """Which universal function a construction should use."""

    SAWYER = "sawyer"   # the layered series construction (this module's phi)
    DH = "dh"           # the digit-shift rule (phi_dh_eval)


@dataclass(frozen=True, slots=True)
class PhiConfig:
    """Ring and dimensions (p inputs, q outputs) of the construction."""

    ring: RingSpec
    p_dim: int = 1
    q_dim: int = 1

    def __post_init__(self):
        if self.p_dim < 1 or self.q_dim < 1:
            raise ValueError("dimensions must be >= 1")


def alpha(j: int) -> int:
    """Schedule boundary: digit block j covers degrees [alpha(j), alpha(j+1))."""
    if j < 0:
        raise BadIndex(f"alpha needs j >= 0, got {j}")
    return j * (j + 1) // 2


def lambda_floor(k: int, ell: int) -> int:
    """floor(log_ell k), by integer comparison against powers of ell."""
    if k < 1:
        raise BadIndex(f"lambda_floor needs k >= 1, got {k}")
    e, p = 0, 1
    while p * ell <= k:
        p *= ell
        e += 1
    return e


def summand_valuation_floor(k: int, ell: int) -> int:
    """Worst-case valuation of the k-th series term: alpha(k) - lambda(max(k,1)).

    Nondecreasing in k, so it also drives the truncation index and the
    continuity modulus.
    """
    return alpha(k) - lambda_floor(max(k, 1), ell)


def projection(x: ElementVector, j: int) -> ElementVector:
    """Componentwise digit slice of degrees [alpha(j), alpha(j+1))."""
    return ElementVector(tuple(projection_element(e, j) for e in x))


def projection_element(e: Element, j: int) -> Element:
    lo, hi = alpha(j), alpha(j + 1)
    if not e.is_zero and e.lowest_degree < 0:
        raise NegativeValuation("projection is defined on R only")
    if e.depth < hi:
        raise InsufficientDepth(hi, e.depth, f"projection p_{j}")
    if e.is_zero:
        return Element(e.ring, 0, (), e.depth)
    ds = [e.digit(d) for d in range(lo, hi)]
    return element_from_digits(ds, lo, e.ring, e.depth)


# ---------------------------------------------------------------------------
# Value sets S_k and the enumerated matrix-function blocks Omega_k
# ---------------------------------------------------------------------------

def sk_size(k: int, ell: int) -> int:
    """Number of K-elements supported on degrees [-lambda(k), k]."""
    return ell ** (k + lambda_floor(k, ell) + 1)


def sk_element_at(k: int, ring: RingSpec, n: int, W: int | None = None) -> Element:
    """The n-th S_k element: base-ell digits of n laid over degrees
    -lambda(k), ..., k.  Index 0 is the zero element."""
    lam = lambda_floor(k, ring.ell)
    span = k + lam + 1
    ds = []
    for _ in range(span):
        n, r = divmod(n, ring.ell)
        ds.append(r)
    return element_from_digits(ds, -lam, ring, W if W is not None else k + 1)


def sk_elements(k: int, ring: RingSpec) -> Iterator[Element]:
    """All S_k elements in index order (restartable generator)."""
    for n in range(sk_size(k, ring.ell)):
        yield sk_element_at(k, ring, n)


def sk_index_of(e: Element, k: int) -> int:
    """Index of an S_k element; NotInSk if the support bounds are violated."""
    lam = lambda_floor(k, e.ring.ell)
    if not e.is_zero:
        if e.lowest_degree < -lam or e.lowest_degree + len(e.digits) - 1 > k:
            raise NotInSk(
                f"digit support [{e.lowest_degree}, "
                f"{e.lowest_degree + len(e.digits) - 1}] not within [{-lam}, {k}]")
    n = 0
    for i in range(k + lam, -1, -1):
        n = n * e.ring.ell + e.digit(-lam + i)
    return n


def omega_block_size(k: int, ell: int, p_dim: int, q_dim: int) -> int:
    """Number of q-by-p matrices of S_k-valued functions on depth-k cells.

    Each of the q*p entries independently assigns an S_k value to each of
    the ell^(k*p) cells.
    """
    return sk_size(k, ell) ** (ell ** (k * p_dim) * q_dim * p_dim)


class MatrixFn:
    """One member r_j of the enumeration: a q-by-p matrix of functions from
    depth-k_block cells of R^p into S_k_block.

    The table is decoded lazily, one (entry, cell) slot at a time, so members
    with astronomically large indices are still usable.  Decoding is a pure
    mixed-radix read of ``inner_index``: entries in row-major order are the
    outermost radix, input cells by ascending cell index next, and the
    innermost digit indexes S_k in :func:`sk_elements` order (the first slot
    is the most significant digit).
    """

    def __init__(self, cfg: PhiConfig, k_block: int, inner_index: int):
        self.cfg = cfg
        self.k_block = k_block
        self.inner_index = inner_index
        self.n_cells = cfg.ring.ell ** (k_block * cfg.p_dim)
        self.n_slots = self.n_cells * cfg.p_dim * cfg.q_dim
        self._m = sk_size(k_block, cfg.ring.ell)
        self._values: dict[tuple[int, int, int], Element] = {}

    def value_index(self, row: int, col: int, cell: int) -> int:
        slot = (row * self.cfg.p_dim + col) * self.n_cells + cell
        return (self.inner_index // self._m ** (self.n_slots - 1 - slot)) % self._m

    def table_value(self, row: int, col: int, cell: int, W: int | None = None) -> Element:
        """S_k value assigned to one matrix entry on one input cell."""
        key = (row, col, cell)
        e = self._values.get(key)
        if e is None:
            e = sk_element_at(self.k_block, self.cfg.ring,
                              self.value_index(row, col, cell))
            self._values[key] = e  # idempotent fill; safe under concurrent reads
        if W is not None and W != e.depth:
            return Element(e.ring, e.lowest_degree, e.digits, W)
        return e

    def __repr__(self):
        return (f"MatrixFn(k={self.k_block}, inner={self.inner_index}, "
                f"dims={self.cfg.q_dim}x{self.cfg.p_dim})")


def block_offset(k: int, cfg: PhiConfig) -> int:
    """Enumeration index of the first member of the Omega_k block."""
    return sum(omega_block_size(i, cfg.ring.ell, cfg.p_dim, cfg.q_dim)
               for i in range(1, k))


_decode_cache: dict[tuple[PhiConfig, int], MatrixFn] = {}


def decode_matrix_fn(j: int, cfg: PhiConfig) -> MatrixFn:
    """The j-th member of the enumeration (block Omega_1 first, then Omega_2,
    ...); every j >= 0 decodes."""
    if j < 0:
        raise BadIndex(f"enumeration index must be >= 0, got {j}")
    cached = _decode_cache.get((cfg, j))
    if cached is not None:
        return cached
    k, off = 1, 0
    while True:
        size = omega_block_size(k, cfg.ring.ell, cfg.p_dim, cfg.q_dim)
        if j - off < size:
            break
        off += size
        k += 1
    # Needed by the continuity argument: member j never looks deeper than
    # digit max(j, 1).  Block sizes grow fast enough that this is automatic.
    assert k <= max(j, 1), "enumeration blocks are misordered"
    fn = MatrixFn(cfg, k, j - off)
    if j < 4096:
        _decode_cache[(cfg, j)] = fn
    return fn


def index_of_constant_matrix(M: ElementMatrix, k: int) -> int:
    """Enumeration index of the Omega_k member constantly equal to M."""
    q, p = M.shape
    cfg = PhiConfig(M.ring, p_dim=p, q_dim=q)
    m = sk_size(k, M.ring.ell)
    n_cells = M.ring.ell ** (k * p)
    n_slots = n_cells * p * q
    inner = 0
    for row in range(q):
        for col in range(p):
            n = sk_index_of(M[row, col], k)
            for cell in range(n_cells):
                slot = (row * p + col) * n_cells + cell
                inner += n * m ** (n_slots - 1 - slot)
    return block_offset(k, cfg) + inner


def matrix_fn_eval(r: MatrixFn, x: ElementVector) -> ElementMatrix:
    """Table lookup on the depth-k_block cell of x."""
    cfg = r.cfg
    if x.dim != cfg.p_dim:
        raise ValueError(f"expected dim {cfg.p_dim}, got {x.dim}")
    k = r.k_block
    if x.depth < k:
        raise InsufficientDepth(k, x.depth, "matrix_fn_eval input")
    cell = 0
    base = cfg.ring.ell ** k
    for i in range(cfg.p_dim - 1, -1, -1):
        cell = cell * base + cell_index(x[i], k)
    W = max(x.depth, k + 1)
    rows = tuple(
        tuple(r.table_value(row, col, cell, W) for col in range(cfg.p_dim))
        for row in range(cfg.q_dim))
    return ElementMatrix(rows)


# ---------------------------------------------------------------------------
# The series evaluator
# ---------------------------------------------------------------------------

def tail_cutoff(D_out: int, ell: int) -> int:
    """Largest k whose series term can still touch a digit below D_out."""
    if D_out < 1:
        raise BadIndex(f"output depth must be >= 1, got {D_out}")
    k = 0
    while summand_valuation_floor(k + 1, ell) < D_out:
        k += 1
    return k


def required_phi_input_depth(D_out: int, ell: int = 2) -> int:
    """Smallest input working depth for which phi_eval at D_out is exact.

    Equals alpha(K+1) for the cutoff index K: the deepest digit any retained
    term reads.  Validated by the prefix-consistency oracle in the tests.
    """
    return alpha(tail_cutoff(D_out, ell) + 1)


def phi_eval(x: ElementVector, cfg: PhiConfig, D_out: int) -> ElementVector:
    """Evaluate phi at x in K^p, exact to D_out output digits.

    Negative-degree digits of x are dropped first (the extension from R to
    the field).  Terms beyond the cutoff index all have valuation >= D_out,
    so omitting them cannot change any reported digit.
    """
    if x.dim != cfg.p_dim:
        raise ValueError(f"expected dim {cfg.p_dim}, got {x.dim}")
    K = tail_cutoff(D_out, cfg.ring.ell)
    need = alpha(K + 1)
    if x.depth < need:
        raise InsufficientDepth(need, x.depth, f"phi input for D_out={D_out}")
    xr = ElementVector(tuple(reduce_to_R(e) for e in x))
    acc = ElementVector(tuple(zero(cfg.ring, D_out) for _ in range(cfg.q_dim)))
    for k in range(K + 1):
        r = decode_matrix_fn(k, cfg)
        M = matrix_fn_eval(r, xr)
        pk = projection(xr, k)
        acc = acc + mat_vec(M, pk)
    return acc


def phi_partial(x: ElementVector, cfg: PhiConfig, N: int) -> ElementVector:
    """Partial sum of the first N series terms (an exact finite sum)."""
    if x.dim != cfg.p_dim:
        raise ValueError(f"expected dim {cfg.p_dim}, got {x.dim}")
    if N > 0 and x.depth < alpha(N):
        raise InsufficientDepth(alpha(N), x.depth, f"phi_partial N={N}")
    xr = ElementVector(tuple(reduce_to_R(e) for e in x))
    acc = ElementVector(tuple(zero(cfg.ring, x.depth) for _ in range(cfg.q_dim)))
    for k in range(N):
        r = decode_matrix_fn(k, cfg)
        M = matrix_fn_eval(r, xr)
        pk = projection(xr, k)
        acc = acc + mat_vec(M, pk)
    return acc


def input_partial(x: ElementVector, N: int) -> ElementVector:
    """Sum of the first N digit slices of x: its depth-alpha(N) truncation."""
    return ElementVector(tuple(truncate(e, alpha(N)) for e in x))


def continuity_modulus(A: int, cfg: PhiConfig) -> int:
    """Input agreement depth that forces output agreement to depth A.

    If x and y agree on all digits below the returned depth (componentwise
    valuation of x - y at least it), then phi(x) - phi(y) has componentwise
    valuation at least A.
    """
    if A < 1:
        raise BadIndex(f"continuity_modulus needs A >= 1, got {A}")
    n = 0
    while summand_valuation_floor(n, cfg.ring.ell) < A:
        n += 1
    return alpha(n)


# ---------------------------------------------------------------------------
# The digit-shift construction (variant tag "dh")
# ---------------------------------------------------------------------------

def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def phi_dh_eval(a: Element, D_out: int) -> Element:
    """Digit-shift rule: output digit j is input digit j+1, forced to 0
    whenever j+2 is a power of two.

    A pure digit map in both ring modes; over the carrying ring it is not a
    homomorphism (carries break additivity).
    """
    if not a.is_zero and a.lowest_degree < 0:
        raise NegativeValuation("digit-shift rule is defined on R only")
    if a.depth < D_out + 1:
        raise InsufficientDepth(D_out + 1, a.depth, "digit-shift input")
    ds = [0 if _is_power_of_two(j + 2) else a.digit(j + 1)
          for j in range(D_out)]
    return element_from_digits(ds, 0, a.ring, D_out)


# ---------------------------------------------------------------------------
# Vectorized residue-table twins (p = q = 1), used by the measure module
# ---------------------------------------------------------------------------

def phi_input_depth(variant: PhiVariant, D_out: int, ell: int) -> int:
    """Input depth each variant needs for exact depth-D_out output."""
    if variant is PhiVariant.SAWYER:
        return required_phi_input_depth(D_out, ell)
    return D_out + 1


def phi_residue_table(cfg: PhiConfig, D_out: int, input_depth: int) -> np.ndarray:
    """phi on every depth-``input_depth`` cell at once, as packed codes.

    Returns an array of length ell^input_depth whose entry at cell code c is
    the packed depth-D_out code of phi(representative of c).  Scalar case
    only (p = q = 1).  Exactness is the same cutoff argument as phi_eval;
    agreement with it is pinned by tests.
    """
    if cfg.p_dim != 1 or cfg.q_dim != 1:
        raise ValueError("residue table is scalar-only (p = q = 1)")
    ell = cfg.ring.ell
    K = tail_cutoff(D_out, ell)
    need = alpha(K + 1)
    if input_depth < need:
        raise InsufficientDepth(need, input_depth, "phi residue table")
    codes = np.arange(ell ** input_depth, dtype=np.int64)
    acc = np.zeros_like(codes)
    for k in range(K + 1):
        r = decode_matrix_fn(k, cfg)
        kb = r.k_block
        lam = lambda_floor(kb, ell)
        # S_k values shifted up by lam so they pack as nonnegative codes.
        shifted = []
        for cell in range(ell ** kb):
            v = r.table_value(0, 0, cell)
            code = 0 if v.is_zero else (
                v.significand() * ell ** (v.lowest_degree + lam))
            shifted.append(code)
        rv = np.asarray(shifted, dtype=np.int64)[codes % ell ** kb]
        lo, hi = alpha(k), alpha(k + 1)
        pk = codes % ell ** hi - codes % ell ** lo
        prod = residue_mul(cfg.ring, D_out + lam, rv, pk)
        acc = residue_add(cfg.ring, D_out,
                          acc, residue_shift_down(cfg.ring, lam, prod))
    return acc


def dh_residue_table(ring: RingSpec, D_out: int, input_depth: int) -> np.ndarray:
    """Digit-shift rule applied to every depth-``input_depth`` cell code."""
    if input_depth < D_out + 1:
        raise InsufficientDepth(D_out + 1, input_depth, "digit-shift table")
    ell = ring.ell
    codes = np.arange(ell ** input_depth, dtype=np.int64)
    out = np.zeros_like(codes)
    for j in range(D_out):
        if _is_power_of_two(j + 2):
            continue
        out += ((codes // ell ** (j + 1)) % ell) * ell ** j
    return out


def variant_residue_table(variant: PhiVariant, cfg: PhiConfig,
                          D_out: int, input_depth: int) -> np.ndarray:
    if variant is PhiVariant.SAWYER:
        return phi_residue_table(cfg, D_out, input_depth)
    return dh_residue_table(cfg.ring, D_out, input_depth)
