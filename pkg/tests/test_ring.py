"""Ring layer: canonical forms, exact arithmetic, cells, text format."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kakeya.errors import (
    BadDepth,
    DigitOutOfRange,
    NegativeValuation,
    RingMismatch,
)
from kakeya.ring import (
    INF,
    ElementMatrix,
    ElementVector,
    RingSpec,
    RingMode,
    add,
    cell_index,
    element_from_cell,
    element_from_digits,
    enumerate_residues,
    format_element,
    from_int,
    mat_mul,
    mat_vec,
    mul,
    neg,
    one,
    padic_ring,
    parse_element,
    power_series_ring,
    reduce_to_R,
    residue_add,
    residue_mul,
    residue_neg,
    residue_sub,
    sub,
    truncate,
    vector,
    zero,
)

from conftest import F2, F3, Z2, Z3, elements


class TestConstruction:
    def test_leading_zero_stripping(self):
        e = element_from_digits([0, 0, 1], 0, Z2, 8)
        assert e.valuation == 2
        assert e.digits == (1,)

    def test_empty_digits_is_zero(self):
        e = element_from_digits([], 5, Z2, 8)
        assert e.is_zero
        assert e.valuation == INF

    def test_field_element_valuation_and_norm(self):
        e = element_from_digits([1, 1], -1, F3, 5)
        assert e.valuation == -1
        assert e.norm() == Fraction(3)

    def test_digit_out_of_range(self):
        with pytest.raises(DigitOutOfRange):
            element_from_digits([2], 0, Z2, 4)

    def test_bad_depth(self):
        with pytest.raises(BadDepth):
            element_from_digits([1], 3, Z2, 3)

    def test_digits_beyond_depth_truncated(self):
        e = element_from_digits([1, 1, 1, 1], 0, Z2, 2)
        assert e.digits == (1, 1)

    def test_non_prime_rejected(self):
        with pytest.raises(ValueError):
            RingSpec(4, RingMode.PADIC)
        with pytest.raises(ValueError):
            RingSpec(1, RingMode.POWER_SERIES)


class TestArithmetic:
    def test_padic_three_squared(self):
        three = element_from_digits([1, 1], 0, Z2, 8)
        nine = mul(three, three)
        assert nine.lowest_degree == 0
        assert nine.digits == (1, 0, 0, 1)

    def test_power_series_char_two(self):
        e = element_from_digits([1, 1], 0, F2, 6)
        assert add(e, e).is_zero

    def test_padic_carry(self):
        s = add(one(Z2, 6), one(Z2, 6))
        assert s.lowest_degree == 1 and s.digits == (1,)

    def test_ring_mismatch(self):
        with pytest.raises(RingMismatch):
            add(one(Z2, 4), one(F2, 4))

    def test_zero_mul_depth_is_sum(self):
        z = zero(Z2, 5)
        prod = mul(z, from_int(3, Z2, 7))
        assert prod.is_zero and prod.depth == 5

    @pytest.mark.parametrize("ring", (Z2, F2, Z3, F3), ids=str)
    def test_neg_is_additive_inverse_exhaustive(self, ring):
        for code in range(ring.ell ** 4):
            e = element_from_cell(ring, code, 4, 6)
            assert add(e, neg(e)).is_zero

    def test_padic_bigint_oracle_exhaustive_depth4(self):
        ell, W = 2, 4
        m = ell ** W
        for a in range(m):
            for b in range(m):
                ea, eb = element_from_cell(Z2, a, W, W), element_from_cell(Z2, b, W, W)
                assert cell_index(add(ea, eb), W) == (a + b) % m
                assert cell_index(mul(ea, eb), W) == (a * b) % m
                assert cell_index(sub(ea, eb), W) == (a - b) % m

    def test_power_series_poly_oracle_exhaustive_depth3(self):
        # independent oracle: coefficient convolution over F_3 mod t^3
        ell, W = 3, 3
        for a in range(ell ** W):
            for b in range(ell ** W):
                da = [(a // ell ** i) % ell for i in range(W)]
                db = [(b // ell ** i) % ell for i in range(W)]
                conv = [sum(da[i] * db[j - i] for i in range(j + 1)) % ell
                        for j in range(W)]
                ea, eb = element_from_cell(F3, a, W, W), element_from_cell(F3, b, W, W)
                assert cell_index(mul(ea, eb), W) == sum(
                    c * ell ** i for i, c in enumerate(conv))
                assert cell_index(add(ea, eb), W) == sum(
                    ((da[i] + db[i]) % ell) * ell ** i for i in range(W))

    @given(a=elements(Z3, min_low=-3), b=elements(Z3, min_low=-3))
    @settings(max_examples=200)
    def test_ultrametric_inequality(self, a, b):
        # a represented zero only bounds its value (valuation >= depth), so
        # the equality case is assertable only for nonzero operands
        s = add(a, b)
        if not s.is_zero:
            assert s.norm() <= max(a.norm(), b.norm())
        if not a.is_zero and not b.is_zero and a.norm() != b.norm():
            assert s.norm() == max(a.norm(), b.norm())

    @given(a=elements(F3, min_low=-2, max_depth=8),
           b=elements(F3, min_low=-2, max_depth=8))
    @settings(max_examples=200)
    def test_valuation_multiplicative(self, a, b):
        p = mul(a, b)
        if a.is_zero or b.is_zero:
            assert p.is_zero
        else:
            assert p.valuation == a.valuation + b.valuation


class TestValuationNorm:
    def test_twelve_in_z2(self):
        e = from_int(12, Z2, 8)
        assert e.valuation == 2
        assert e.norm() == Fraction(1, 4)

    def test_zero_valuation_inf(self):
        assert zero(Z2, 4).valuation == INF
        assert zero(Z2, 4).norm() == 0

    def test_laurent_valuation(self):
        e = element_from_digits([1, 1], -1, F3, 5)
        assert e.valuation == -1

    def test_unit_norm_one(self):
        assert one(Z3, 5).norm() == 1

    def test_negative_degree_norm(self):
        assert element_from_digits([1], -2, F2, 2).norm() == Fraction(4)


class TestTruncate:
    def test_basic(self):
        e = element_from_digits([1, 0, 1, 1], 0, Z2, 8)
        assert truncate(e, 2).digits == (1,)

    def test_zero(self):
        assert truncate(zero(Z2, 6), 3).is_zero

    def test_beyond_depth_rejected(self):
        with pytest.raises(BadDepth):
            truncate(one(Z2, 4), 5)

    @given(e=elements(Z2, max_depth=10), d=st.integers(0, 9))
    @settings(max_examples=200)
    def test_difference_valuation(self, e, d):
        D = min(d, e.depth)
        diff = sub(truncate(e, D), e)
        assert diff.is_zero or diff.valuation >= D

    @given(e=elements(F3, max_depth=10), d=st.integers(0, 9))
    @settings(max_examples=200)
    def test_agrees_below(self, e, d):
        D = min(d, e.depth)
        t = truncate(e, D)
        for deg in range(0, D):
            assert t.digit(deg) == e.digit(deg)


class TestCells:
    def test_positional_code(self):
        e = element_from_digits([1, 0, 1], 0, Z2, 4)
        assert cell_index(e, 3) == 5

    def test_zero_code(self):
        assert cell_index(zero(Z3, 5), 4) == 0

    def test_rejects_field_elements(self):
        with pytest.raises(NegativeValuation):
            cell_index(element_from_digits([1], -1, Z2, 3), 2)

    def test_injective_over_enumeration(self):
        seen = set()
        for e in enumerate_residues(Z2, 6):
            seen.add(cell_index(e, 6))
        assert seen == set(range(64))

    @pytest.mark.parametrize("ring,D,n", [(Z2, 1, 2), (Z2, 3, 8), (Z3, 2, 9)],
                             ids=("zp2-D1", "zp2-D3", "zp3-D2"))
    def test_enumeration_counts_and_order(self, ring, D, n):
        es = list(enumerate_residues(ring, D))
        assert len(es) == n
        assert [cell_index(e, D) for e in es] == list(range(n))

    def test_restartable(self):
        first = [cell_index(e, 2) for e in enumerate_residues(F2, 2)]
        second = [cell_index(e, 2) for e in enumerate_residues(F2, 2)]
        assert first == second


class TestReduceToR:
    def test_drops_negative_degrees(self):
        e = element_from_digits([1, 0, 1, 1], -2, F2, 4)  # t^-2 + 1 + t
        r = reduce_to_R(e)
        assert r.lowest_degree == 0 and r.digits == (1, 1)

    def test_identity_on_R(self):
        e = from_int(6, Z2, 6)
        assert reduce_to_R(e) is e

    def test_pure_negative_becomes_zero(self):
        assert reduce_to_R(element_from_digits([1], -1, F2, 3)).is_zero


class TestTextFormat:
    @given(e=elements(Z2, min_low=-3, max_depth=10))
    @settings(max_examples=200)
    def test_round_trip(self, e):
        back = parse_element(format_element(e))
        assert back == e
        assert back.depth == max(e.depth, 1 if e.is_zero else e.depth)

    def test_example(self):
        e = parse_element("zp:2:0:1,0,1")
        assert e.ring == Z2 and e.digits == (1, 0, 1) and e.depth == 3

    def test_zero_text(self):
        e = parse_element("fq:2:0:0")
        assert e.is_zero

    @pytest.mark.parametrize("bad", ["", "zp:2:0", "xx:2:0:1", "zp:2:0:",
                                     "zp:2:a:1", "zp:2:0:1,9"])
    def test_malformed(self, bad):
        with pytest.raises((ValueError, DigitOutOfRange)):
            parse_element(bad)


class TestVectorsMatrices:
    def test_vector_norm_is_max(self):
        v = vector(from_int(4, Z2, 6), one(Z2, 6))
        assert v.norm() == Fraction(1)

    def test_vector_normalizes_depth(self):
        v = vector(one(Z2, 9), one(Z2, 5))
        assert v.depth == 5 and all(e.depth == 5 for e in v)

    def test_matrix_vector_product(self):
        M = ElementMatrix(((one(Z2, 8), from_int(2, Z2, 8)),))
        v = vector(from_int(3, Z2, 8), one(Z2, 8))
        out = mat_vec(M, v)
        assert out.dim == 1
        assert cell_index(out[0], 3) == 5  # 3 + 2 = 5

    def test_mat_mul_identity(self):
        I2 = ElementMatrix(((one(Z3, 6), zero(Z3, 6)),
                            (zero(Z3, 6), one(Z3, 6))))
        M = ElementMatrix(((from_int(2, Z3, 6), one(Z3, 6)),
                           (from_int(4, Z3, 6), from_int(7, Z3, 6))))
        P = mat_mul(M, I2)
        for i in range(2):
            for j in range(2):
                assert P[i, j] == M[i, j]


class TestResidueLayer:
    """The packed-code fast path must agree with the element layer."""

    @pytest.mark.parametrize("ring", (Z2, F2, Z3, F3), ids=str)
    @pytest.mark.parametrize("D", (1, 3, 5))
    def test_scalar_ops_match_elements(self, ring, D):
        m = ring.ell ** D
        codes = range(m) if m <= 32 else range(0, m, max(1, m // 32))
        for a in codes:
            for b in codes:
                ea = element_from_cell(ring, a, D, D + 2)
                eb = element_from_cell(ring, b, D, D + 2)
                assert residue_add(ring, D, a, b) == cell_index(add(ea, eb), D)
                assert residue_sub(ring, D, a, b) == cell_index(sub(ea, eb), D)
                assert residue_mul(ring, D, a, b) == cell_index(mul(ea, eb), D)
                assert residue_neg(ring, D, a) == cell_index(neg(ea), D)

    @pytest.mark.parametrize("ring", (Z2, F2, Z3, F3), ids=str)
    def test_vector_ops_match_scalar(self, ring):
        D = 4
        m = ring.ell ** D
        a = np.arange(m, dtype=np.int64)
        for b in (0, 1, m - 1, m // 3):
            vm = residue_mul(ring, D, a, b)
            va = residue_add(ring, D, a, b)
            for i in range(0, m, 7):
                assert vm[i] == residue_mul(ring, D, int(a[i]), b)
                assert va[i] == residue_add(ring, D, int(a[i]), b)
