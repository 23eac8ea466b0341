import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from procache import field as fmod
from procache.errors import CapacityError, ConfigurationError, FieldMismatchError
from procache.field import FieldElement, FieldPolynomial, GF2m, field_for

import oracles

GF8 = field_for(3)

# frozen from oracles.gf_inv_search over x^3 + x + 1
INVERSES_GF8 = {1: 1, 2: 5, 3: 6, 4: 7, 5: 2, 6: 3, 7: 4}


def el(v, f=GF8):
    return FieldElement(v, f)


class TestAdd:
    def test_self_inverse(self):
        assert int(el(0b011) + el(0b011)) == 0

    def test_disjoint_bits(self):
        assert int(el(0b010) + el(0b001)) == 0b011

    @pytest.mark.parametrize("x", range(8))
    def test_zero_identity(self, x):
        assert int(fmod.add(el(x), el(0))) == x


class TestMul:
    def test_alpha_times_alpha_squared(self):
        assert int(el(0b010) * el(0b100)) == 0b011

    @pytest.mark.parametrize("a", range(8))
    def test_one_identity(self, a):
        assert int(fmod.mul(el(a), el(1))) == a

    def test_exhaustive_table_matches_reference(self):
        for a, b in itertools.product(range(8), repeat=2):
            assert GF8.mul(a, b) == oracles.gf_mul(a, b, 0xB)

    def test_exhaustive_axioms_gf8(self):
        for a, b, c in itertools.product(range(8), repeat=3):
            assert GF8.mul(a, b) == GF8.mul(b, a)
            assert GF8.mul(a, GF8.mul(b, c)) == GF8.mul(GF8.mul(a, b), c)
            assert GF8.mul(a, b ^ c) == GF8.mul(a, b) ^ GF8.mul(a, c)

    def test_published_byte_field_vector(self):
        # x^8 + x^4 + x^3 + x + 1: {57}.{83} = {c1}, {53}^-1 = {ca}
        f = field_for(8)
        assert f.mul(0x57, 0x83) == 0xC1
        assert f.inv(0x53) == 0xCA

    @pytest.mark.parametrize(
        "bits,a,b,want",
        # frozen from oracles.gf_mul with the built-in reduction polynomials
        [(16, 0x1234, 0xABCD, 0x4792), (64, 0x0123456789ABCDEF, 0xFEDCBA9876543210, 0x48827AB55D976FA0)],
    )
    def test_wide_fields(self, bits, a, b, want):
        assert field_for(bits).mul(a, b) == want


class TestInverse:
    def test_one(self):
        assert int(fmod.inv(el(1))) == 1

    def test_alpha_inverse(self):
        assert GF8.inv(0b010) == 0b101

    def test_table(self):
        assert {a: GF8.inv(a) for a in range(1, 8)} == INVERSES_GF8

    def test_every_nonzero_element(self):
        for a in range(1, 8):
            assert GF8.mul(a, GF8.inv(a)) == 1

    def test_zero_has_no_inverse(self):
        with pytest.raises(ZeroDivisionError):
            GF8.inv(0)


@pytest.mark.parametrize("bits", [3, 8, 16, 64])
@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_sampled_field_axioms(bits, data):
    f = field_for(bits)
    a, b, c = (data.draw(st.integers(0, f.mask)) for _ in range(3))
    assert f.mul(a, b) == f.mul(b, a)
    assert f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c)
    assert f.mul(a, b ^ c) == f.mul(a, b) ^ f.mul(a, c)
    if a:
        assert f.mul(a, f.inv(a)) == 1


def test_pow_matches_repeated_multiplication():
    for a in range(8):
        for e in range(10):
            assert GF8.pow(a, e) == oracles.gf_pow(a, e, 0xB)


class TestEvalPoly:
    def test_constant(self):
        p = FieldPolynomial(GF8, (6,))
        assert all(p(x) == 6 for x in range(8))

    def test_identity_polynomial(self):
        p = FieldPolynomial(GF8, (0, 1))
        assert int(fmod.eval_poly(p, el(0b010))) == 0b010

    def test_matches_reference(self):
        rng = random.Random(3)
        for _ in range(50):
            coeffs = [rng.randrange(8) for _ in range(5)]
            x = rng.randrange(8)
            assert GF8.eval_poly(coeffs, x) == oracles.gf_eval(coeffs, x, 0xB)

    def test_degree4_round_trip(self):
        rng = random.Random(11)
        p = fmod.random_polynomial(GF8, rng, 4)
        pts = [(el(x), el(p(x))) for x in range(1, 6)]
        assert fmod.interpolate(pts).coeffs == p.coeffs


class TestInterpolate:
    def test_single_point_is_constant(self):
        assert fmod.interpolate([(el(3), el(5))]).coeffs == (5,)

    def test_matches_vandermonde_solution(self):
        # frozen from oracles.gf_solve_vandermonde
        assert GF8.interpolate([1, 2, 3, 4, 5], [6, 0, 7, 2, 5]) == [1, 5, 6, 0, 4]

    def test_held_out_point(self):
        rng = random.Random(5)
        f = field_for(8)
        coeffs = [rng.randrange(256) for _ in range(6)]
        xs = list(range(1, 7))
        got = f.interpolate(xs, [f.eval_poly(coeffs, x) for x in xs])
        assert f.eval_poly(got, 200) == f.eval_poly(coeffs, 200)

    def test_duplicate_x_rejected(self):
        with pytest.raises(ValueError):
            GF8.interpolate([1, 1], [2, 3])

    def test_field_mismatch(self):
        with pytest.raises(FieldMismatchError):
            fmod.interpolate([(el(1), el(1)), (el(2, field_for(4)), el(1, field_for(4)))])


@settings(max_examples=1000, deadline=None)
@given(
    bits=st.sampled_from([3, 5, 8, 16, 64]),
    seed=st.integers(0, 2**32),
    n=st.integers(1, 7),
)
def test_eval_interpolate_inverse(bits, seed, n):
    f = field_for(bits)
    rng = random.Random(seed)
    coeffs = [f.random_element(rng) for _ in range(n)]
    xs = f.enumerate_points(n)
    assert f.interpolate(xs, [f.eval_poly(coeffs, x) for x in xs]) == coeffs


class TestEnumeratePoints:
    def test_first_three(self):
        assert [int(p) for p in fmod.enumerate_points(GF8, 3)] == [0b001, 0b010, 0b011]

    def test_all_nonzero(self):
        pts = GF8.enumerate_points(7)
        assert sorted(pts) == list(range(1, 8))

    def test_capacity(self):
        with pytest.raises(CapacityError):
            GF8.enumerate_points(8)

    def test_deterministic(self):
        assert field_for(8).enumerate_points(40) == GF2m(8).enumerate_points(40)


class TestRandomPolynomial:
    def test_fully_pinned(self):
        p = fmod.random_polynomial(GF8, random.Random(0), 2, pinned_high=[1, 2, 3])
        assert p.coeffs == (1, 2, 3)

    def test_pinned_on_top(self):
        p = fmod.random_polynomial(GF8, random.Random(0), 3, pinned_high=[6, 7])
        assert p.coeffs[2:] == (6, 7) and p.degree_bound == 3

    def test_same_seed_same_polynomial(self):
        a = fmod.random_polynomial(GF8, random.Random(42), 5)
        b = fmod.random_polynomial(GF8, random.Random(42), 5)
        assert a == b

    def test_free_coefficients_uniform(self):
        # multinomial 3-sigma band per cell
        n = 8000
        counts = [[0] * 8 for _ in range(3)]
        for seed in range(n):
            p = fmod.random_polynomial(GF8, random.Random(seed), 3, pinned_high=[1])
            for j in range(3):
                counts[j][p.coeffs[j]] += 1
        mean, sd = n / 8, (n * (1 / 8) * (7 / 8)) ** 0.5
        for row in counts:
            assert all(abs(c - mean) <= 3 * sd for c in row)


class TestFieldParams:
    @pytest.mark.parametrize("bits", range(1, 17))
    def test_table_irreducible(self, bits):
        poly = fmod.REDUCTION_POLYS[bits]
        assert poly.bit_length() - 1 == bits
        assert all(oracles.polymod(poly, d) for d in range(2, 1 << (bits // 2 + 1)))

    def test_irreducibility_check_agrees_with_reference(self):
        for poly in range(2, 1 << 9):
            deg = poly.bit_length() - 1
            want = deg >= 1 and all(oracles.polymod(poly, d) for d in range(2, 1 << (deg // 2 + 1)))
            assert fmod.is_irreducible(poly) == want

    def test_conventional_choices(self):
        assert fmod.REDUCTION_POLYS[3] == 0b1011
        assert fmod.REDUCTION_POLYS[8] == 0x11B

    def test_reducible_rejected(self):
        with pytest.raises(ConfigurationError):
            GF2m(4, 0b10101)  # (x^2 + x + 1)^2

    @pytest.mark.parametrize("bits", [0, 65])
    def test_width_bounds(self, bits):
        with pytest.raises(ConfigurationError):
            GF2m(bits)

    def test_element_range(self):
        with pytest.raises(ValueError):
            FieldElement(8, GF8)

    def test_mixed_fields(self):
        with pytest.raises(FieldMismatchError):
            el(1) + el(1, field_for(4))
