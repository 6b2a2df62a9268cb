import pytest

from archipelago.core.config import get_settings
from archipelago.core.exceptions import (
    ContractViolation,
    ParseException,
    ResourceBudgetExceeded,
    UnsupportedException,
)
from archipelago.models.schemas import VerdictStatus
from archipelago.services import freewords as fw
from archipelago.services import projective as pw
from archipelago.services.factor_groups import constant_family
from archipelago.services.projective import Affine


def word(spec, text):
    pairs = []
    for token in text.split():
        index, literal = token[1:].split(":", 1)
        pairs.append((int(index), literal))
    return fw.word_from_pairs(spec, pairs)


def leaf(spec, text, base_index=1):
    return pw.leaf_word(spec, word(spec, text), base_index)


def assert_compatible(w, max_depth):
    for n in range(w.base_index, max_depth):
        upper = pw.projection(w, n + 1)
        assert fw.project_keep(upper, fw.keep_at_most(n)) == pw.projection(w, n), n


@pytest.fixture
def nested(z_family):
    return pw.nested_word(z_family)


class TestProjections:
    def test_nested_power(self, nested):
        assert str(pw.projection(nested, 1)) == "g1:1"
        assert str(pw.projection(nested, 2)) == "g1:1·g2:2"
        assert str(pw.projection(nested, 3)) == "g1:1·g2:1·g3:3·g2:1·g3:3"

    def test_triangular_word(self, z_family):
        eps = pw.epsilon_word(z_family, ("1", "2", "3"))
        assert str(pw.projection(eps, 6)) == "g1:1·g2:1·g3:2·g4:1·g5:2·g6:3"

    def test_triangular_word_with_identity_tail(self, z_family):
        eps = pw.epsilon_word(z_family, ("1",), tail="0")
        assert str(pw.projection(eps, 7)) == "g1:1·g2:1·g4:1·g7:1"

    def test_triangular_coordinates(self):
        assert [pw.triangular_coordinate(p) for p in range(1, 11)] == [1, 1, 2, 1, 2, 3, 1, 2, 3, 4]

    def test_leaf_truncates(self, z_family):
        w = leaf(z_family, "g1:1 g3:2 g1:1")
        assert str(pw.projection(w, 2)) == "g1:2"
        assert str(pw.projection(w, 3)) == "g1:1·g3:2·g1:1"

    def test_shifted_nested_index(self, z_family):
        w = pw.nested_word(z_family, index=Affine(2, 0), exponent=Affine(0, 2))
        assert str(pw.projection(w, 3)) == "g2:1"
        assert str(pw.projection(w, 4)) == "g2:1·g4:2"

    def test_depth_below_base(self, nested):
        shifted = pw.tau(2, nested)
        assert shifted.base_index == 3
        with pytest.raises(ContractViolation):
            pw.projection(shifted, 2)

    def test_compatibility_of_nested_words(self, z_family, nested):
        words = [
            nested,
            pw.product(nested, pw.inverse(pw.epsilon_word(z_family, ("1",)))),
            pw.power(pw.product(leaf(z_family, "g1:1 g2:-1"), nested), -2),
            pw.tau(1, pw.product(nested, nested)),
            pw.tau(2, pw.power(nested, 3)),
        ]
        for w in words:
            assert_compatible(w, 8)

    def test_compatibility_of_triangular_words(self, z_family):
        words = [
            pw.epsilon_word(z_family, ("1", "-2", "3"), tail="0"),
            pw.epsilon_word(z_family, ("2", "1")),
            pw.epsilon_word(z_family, ("1",), tail="0", start=3),
            pw.power(pw.epsilon_word(z_family, ("1", "2")), 3),
            pw.product(pw.epsilon_word(z_family, ("1",)), pw.inverse(pw.epsilon_word(z_family, ("2", "1")))),
        ]
        for w in words:
            assert_compatible(w, 40)

    @staticmethod
    def random_schema(rng, atoms, depth, exponents):
        if depth == 0:
            return rng.choice(atoms)
        shape = rng.randrange(4)
        if shape == 0:
            return pw.product(
                TestProjections.random_schema(rng, atoms, depth - 1, exponents),
                TestProjections.random_schema(rng, atoms, depth - 1, exponents),
            )
        inner = TestProjections.random_schema(rng, atoms, depth - 1, exponents)
        if shape == 1:
            return pw.inverse(inner)
        if shape == 2:
            return pw.power(inner, rng.choice(exponents))
        return pw.rebase(pw.tau(rng.randint(0, 2), inner), 1)

    def test_random_triangular_schemas_are_compatible(self, z_family, rng):
        atoms = [
            pw.epsilon_word(z_family, ("1", "2")),
            pw.epsilon_word(z_family, ("-1",), tail="0"),
            pw.epsilon_word(z_family, ("3", "0", "-2")),
            leaf(z_family, "g1:1 g2:-3 g1:2"),
            leaf(z_family, "g3:1"),
        ]
        for _ in range(100):
            assert_compatible(self.random_schema(rng, atoms, 3, [-2, -1, 2, 3]), 40)

    def test_random_nested_schemas_are_compatible(self, z_family, rng):
        atoms = [
            pw.nested_word(z_family),
            pw.nested_word(z_family, start=2),
            pw.epsilon_word(z_family, ("1", "2")),
            pw.epsilon_word(z_family, ("-1",), tail="0"),
            leaf(z_family, "g1:1 g2:-3 g1:2"),
            leaf(z_family, "g3:1"),
        ]
        for _ in range(100):
            assert_compatible(self.random_schema(rng, atoms, 2, [-2, -1, 2]), 8)

    def test_budget_names_the_depth(self, nested, monkeypatch):
        monkeypatch.setenv("ARCHIPELAGO_WORD_SIZE_BUDGET", "10")
        get_settings.cache_clear()
        with pytest.raises(ResourceBudgetExceeded) as exc_info:
            pw.projection(nested, 8)
        assert exc_info.value.details["depth"] == 8
        assert exc_info.value.exit_code == 4

    def test_cached_projection_respects_a_lowered_budget(self, nested, monkeypatch):
        assert len(pw.projection(nested, 8)) == 10953
        monkeypatch.setenv("ARCHIPELAGO_WORD_SIZE_BUDGET", "10")
        get_settings.cache_clear()
        with pytest.raises(ResourceBudgetExceeded):
            pw.projection(nested, 8)

    def test_cache_size_is_read_after_a_clear(self, nested, monkeypatch):
        monkeypatch.setenv("ARCHIPELAGO_PROJECTION_CACHE_SIZE", "3")
        get_settings.cache_clear()
        pw.clear_projection_cache()
        for n in range(1, 6):
            pw.projection(nested, n)
        assert pw._projection_cache.cache_info().maxsize == 3
        assert pw._projection_cache.cache_info().currsize == 3


class TestBondingMaps:
    def test_tau_deletes_low_letters(self, nested):
        assert str(pw.projection(pw.tau(1, nested), 3)) == "g2:1·g3:3·g2:1·g3:3"

    def test_tau_at_base_minus_one_is_the_identity(self, nested):
        assert pw.tau(0, nested) is nested

    def test_tau_below_base_is_rejected(self, nested):
        with pytest.raises(ContractViolation):
            pw.tau(-1, nested)

    def test_taus_compose(self, nested):
        assert pw.normal_form(pw.tau(3, pw.tau(1, nested))) == pw.normal_form(pw.tau(3, nested))

    def test_tau_is_a_homomorphism(self, z_family, nested):
        eps = pw.epsilon_word(z_family, ("1", "2"))
        left = pw.tau(2, pw.product(nested, eps))
        right = pw.product(pw.tau(2, nested), pw.tau(2, eps))
        for n in range(3, 7):
            assert pw.projection(left, n) == pw.projection(right, n)

    def test_rebase_only_widens(self, nested):
        shifted = pw.tau(1, nested)
        assert pw.rebase(shifted, 1).base_index == 1
        with pytest.raises(ContractViolation):
            pw.rebase(nested, 2)


class TestConstructors:
    def test_leaf_below_base(self, z_family):
        with pytest.raises(ContractViolation):
            leaf(z_family, "g1:1 g2:1", base_index=2)

    def test_nested_needs_infinite_family(self, c3c2_family):
        with pytest.raises(ContractViolation):
            pw.nested_word(c3c2_family)

    def test_nested_exponent_must_be_positive(self, z_family):
        with pytest.raises(ContractViolation):
            pw.nested_word(z_family, exponent=Affine(0, 0))

    def test_epsilon_literal_is_checked(self, z_family):
        with pytest.raises(ParseException):
            pw.epsilon_word(z_family, ("x1",))

    def test_products_need_one_space(self, z_family, nested):
        with pytest.raises(ContractViolation):
            pw.product(nested, pw.tau(1, nested))
        other = pw.nested_word(constant_family("Q"))
        with pytest.raises(ContractViolation):
            pw.product(nested, other)


class TestNormalForm:
    def test_inverse_cancels(self, z_family, nested):
        assert pw.finite_value(pw.product(nested, pw.inverse(nested))) == fw.EMPTY

    def test_powers_combine(self, nested):
        left = pw.product(pw.power(nested, 2), nested)
        assert pw.normal_form(left) == pw.normal_form(pw.power(nested, 3))

    def test_finite_parts_merge(self, z_family):
        w = pw.product(leaf(z_family, "g1:1"), leaf(z_family, "g1:-1 g2:4"))
        assert str(pw.finite_value(w)) == "g2:4"

    def test_tau_of_nested_peels_levels(self, nested):
        w3 = pw.nested_word(nested.spec, start=3)
        assert pw.structurally_equal(pw.tau(2, nested), pw.tau(2, pw.power(w3, 6)))

    def test_epsilon_tail_normalizes(self, z_family):
        assert pw.structurally_equal(
            pw.epsilon_word(z_family, ("1", "2", "2")),
            pw.epsilon_word(z_family, ("1",), tail="2"),
        )

    def test_describe(self, z_family, nested):
        assert pw.describe(nested) == "nest(k=1.., base=g{k}:1, exp=k+1)"
        assert pw.describe(pw.epsilon_word(z_family, ("1", "0"), tail="0", start=2)) == (
            "eps(1,0, tail=0, start=2)"
        )
        assert pw.describe(pw.tau(1, pw.power(nested, 2))) == "tau[1](nest(k=1.., base=g{k}:1, exp=k+1)^2)"


class TestVerdicts:
    def test_structural_equality(self, z_family, nested):
        verdict = pw.eq_in_product(pw.product(nested, pw.inverse(nested)), leaf(z_family, ""), 5)
        assert verdict.status == VerdictStatus.EQUAL_CERTIFIED
        assert verdict.proof == "structural"

    def test_distinct_witness(self, z_family):
        verdict = pw.eq_in_product(leaf(z_family, "g1:1"), leaf(z_family, ""), 5)
        assert str(verdict) == "DistinctWitness(n=1)"

    def test_agreement_is_never_equality(self, z_family):
        verdict = pw.eq_in_product(leaf(z_family, "g9:1"), leaf(z_family, ""), 5)
        assert str(verdict) == "UnknownUpTo(N=5)"

    def test_budget_degrades_to_unknown(self, z_family, nested, monkeypatch):
        monkeypatch.setenv("ARCHIPELAGO_WORD_SIZE_BUDGET", "10")
        get_settings.cache_clear()
        verdict = pw.eq_in_product(nested, pw.product(nested, leaf(z_family, "g9:1")), 8)
        assert verdict.status == VerdictStatus.UNKNOWN_UP_TO
        assert verdict.max_depth == 3

    def test_archipelago_kills_finite_words(self, z_family):
        verdict = pw.eq_in_archipelago(leaf(z_family, "g1:1"), leaf(z_family, ""), 3, 5)
        assert str(verdict) == "EqualCertified(j=1, structural)"
        assert [o.level for o in verdict.per_level] == [0, 1]
        assert verdict.per_level[0].status == VerdictStatus.DISTINCT_WITNESS

    def test_archipelago_unknown_when_every_level_separates(self, z_family):
        u = pw.epsilon_word(z_family, ("1",))
        v = pw.epsilon_word(z_family, ("2",))
        verdict = pw.eq_in_archipelago(u, v, 2, 6)
        assert verdict.status == VerdictStatus.UNKNOWN_UP_TO
        assert verdict.all_levels_distinct
        assert str(verdict) == "UnknownUpTo(J=2, N=6, distinct at every level)"

    def test_nested_square_root(self, nested):
        w2 = pw.nested_word(nested.spec, start=2)
        verdict = pw.eq_in_archipelago(nested, pw.power(w2, 2), 3, 4)
        assert str(verdict) == "EqualCertified(j=1, structural)"


class TestDivisibleChain:
    def test_exponents_are_factorials(self, nested):
        certificates = pw.divisible_chain(nested, 4, cross_check_depth=6)
        composed = [c for c in certificates if c.kind == "composed"]
        assert [c.details["exponent"] for c in composed] == [2, 6, 24]
        assert [c.statement for c in composed] == ["w ~ w_2^2", "w ~ w_3^6", "w ~ w_4^24"]
        assert [c.outcome for c in composed] == [
            "EqualCertified(j=1, structural)",
            "EqualCertified(j=2, structural)",
            "EqualCertified(j=3, structural)",
        ]
        assert all(c.details["projections_agree"] for c in composed)
        steps = [c for c in certificates if c.kind == "step"]
        assert [c.statement for c in steps] == ["tau(1, w_1) = w_2^2", "tau(2, w_2) = w_3^3", "tau(3, w_3) = w_4^4"]

    def test_needs_a_nested_power(self, z_family):
        with pytest.raises(UnsupportedException):
            pw.divisible_chain(leaf(z_family, "g1:1"), 3)


class TestDepthFamily:
    def test_memoized_and_compatible(self, nested):
        family = pw.DepthFamily(1, lambda n: pw.projection(nested, n), label="w")
        assert family.at(3) is family.at(3)
        assert family.incompatible_depth(5) is None

    def test_detects_incompatibility(self, z_family):
        family = pw.DepthFamily(1, lambda n: fw.power(word(z_family, "g1:1"), n))
        assert family.incompatible_depth(4) == 1
        with pytest.raises(ContractViolation):
            family.at(0)
