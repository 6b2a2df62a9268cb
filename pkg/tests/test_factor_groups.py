from fractions import Fraction

import pytest
from pydantic import ValidationError

from archipelago.core.exceptions import ConfigException, ContractViolation, ParseException
from archipelago.services.factor_groups import (
    CyclicFactor,
    FamilySpec,
    FreeFactor,
    FreeProductFactor,
    IntegersFactor,
    InvolutionFreeFactor,
    RationalsFactor,
    TableFactor,
    constant_family,
    descriptor_from_config,
    element_order,
    enumerate_elements,
    family_from_config,
    family_from_json,
    format_element,
    group_inverse,
    group_op,
    identity,
    is_involution,
    load_family,
    make_element,
    nonidentity_elements,
    parse_element,
)


# Latin square with identity and inverses whose elements all square to 0;
# a group of order 5 cannot look like that.
NON_ASSOCIATIVE_LOOP = [
    [0, 1, 2, 3, 4],
    [1, 0, 3, 4, 2],
    [2, 4, 0, 1, 3],
    [3, 2, 4, 0, 1],
    [4, 3, 1, 2, 0],
]


def literals(descriptor, limit):
    return [format_element(a) for a in enumerate_elements(descriptor, limit)]


class TestEnumeration:
    def test_integers_alternate_signs(self):
        assert literals(IntegersFactor(), 5) == ["0", "1", "-1", "2", "-2"]

    def test_rationals_walk_the_diagonals(self):
        assert literals(RationalsFactor(), 7) == ["0", "1", "-1", "1/2", "-1/2", "2", "-2"]

    def test_countable_free_group_levels(self):
        assert literals(FreeFactor(rank="countable"), 5) == ["e", "x1", "x1'", "x2", "x2'"]

    def test_countable_involution_free_product(self):
        assert literals(InvolutionFreeFactor(rank="countable"), 5) == ["e", "y1", "y2", "y1y2", "y2y1"]

    def test_finite_group_is_exhausted(self):
        assert literals(CyclicFactor(order=4), 10) == ["0", "1", "2", "3"]
        assert len(nonidentity_elements(CyclicFactor(order=4))) == 3

    @pytest.mark.parametrize(
        "descriptor",
        [
            IntegersFactor(),
            RationalsFactor(),
            FreeFactor(rank="countable"),
            FreeFactor(rank=2),
            InvolutionFreeFactor(rank="countable"),
            FreeProductFactor(components=(CyclicFactor(order=3), IntegersFactor())),
        ],
    )
    def test_infinite_enumerations_start_at_identity_without_repeats(self, descriptor):
        elements = enumerate_elements(descriptor, 200)
        assert elements[0].is_identity
        payloads = [a.payload for a in elements]
        assert len(set(payloads)) == len(payloads)
        assert all(descriptor.is_payload(p) for p in payloads)

    def test_infinite_group_needs_a_limit(self):
        with pytest.raises(ContractViolation):
            nonidentity_elements(IntegersFactor())

    def test_limit_must_be_positive(self):
        with pytest.raises(ContractViolation):
            enumerate_elements(IntegersFactor(), 0)


class TestElementCalculus:
    def test_cyclic_arithmetic(self):
        z6 = CyclicFactor(order=6)
        a = parse_element(z6, "4")
        assert format_element(group_op(a, a)) == "2"
        assert format_element(group_inverse(a)) == "2"
        assert element_order(a) == 3
        assert is_involution(parse_element(z6, "3"))
        assert not is_involution(identity(z6))

    def test_integers_have_infinite_order(self):
        assert element_order(parse_element(IntegersFactor(), "5")) is None
        assert element_order(identity(IntegersFactor())) == 1

    def test_rationals(self):
        q = RationalsFactor()
        half = parse_element(q, "1/2")
        assert group_op(half, half).payload == Fraction(1)
        assert format_element(parse_element(q, "-6/4")) == "-3/2"
        with pytest.raises(ParseException):
            parse_element(q, "1/0")

    def test_free_group_literals_are_reduced(self):
        f = FreeFactor(rank="countable")
        a = parse_element(f, "x1x2x2'x3")
        assert format_element(a) == "x1x3"
        assert format_element(group_inverse(a)) == "x3'x1'"
        assert format_element(group_op(a, group_inverse(a))) == "e"
        with pytest.raises(ParseException):
            parse_element(FreeFactor(rank=2), "x3")

    def test_involution_free_product_orders(self):
        d = InvolutionFreeFactor(rank="countable")
        assert element_order(parse_element(d, "y1y2y1")) == 2
        assert element_order(parse_element(d, "y1y2")) is None
        assert format_element(parse_element(d, "y1y1y2")) == "y2"

    def test_table_group(self, s3):
        transposition = make_element(s3, 1)
        rotation = make_element(s3, 3)
        assert element_order(transposition) == 2
        assert element_order(rotation) == 3
        assert s3.has_involution()
        assert group_op(transposition, group_inverse(transposition)).is_identity

    def test_free_product_literals(self):
        d = descriptor_from_config({"product": [{"cyclic": 3}, {"free": 2}]})
        a = parse_element(d, "<1:2,2:x1>")
        assert a.payload == ((1, 2), (2, (1,)))
        assert format_element(a) == "<1:2,2:x1>"
        assert format_element(group_op(parse_element(d, "<1:1>"), parse_element(d, "<1:2>"))) == "<>"
        assert element_order(parse_element(d, "<1:1>")) == 3
        assert element_order(a) is None
        assert element_order(parse_element(d, "<2:x1,1:1,2:x1'>")) == 3

    def test_mixed_descriptors_do_not_multiply(self):
        with pytest.raises(ContractViolation):
            group_op(parse_element(IntegersFactor(), "1"), parse_element(CyclicFactor(order=2), "1"))

    def test_make_element_rejects_non_canonical_payloads(self):
        with pytest.raises(ContractViolation):
            make_element(CyclicFactor(order=3), 3)
        with pytest.raises(ContractViolation):
            make_element(FreeFactor(rank=2), (1, -1))

    @pytest.mark.parametrize("text", ["x", "1.5", "", "y1"])
    def test_bad_integer_literals(self, text):
        with pytest.raises(ParseException):
            parse_element(IntegersFactor(), text)


class TestDescriptors:
    def test_non_associative_table_is_rejected(self):
        with pytest.raises(ValidationError):
            TableFactor(table=tuple(tuple(row) for row in NON_ASSOCIATIVE_LOOP))
        with pytest.raises(ConfigException):
            descriptor_from_config({"table": NON_ASSOCIATIVE_LOOP})

    def test_table_needs_identity_row(self):
        with pytest.raises(ValidationError):
            TableFactor(table=((1, 0), (0, 1)))

    def test_unknown_descriptor(self):
        with pytest.raises(ConfigException):
            descriptor_from_config({"dihedral": 4})
        with pytest.raises(ConfigException):
            descriptor_from_config({"cyclic": 1})

    def test_labels(self):
        assert descriptor_from_config({"cyclic": 3}).label == "Z/3"
        assert descriptor_from_config({"free": "countable"}).label == "F(inf)"
        assert descriptor_from_config({"free2": "countable"}).label == "Z2*(inf)"
        assert descriptor_from_config({"product": ["Z", "Q"]}).label == "(Z*Q)"


class TestFamilySpec:
    def test_prefix_then_repeating_tail(self):
        spec = family_from_config({"prefix": [{"cyclic": 2}], "tail": ["Z", "Q"]})
        assert spec.descriptor(1) == CyclicFactor(order=2)
        assert spec.descriptor(2) == IntegersFactor()
        assert spec.descriptor(3) == RationalsFactor()
        assert spec.descriptor(4) == IntegersFactor()
        assert not spec.is_finite
        assert spec.size is None
        assert spec.label == "(Z/2; repeat Z, Q)"

    def test_finite_family(self, c3c2_family):
        assert c3c2_family.is_finite
        assert c3c2_family.size == 2
        assert c3c2_family.has_index(2)
        assert not c3c2_family.has_index(3)
        with pytest.raises(ContractViolation):
            c3c2_family.descriptor(3)
        with pytest.raises(ContractViolation):
            c3c2_family.descriptor(0)

    def test_empty_tail_is_rejected(self):
        with pytest.raises(ConfigException):
            family_from_config({"prefix": ["Z"], "tail": []})

    def test_config_round_trip(self, s3):
        spec = FamilySpec(prefix=(s3,), tail=(IntegersFactor(), CyclicFactor(order=5)))
        assert family_from_config(spec.to_config()) == spec

    def test_invalid_json(self):
        with pytest.raises(ConfigException) as exc_info:
            family_from_json('{"tail": [')
        assert "line" in exc_info.value.details

    def test_non_object_config(self):
        with pytest.raises(ConfigException):
            family_from_config(["Z"])

    def test_load_family(self, tmp_path):
        path = tmp_path / "family.json"
        path.write_text('{"tail": [{"cyclic": 2}]}', encoding="utf-8")
        assert load_family(path) == constant_family({"cyclic": 2})

    def test_missing_family_file(self, tmp_path):
        with pytest.raises(ConfigException):
            load_family(tmp_path / "missing.json")
