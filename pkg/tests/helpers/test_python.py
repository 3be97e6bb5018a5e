"""Tests for the helpers/python.py module."""

import pytest

from slipt_lab.helpers.python import *
from slipt_lab.test_utils import *


@pytest.mark.skip(reason="wrapper of third party function")
class TestAlwaysIterableLocal:
    """Tests for the always_iterable_local function."""

    pass


class TestListConvert:
    """Tests for list_convert."""

    def test_leaves_list_as_is(self):
        """Test method."""
        assert list_convert([0.0, 10.0]) == [0.0, 10.0]

    def test_converts_tuple_to_list(self):
        """Test method."""
        assert list_convert((1, 4)) == [1, 4]

    def test_wraps_string_in_list_container(self):
        """Test method."""
        assert list_convert("optimal") == ["optimal"]

    def test_does_not_convert_dict(self):
        """Test that dictionary is not converted to just list of keys."""
        assert list_convert({"lambda_min_nm": 400}) == [{"lambda_min_nm": 400}]

    def test_converts_none_to_empty(self):
        """Test that when None passed list doesn't contain None value."""
        assert list_convert(None) == []

    @pytest.mark.parametrize("obj", [4, 0.7])
    def test_wraps_other_objs_in_list_container(self, obj):
        """Test method."""
        assert list_convert(obj) == [obj]


class TestOverwriteDictionary:
    """Tests for the overwrite_dictionary function."""

    @pytest.fixture
    def base_dict(self):
        """Create base dictionary used across all tests."""
        return {
            "run": {"model": "auto", "seed": 0},
            "receiver": {
                "r_load_ohm": 1e4,
                "junctions": {"junction1": {"lambda_min_nm": 400}},
            },
            "sweep": {"p_mw": [0, 10, 100]},
        }

    @parametrize_cases(
        Case(
            label="overwrites_section_value",
            config=pytest.lazy_fixture("base_dict"),
            override_dict={"run": {"seed": 7}},
            expected={
                "run": {"model": "auto", "seed": 7},
                "receiver": {
                    "r_load_ohm": 1e4,
                    "junctions": {"junction1": {"lambda_min_nm": 400}},
                },
                "sweep": {"p_mw": [0, 10, 100]},
            },
        ),
        Case(
            label="overwrites_nested_junction_value",
            config=pytest.lazy_fixture("base_dict"),
            override_dict={"receiver": {"junctions": {"junction1": {"lambda_min_nm": 350}}}},
            expected={
                "run": {"model": "auto", "seed": 0},
                "receiver": {
                    "r_load_ohm": 1e4,
                    "junctions": {"junction1": {"lambda_min_nm": 350}},
                },
                "sweep": {"p_mw": [0, 10, 100]},
            },
        ),
        Case(
            label="replaces_grid_list",
            config=pytest.lazy_fixture("base_dict"),
            override_dict={"sweep": {"p_mw": [5]}},
            expected={
                "run": {"model": "auto", "seed": 0},
                "receiver": {
                    "r_load_ohm": 1e4,
                    "junctions": {"junction1": {"lambda_min_nm": 400}},
                },
                "sweep": {"p_mw": [5]},
            },
        ),
        Case(
            label="does_not_overwrite_dict_with_value",
            config=pytest.lazy_fixture("base_dict"),
            override_dict={"run": "accurate"},
            expected={
                "run": {"model": "auto", "seed": 0},
                "receiver": {
                    "r_load_ohm": 1e4,
                    "junctions": {"junction1": {"lambda_min_nm": 400}},
                },
                "sweep": {"p_mw": [0, 10, 100]},
            },
        ),
    )
    def test_method(self, config, override_dict, expected):
        """Test expected behaviour."""
        result = overwrite_dictionary(config, override_dict)
        assert result == expected

    def test_raises_when_key_missing(self, base_dict):
        """Test error raised if override key isn't present in base_dict."""
        with pytest.raises(ValueError, match="reciever"):
            overwrite_dictionary(base_dict, {"reciever": {"r_load_ohm": 2e4}})

    def test_raises_when_nested_key_missing(self, base_dict):
        """Test the dotted path of a misspelt key inside a section is named."""
        with pytest.raises(ValueError, match=r"receiver\.r_lod_ohm \(allowed here"):
            overwrite_dictionary(base_dict, {"receiver": {"r_lod_ohm": 2e4}})

    def test_warns_when_section_replaced_by_value(self, base_dict, caplog):
        """Test a scalar in place of a section is logged and ignored."""
        overwrite_dictionary(base_dict, {"receiver": {"junctions": 4}})

        assert "Ignoring receiver.junctions = 4" in caplog.text


class TestCalcProductOfDictValues:
    """Tests for the calc_product_of_dict_values function."""

    def test_with_single_input(self):
        """Test method functionality with a scalar and a grid."""
        result = list(calc_product_of_dict_values(n_junctions=4, p_mw=[0, 10, 100]))

        expected = [
            {"n_junctions": 4, "p_mw": 0},
            {"n_junctions": 4, "p_mw": 10},
            {"n_junctions": 4, "p_mw": 100},
        ]
        assert result == expected

    def test_first_keyword_varies_slowest(self):
        """Test the row order used by the sweep tables."""
        result = list(
            calc_product_of_dict_values(n_junctions=[1, 4], mu_a=[0.0, 0.7]),
        )

        expected = [
            {"n_junctions": 1, "mu_a": 0.0},
            {"n_junctions": 1, "mu_a": 0.7},
            {"n_junctions": 4, "mu_a": 0.0},
            {"n_junctions": 4, "mu_a": 0.7},
        ]
        assert result == expected

    def test_with_dictionary_as_value(self):
        """Test that a dictionary value is treated as a single object."""
        junction = {"lambda_min_nm": 400, "lambda_max_nm": 1000}
        result = list(calc_product_of_dict_values(junction=junction, p_mw=[0, 10]))

        expected = [
            {"junction": junction, "p_mw": 0},
            {"junction": junction, "p_mw": 10},
        ]
        assert result == expected


class TestPairwiseIterable:
    """Tests for the pairwise_iterable function."""

    def test_pairwise_list(self):
        """Test pairs of adjacent grid values."""
        assert list(pairwise_iterable([0.0, 10.0, 100.0])) == [(0.0, 10.0), (10.0, 100.0)]

    def test_pairwise_single_element(self):
        """Test a one-point grid has no pairs."""
        assert list(pairwise_iterable([1.0])) == []

    def test_pairwise_generator(self):
        """Test a generator input."""
        assert list(pairwise_iterable(x for x in range(3))) == [(0, 1), (1, 2)]

    def test_pairwise_non_iterable(self):
        """Test error raised for a non-iterable input."""
        with pytest.raises(TypeError):
            pairwise_iterable(1)
