"""Tests for the validation helpers module."""

import pytest
from pydantic import BaseModel, ValidationError

from slipt_lab.test_utils import *
from slipt_lab.validation import *


class _Grid(BaseModel):
    """Model used to exercise the annotated grid types."""

    p_mw: NonNegativeFloatList = [0.0]
    n_junctions: IntList = [1]


class TestApplyValidation:
    """Tests for the apply_validation function."""

    def test_returns_only_set_values(self):
        """Test unset defaults are not added to the section."""
        actual = apply_validation({"p_mw": [0, 10]}, _Grid)

        assert actual == {"p_mw": [0.0, 10.0]}

    def test_warns_without_validator(self):
        """Test the section is passed through with a warning."""
        with pytest.warns(UserWarning, match="unvalidated"):
            actual = apply_validation({"p_mw": "anything"}, None)

        assert actual == {"p_mw": "anything"}


class TestGridTypes:
    """Tests for the annotated grid types."""

    @parametrize_cases(
        Case(label="scalar_is_wrapped", value=10, expected=[10.0]),
        Case(label="list_is_kept", value=[0, 10, 100], expected=[0.0, 10.0, 100.0]),
        Case(label="tuple_is_listed", value=(5, 50), expected=[5.0, 50.0]),
    )
    def test_float_grid(self, value, expected):
        """Test scalar and sequence inputs become lists."""
        assert _Grid(p_mw=value).p_mw == expected

    def test_int_grid_from_scalar(self):
        """Test a single junction count is accepted."""
        assert _Grid(n_junctions=4).n_junctions == [4]

    def test_negative_grid_value_rejected(self):
        """Test negative powers fail validation."""
        with pytest.raises(ValidationError, match="non-negative"):
            _Grid(p_mw=[0.0, -1.0])


class TestNonNegativeGrid:
    """Tests for the non_negative_grid function."""

    def test_expected(self):
        """Test valid grids are returned unchanged."""
        assert non_negative_grid([0.0, 1e-3]) == [0.0, 1e-3]

    def test_raises(self):
        """Test the offending values are named."""
        with pytest.raises(ValueError, match=r"\[-2.0\]"):
            non_negative_grid([1.0, -2.0])
