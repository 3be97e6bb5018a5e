"""Tests for the helpers/numerics.py module."""

import math

import pytest

from slipt_lab.exceptions import BracketError, SolverError
from slipt_lab.helpers.numerics import derivative, expand_bracket, find_root
from slipt_lab.test_utils import *


class TestFindRoot:
    """Tests for find_root."""

    def test_finds_root_of_monotone_function(self):
        """Test the square root of two to full precision."""
        assert find_root(lambda x: x * x - 2, 0.0, 2.0) == pytest.approx(
            math.sqrt(2),
            rel=1e-15,
        )

    @parametrize_cases(
        Case(label="root_at_lower_end", lower=1.0, upper=3.0, expected=1.0),
        Case(label="root_at_upper_end", lower=-2.0, upper=1.0, expected=1.0),
    )
    def test_returns_end_point_root(self, lower, upper, expected):
        """Test that a root at a bracket end is returned as is."""
        assert find_root(lambda x: x - 1.0, lower, upper) == expected

    def test_raises_without_sign_change(self):
        """Test the bracket error carries the end point values."""
        with pytest.raises(BracketError) as error:
            find_root(lambda x: x * x + 1, -1.0, 1.0, name="imaginary root")

        assert "imaginary root" in str(error.value)
        assert error.value.diagnostics["f_lower"] == 2.0

    def test_bracket_error_is_solver_error(self):
        """Test the exception hierarchy used for exit codes."""
        assert issubclass(BracketError, SolverError)


class TestExpandBracket:
    """Tests for expand_bracket."""

    def test_grows_upper_end_until_sign_change(self):
        """Test doubling from 1 reaches the first power of two past 100."""
        assert expand_bracket(lambda x: x - 100.0, 0.0, 1.0, cap=1e6) == (0.0, 128.0)

    def test_keeps_bracket_with_sign_change(self):
        """Test no expansion when the bracket is already valid."""
        assert expand_bracket(lambda x: x - 0.5, 0.0, 1.0, cap=10.0) == (0.0, 1.0)

    def test_raises_at_cap(self):
        """Test the cap stops the expansion."""
        with pytest.raises(BracketError):
            expand_bracket(lambda x: x + 1.0, 0.0, 1.0, cap=64.0)


class TestDerivative:
    """Tests for derivative."""

    @parametrize_cases(
        Case(label="central_stencil", x=1.0, expected=math.exp(1.0)),
        Case(label="forward_stencil_at_limit", x=0.0, expected=1.0),
    )
    def test_exponential(self, x, expected):
        """Test the derivative of exp on both stencils."""
        assert derivative(math.exp, x, step=1e-3) == pytest.approx(expected, rel=1e-10)

    def test_forward_stencil_never_steps_below_limit(self):
        """Test the function is only evaluated at or above the lower limit."""
        seen = []

        def sqrt_logged(x):
            seen.append(x)
            return math.sqrt(x)

        derivative(sqrt_logged, 1e-3, step=1e-3)
        assert min(seen) >= 0.0

    def test_default_step_is_relative(self):
        """Test the default step on a large argument."""
        assert derivative(lambda x: x**2, 1e6) == pytest.approx(2e6, rel=1e-8)
