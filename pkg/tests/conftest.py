"""Functions, classes and fixtures available across all tests."""

from slipt_lab.test_utils import *
