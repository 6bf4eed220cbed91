"""Analysis on the broken line: resolvent and Riesz kernels, discrete operators, probes."""

__version__ = "0.1.0"

from .broken_line import Dimensions, GridFunction, build_grid  # noqa: E402,F401
