#!/usr/bin/env python3
# file: dyadicbloom/maximal_square.py
# Description: Dyadic maximal functions, square functions and weighted L^p norms.
# License: MIT

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .exceptions import DegenerateInstanceError, ExponentError, FamilyError, GridError, SpecMismatchError
from .haar import cancellative_projection, coefficient_matrix
from .lattice import (
    GridFunction,
    GridSpec,
    apply_axis,
    average_matrix,
    containing_reduce,
    interval_lengths,
    rectangle_averages,
)
from .weights import Weight, weight_values

logger = logging.getLogger(__name__)

__all__ = [
    "NormParams",
    "lp_norm",
    "maximal",
    "weighted_maximal",
    "square_function",
    "fs_vector_maximal",
    "vector_lp_norm",
    "lower_square_ratio",
]


@dataclass(frozen=True)
class NormParams:
    """Exponent ``p`` in (0, inf] and an optional weight (``None`` is ``w ≡ 1``)."""
    p: float
    weight: Optional[Weight] = None

    def __post_init__(self):
        if not float(self.p) > 0:
            raise ExponentError(f"norm exponent must be positive, got {self.p}")


def _lp(values: np.ndarray, p: float, w: np.ndarray, cell_volume: float) -> float:
    if np.isinf(p):
        return float(np.max(np.abs(values)))
    return float((np.sum(np.abs(values) ** p * w) * cell_volume) ** (1.0 / p))


def lp_norm(f: GridFunction, params: Union[NormParams, float], w: Optional[Weight] = None) -> float:
    """``||f||_{L^p(w)} = (sum_cells |f|^p w vol)^{1/p}``; ``p = inf`` is the cell max.

    Exponents ``p < 1`` give the quasi-norm by the same formula.
    """
    if not isinstance(params, NormParams):
        params = NormParams(float(params), w)
    return _lp(f.values, float(params.p), weight_values(params.weight, f.spec), f.spec.cell_volume)


# ==================== Maximal functions ====================

def maximal(f: GridFunction, axes: Optional[Sequence[int]] = None) -> GridFunction:
    """``M f(x) = max over rectangles R ∋ x of <|f|>_R``.

    With ``axes`` only those axes are maximised (``M^1``, ``M^{1,3}``, ...).
    """
    axes = f.spec.check_axes(axes)
    table = rectangle_averages(np.abs(f.values), f.spec, axes)
    return GridFunction(f.spec, containing_reduce(table, f.spec, axes, np.max))


def weighted_maximal(f: GridFunction, w: Weight) -> GridFunction:
    """``M^w f(x) = max over R ∋ x of w(R)^{-1} ∫_R |f| w``."""
    wv = weight_values(w, f.spec)
    table = rectangle_averages(np.abs(f.values) * wv, f.spec) / rectangle_averages(wv, f.spec)
    return GridFunction(f.spec, containing_reduce(table, f.spec, f.spec.check_axes(None), np.max))


# ==================== Square functions ====================

def _inner_maximal(values: np.ndarray, spec: GridSpec, axes: Sequence[int]) -> np.ndarray:
    """Dyadic maximal function of ``|values|`` along ``axes`` (cell indices there)."""
    out = np.abs(values)
    for t in axes:
        out = apply_axis(average_matrix(spec.depths[t]), out, t)
    return containing_reduce(out, spec, axes, np.max)


def square_function(f: GridFunction, axes: Optional[Sequence[int]] = None, maximal: bool = False) -> GridFunction:
    """``S^S f = (sum_{R_S} |<f, h_{R_S}>_S|^2 1_{R_S}/|R_S|)^{1/2}`` over the axes ``S``.

    With ``maximal=True`` the dyadic maximal function over the complementary
    axes is applied to each coefficient first (the hybrid ``S_{D,M}`` forms).

    Raises:
        GridError: for ``maximal=True`` with no complementary axis left.
    """
    spec = f.spec
    axes = spec.check_axes(axes)
    complement = [t for t in range(spec.param_count) if t not in axes]
    if maximal and not complement:
        raise GridError("the hybrid square-maximal function needs a complementary axis")
    coefs = f.values
    for t in axes:
        coefs = apply_axis(coefficient_matrix(spec.depths[t]), coefs, t)
    if maximal:
        coefs = _inner_maximal(coefs, spec, complement)
    table = coefs ** 2
    for t in axes:
        shape = [-1 if s == t else 1 for s in range(spec.param_count)]
        table = table / interval_lengths(spec.depths[t]).reshape(shape)
    return GridFunction(spec, np.sqrt(containing_reduce(table, spec, axes, np.sum)))


# ==================== Vector-valued ====================

def _check_family(fs: Sequence[GridFunction]) -> GridSpec:
    if not fs:
        raise FamilyError("function list is empty")
    spec = fs[0].spec
    for f in fs:
        if f.spec != spec:
            raise SpecMismatchError(f"function on {f.spec} in a list on {spec}")
    return spec


def _check_open(name: str, value: float):
    if not 1.0 < value < np.inf:
        raise ExponentError(f"{name} must lie in (1, inf), got {value}")


def fs_vector_maximal(fs: Sequence[GridFunction], s: float, p: float, w: Optional[Weight] = None) -> float:
    """``||(sum_j (M f_j)^s)^{1/s}||_{L^p(w)}``."""
    _check_open("s", s)
    _check_open("p", p)
    spec = _check_family(fs)
    total = sum(maximal(f).values ** s for f in fs)
    return _lp(total ** (1.0 / s), p, weight_values(w, spec), spec.cell_volume)


def vector_lp_norm(fs: Sequence[GridFunction], s: float, p: float, w: Optional[Weight] = None) -> float:
    """``||(sum_j |f_j|^s)^{1/s}||_{L^p(w)}``."""
    _check_open("s", s)
    _check_open("p", p)
    spec = _check_family(fs)
    total = sum(np.abs(f.values) ** s for f in fs)
    return _lp(total ** (1.0 / s), p, weight_values(w, spec), spec.cell_volume)


def lower_square_ratio(f: GridFunction, w: Optional[Weight], p: float,
                       axes: Optional[Sequence[int]] = None) -> float:
    """``||f||_{L^p(w)} / ||S f||_{L^p(w)}`` after dropping coarse coefficients.

    Coefficients averaging on any axis of ``axes`` are zeroed first, so ``S``
    sees the whole of the projected function.

    Raises:
        DegenerateInstanceError: if the projected function has ``S f ≡ 0``.
    """
    projected = cancellative_projection(f, axes)
    denominator = lp_norm(square_function(projected, axes), p, w)
    if denominator == 0.0:
        raise DegenerateInstanceError("square function of the projected function vanishes")
    return lp_norm(projected, p, w) / denominator
