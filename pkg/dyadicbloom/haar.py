#!/usr/bin/env python3
# file: dyadicbloom/haar.py
# Description: Haar functions, Haar and partial coefficients, martingale
# operators and the separable Haar transform.
# License: MIT

"""Haar system on a dyadic grid.

``h^0_I = |I|^{-1/2} 1_I`` and ``h^1_I = |I|^{-1/2} (1_{I_l} - 1_{I_r})``;
tensor products over the axes give ``h^eta_R``. The transform stores, per
axis, the top average at index 0 and the cancellative coefficient of
interval ``(k, j)`` at index ``2**k + j``.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Iterator, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import GridError, ScaleError, SpecMismatchError
from .lattice import (
    DyadicInterval,
    DyadicRectangle,
    GridFunction,
    GridSpec,
    interval_index,
)
from .logger import performance_monitor

logger = logging.getLogger(__name__)

__all__ = [
    "HaarIndex",
    "HaarCoefficients",
    "haar_matrix",
    "coefficient_matrix",
    "haar_function",
    "synthesize",
    "haar_coefficient",
    "partial_coefficient",
    "martingale_diff",
    "martingale_avg",
    "martingale_block",
    "scale_average",
    "scale_difference",
    "forward_transform",
    "inverse_transform",
    "cancellative_projection",
    "cancellative_table",
]


# ==================== Haar index ====================

@dataclass(frozen=True)
class HaarIndex:
    """Per-axis bits: 1 selects the cancellative factor, 0 the averaging one."""
    bits: Tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise GridError(f"Haar index bits must be 0 or 1, got {bits}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def of(cls, value: Union["HaarIndex", Sequence[int], None], m: int) -> "HaarIndex":
        """Coerce ``value``; ``None`` means fully cancellative."""
        if value is None:
            return cls.full(m)
        index = value if isinstance(value, HaarIndex) else cls(tuple(value))
        if len(index.bits) != m:
            raise SpecMismatchError(f"Haar index {index.bits} has {len(index.bits)} bits, grid has {m} axes")
        return index

    @classmethod
    def full(cls, m: int) -> "HaarIndex":
        return cls((1,) * m)

    @property
    def is_fully_cancellative(self) -> bool:
        return all(self.bits)

    @property
    def cancellative_axes(self) -> Tuple[int, ...]:
        return tuple(t for t, b in enumerate(self.bits) if b)

    def key(self) -> str:
        return "".join(str(b) for b in self.bits)


# ==================== Per-axis tables ====================

@lru_cache(maxsize=None)
def haar_matrix(depth: int, cancellative: bool = True) -> np.ndarray:
    """``H[I, x] = h_I(x)`` for every interval of an axis.

    Cancellative rows of finest-scale intervals are zero (no children).
    """
    n = 2 ** depth
    mat = np.zeros((2 * n - 1, n))
    for k in range(depth + 1):
        width = 2 ** (depth - k)
        amp = 2.0 ** (k / 2)
        for j in range(2 ** k):
            row = interval_index(k, j)
            if not cancellative:
                mat[row, j * width:(j + 1) * width] = amp
            elif k < depth:
                half = width // 2
                mat[row, j * width:j * width + half] = amp
                mat[row, j * width + half:(j + 1) * width] = -amp
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=None)
def coefficient_matrix(depth: int, cancellative: bool = True) -> np.ndarray:
    """``C[I, x] = h_I(x) * cell length``: contracting with it gives ``<f, h_I>``."""
    mat = haar_matrix(depth, cancellative) * 2.0 ** -depth
    mat.setflags(write=False)
    return mat


def _check_interval(interval: DyadicInterval, depth: int, cancellative: bool):
    if interval.scale > depth:
        raise ScaleError(f"scale {interval.scale} exceeds depth {depth}")
    if cancellative and interval.scale >= depth:
        raise ScaleError(f"no cancellative Haar function on finest-scale interval {interval.key()}")


def haar_function(interval: DyadicInterval, cancellative: bool = True, depth: Optional[int] = None) -> GridFunction:
    """One-axis profile of ``h^1_I`` (or ``h^0_I``) on a grid of ``depth``."""
    depth = interval.scale + 1 if depth is None else depth
    _check_interval(interval, depth, cancellative)
    return GridFunction(GridSpec((depth,)), haar_matrix(depth, cancellative)[interval.index])


def _rows(spec: GridSpec, rectangle: DyadicRectangle, eta: HaarIndex, pairing: bool):
    rectangle.check(spec)
    rows = []
    for interval, n, bit in zip(rectangle.intervals, spec.depths, eta.bits):
        _check_interval(interval, n, bool(bit))
        table = coefficient_matrix(n, bool(bit)) if pairing else haar_matrix(n, bool(bit))
        rows.append(table[interval.index])
    return rows


def synthesize(spec: GridSpec, rectangle: DyadicRectangle, eta=None) -> GridFunction:
    """``h^eta_R`` as a grid function (fully cancellative by default)."""
    eta = HaarIndex.of(eta, spec.param_count)
    values = np.ones(())
    for row in _rows(spec, rectangle, eta, pairing=False):
        values = np.multiply.outer(values, row)
    return GridFunction(spec, values)


def haar_coefficient(f: GridFunction, rectangle: DyadicRectangle, eta=None) -> float:
    """``<f, h^eta_R>`` by exact cell summation."""
    eta = HaarIndex.of(eta, f.spec.param_count)
    out = f.values
    for row in _rows(f.spec, rectangle, eta, pairing=True):
        out = np.tensordot(row, out, axes=(0, 0))
    return float(out)


def partial_coefficient(f: GridFunction, axes: Sequence[int], intervals: Sequence[DyadicInterval],
                        eta: Optional[Sequence[int]] = None) -> GridFunction:
    """Pair ``f`` with Haar profiles on ``axes`` only.

    Returns ``<f, h_{I_s} ⊗ ...>_S`` as a function of the remaining axes, in
    their original order.

    Raises:
        GridError: if ``axes`` is empty or covers every axis.
    """
    spec = f.spec
    axes = tuple(axes)
    if not axes or len(set(axes)) == spec.param_count:
        raise GridError("partial pairing needs a nonempty proper axis subset; use haar_coefficient")
    spec.check_axes(axes)
    if len(intervals) != len(axes):
        raise GridError(f"{len(axes)} axes but {len(intervals)} intervals")
    bits = (1,) * len(axes) if eta is None else tuple(eta)
    pairs = sorted(zip(axes, intervals, bits), key=lambda item: -item[0])
    out = f.values
    for t, interval, bit in pairs:
        n = spec.depths[t]
        _check_interval(interval, n, bool(bit))
        out = np.tensordot(out, coefficient_matrix(n, bool(bit))[interval.index], axes=(t, 0))
    return GridFunction(spec.remove_axes(axes), out)


# ==================== Martingale operators ====================

def _outer_on_axis(values: np.ndarray, profile: np.ndarray, axis: int) -> np.ndarray:
    """Insert ``profile`` as axis ``axis`` of ``values`` (a product, not a sum)."""
    return np.moveaxis(np.multiply.outer(profile, values), 0, axis)


def martingale_diff(f: GridFunction, axis: int, interval: DyadicInterval) -> GridFunction:
    """``Δ^axis_I f = <f, h_I>_axis ⊗ h_I``."""
    spec = f.spec
    spec.check_axis(axis)
    n = spec.depths[axis]
    _check_interval(interval, n, True)
    coef = np.tensordot(f.values, coefficient_matrix(n)[interval.index], axes=(axis, 0))
    return GridFunction(spec, _outer_on_axis(coef, haar_matrix(n)[interval.index], axis))


def martingale_avg(f: GridFunction, axis: int, interval: DyadicInterval) -> GridFunction:
    """``E^axis_I f = 1_I <f>^axis_I``."""
    spec = f.spec
    spec.check_axis(axis)
    n = spec.depths[axis]
    _check_interval(interval, n, False)
    sl = interval.cells(n)
    profile = np.zeros(2 ** n)
    profile[sl] = 1.0
    avg = np.take(f.values, range(sl.start, sl.stop), axis=axis).mean(axis=axis)
    return GridFunction(spec, _outer_on_axis(avg, profile, axis))


def martingale_block(f: GridFunction, axis: int, interval: DyadicInterval, generations: int) -> GridFunction:
    """``Δ^axis_{K,j} f = Σ_{J^{(j)} = K} Δ^axis_J f``.

    Blocks reaching the finest scale are zero; deeper requests raise.
    """
    spec = f.spec
    spec.check_axis(axis)
    n = spec.depths[axis]
    if generations < 0 or interval.scale + generations > n:
        raise ScaleError(f"block of depth {generations} below scale {interval.scale} overflows depth {n}")
    k = interval.scale + generations
    if k == n:
        return GridFunction.zeros(spec)
    diff = scale_difference(f.values, spec, axis, k)
    mask = np.zeros(2 ** n)
    mask[interval.cells(n)] = 1.0
    shape = [2 ** n if t == axis else 1 for t in range(spec.param_count)]
    return GridFunction(spec, diff * mask.reshape(shape))


def scale_average(values: np.ndarray, spec: GridSpec, axis: int, scale: int) -> np.ndarray:
    """``E^axis_k``: average over the scale-``k`` intervals of ``axis``, broadcast back."""
    n = spec.depths[axis]
    if not 0 <= scale <= n:
        raise ScaleError(f"scale {scale} outside [0, {n}]")
    if scale == n:
        return np.array(values, dtype=float)
    moved = np.moveaxis(values, axis, 0)
    rest = moved.shape[1:]
    blocks = moved.reshape((2 ** scale, 2 ** (n - scale)) + rest).mean(axis=1, keepdims=True)
    out = np.broadcast_to(blocks, (2 ** scale, 2 ** (n - scale)) + rest).reshape(moved.shape)
    return np.moveaxis(out, 0, axis)


def scale_difference(values: np.ndarray, spec: GridSpec, axis: int, scale: int) -> np.ndarray:
    """``D^axis_k = E^axis_{k+1} - E^axis_k`` for ``k < N``."""
    if not 0 <= scale < spec.depths[axis]:
        raise ScaleError(f"no martingale difference at scale {scale} on axis {axis}")
    return scale_average(values, spec, axis, scale + 1) - scale_average(values, spec, axis, scale)


# ==================== Transform ====================

def _forward_axis(values: np.ndarray, axis: int, depth: int) -> np.ndarray:
    cur = np.moveaxis(values, axis, 0)
    out = np.empty_like(cur, dtype=float)
    for k in range(depth - 1, -1, -1):
        left, right = cur[0::2], cur[1::2]
        out[2 ** k:2 ** (k + 1)] = 2.0 ** (-k / 2) * (left - right) / 2.0
        cur = (left + right) / 2.0
    out[0] = cur[0]
    return np.moveaxis(out, 0, axis)


def _inverse_axis(values: np.ndarray, axis: int, depth: int) -> np.ndarray:
    coefs = np.moveaxis(values, axis, 0)
    cur = coefs[0:1]
    for k in range(depth):
        detail = coefs[2 ** k:2 ** (k + 1)] * 2.0 ** (k / 2)
        nxt = np.empty((2 ** (k + 1),) + coefs.shape[1:])
        nxt[0::2] = cur + detail
        nxt[1::2] = cur - detail
        cur = nxt
    return np.moveaxis(cur, 0, axis)


def _slot_interval(slot: int, axis: int) -> Tuple[DyadicInterval, int]:
    if slot == 0:
        return DyadicInterval(0, 0, axis), 0
    k = slot.bit_length() - 1
    return DyadicInterval(k, slot - 2 ** k, axis), 1


class HaarCoefficients:
    """Output of :func:`forward_transform`.

    ``values[s_0, ..., s_{m-1}]`` is the coefficient against
    ``⊗_t h^{eta_t}_{I_t}`` where slot ``s_t = 0`` is the averaging function
    of ``[0, 1)`` and slot ``2**k + j`` the cancellative function of
    interval ``(k, j)``.
    """

    __slots__ = ("spec", "values")

    def __init__(self, spec: GridSpec, values: np.ndarray):
        arr = np.array(values, dtype=float)
        if arr.shape != spec.shape:
            raise GridError(f"coefficient array {arr.shape} does not fit grid {spec.shape}")
        arr.setflags(write=False)
        self.spec = spec
        self.values = arr

    def _slot(self, interval: DyadicInterval, bit: int, depth: int) -> int:
        if bit == 0:
            if interval.scale != 0:
                raise GridError(f"only the root averaging coefficient is stored, not {interval.key()}")
            return 0
        _check_interval(interval, depth, True)
        return 2 ** interval.scale + interval.position

    def get(self, rectangle: DyadicRectangle, eta=None) -> float:
        eta = HaarIndex.of(eta, self.spec.param_count)
        rectangle.check(self.spec)
        slots = tuple(
            self._slot(i, b, n) for i, b, n in zip(rectangle.intervals, eta.bits, self.spec.depths)
        )
        return float(self.values[slots])

    def items(self) -> Iterator[Tuple[DyadicRectangle, HaarIndex, float]]:
        for slots in np.ndindex(*self.spec.shape):
            pairs = [_slot_interval(s, t) for t, s in enumerate(slots)]
            yield (
                DyadicRectangle(tuple(p[0] for p in pairs)),
                HaarIndex(tuple(p[1] for p in pairs)),
                float(self.values[slots]),
            )

    def cancellative(self) -> np.ndarray:
        """Fully cancellative coefficients as a rectangle table (finest rows zero)."""
        return cancellative_table(self.values, self.spec)

    def energy(self) -> float:
        return float(np.sum(self.values ** 2))

    def to_json(self) -> Dict[str, Any]:
        return {
            "spec": self.spec.to_json(),
            "coefficients": {f"{r.key()};{eta.key()}": v for r, eta, v in self.items()},
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "HaarCoefficients":
        spec = GridSpec.from_json(data["spec"])
        out = cls(spec, np.zeros(spec.shape))
        values = np.zeros(spec.shape)
        for key, value in data["coefficients"].items():
            rect_key, _, eta_key = key.partition(";")
            rectangle = DyadicRectangle.from_key(rect_key)
            eta = HaarIndex(tuple(int(c) for c in eta_key))
            slots = tuple(
                out._slot(i, b, n) for i, b, n in zip(rectangle.intervals, eta.bits, spec.depths)
            )
            values[slots] = float(value)
        return cls(spec, values)


def cancellative_table(coefficients: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Map transform slots to a rectangle table of the cancellative coefficients.

    Slot ``s >= 1`` of an axis lands at linear interval index ``s - 1``; the
    finest-scale intervals (no cancellative function) are zero-padded.
    """
    inner = coefficients[tuple(slice(1, None) for _ in spec.depths)]
    return np.pad(inner, [(0, 2 ** n) for n in spec.depths])


@performance_monitor
def forward_transform(f: GridFunction) -> HaarCoefficients:
    """Separable Haar analysis, one butterfly sweep per axis."""
    out = f.values
    for t, n in enumerate(f.spec.depths):
        out = _forward_axis(out, t, n)
    return HaarCoefficients(f.spec, out)


@performance_monitor
def inverse_transform(coefficients: HaarCoefficients) -> GridFunction:
    out = coefficients.values
    for t, n in enumerate(coefficients.spec.depths):
        out = _inverse_axis(out, t, n)
    return GridFunction(coefficients.spec, out)


def cancellative_projection(f: GridFunction, axes: Optional[Sequence[int]] = None) -> GridFunction:
    """Drop every coefficient that averages on one of ``axes`` (default: all axes).

    The result has mean zero along each axis of ``axes``.
    """
    axes = f.spec.check_axes(axes)
    values = np.array(forward_transform(f).values)
    for t in axes:
        index = [slice(None)] * f.spec.param_count
        index[t] = 0
        values[tuple(index)] = 0.0
    return inverse_transform(HaarCoefficients(f.spec, values))
