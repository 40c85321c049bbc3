#!/usr/bin/env python3
# file: dyadicbloom/lattice.py
# Description: Finite dyadic product grids: intervals, rectangles, cell-constant
# functions, Omega sets and the vectorised rectangle tables behind every sup.
# License: MIT

"""Finite dyadic product grids.

A :class:`GridSpec` with depths ``(N_0, ..., N_{m-1})`` splits ``[0, 1)^m`` into
``2**N_t`` cells along axis ``t``. Axes are numbered from 0. Every dyadic
interval on an axis has a *linear index* ``2**k - 1 + j`` (scale ``k``,
position ``j``), so the intervals of an axis of depth ``N`` are the integers
``0 .. 2**(N+1) - 2`` ordered by scale and then position. Rectangle tables are
numpy arrays indexed by one linear interval index per axis.
"""

import itertools
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from collections.abc import Sequence as SequenceABC
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import FamilyError, GridError, ScaleError, SpecMismatchError

logger = logging.getLogger(__name__)

__all__ = [
    "MAX_DEPTH",
    "GridSpec",
    "DyadicInterval",
    "DyadicRectangle",
    "GridFunction",
    "OmegaSet",
    "OmegaFamily",
    "AllRectangles",
    "RandomUnions",
    "LevelSets",
    "FullSpace",
    "enumerate_rectangles",
    "rectangle_count",
    "average",
    "rectangle_averages",
    "measure_tensor",
    "omega_family",
    "tensor_product",
    "apply_axis",
    "average_matrix",
    "indicator_matrix",
    "normalized_indicator_matrix",
    "ancestor_table",
    "interval_lengths",
    "containing_reduce",
    "interval_index",
    "interval_from_index",
]

MAX_DEPTH = 10
CONTAINMENT_TOLERANCE = 1e-12


# ==================== Grids ====================

@dataclass(frozen=True)
class GridSpec:
    """Dyadic product grid on ``[0, 1)^m`` with ``m`` in {1, 2, 3}."""
    depths: Tuple[int, ...]

    def __post_init__(self):
        depths = tuple(int(n) for n in self.depths)
        object.__setattr__(self, "depths", depths)
        if not 1 <= len(depths) <= 3:
            raise GridError(f"parameter count must be 1, 2 or 3, got {len(depths)}")
        for n in depths:
            if not 1 <= n <= MAX_DEPTH:
                raise GridError(f"depth must be in [1, {MAX_DEPTH}], got {n}")

    @property
    def param_count(self) -> int:
        return len(self.depths)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(2 ** n for n in self.depths)

    @property
    def cell_count(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return 2.0 ** -sum(self.depths)

    @property
    def table_shape(self) -> Tuple[int, ...]:
        """Shape of a rectangle table: one linear interval index per axis."""
        return tuple(2 ** (n + 1) - 1 for n in self.depths)

    def axis_spec(self, axes: Sequence[int]) -> "GridSpec":
        """Sub-grid made of the given axes, in the given order."""
        return GridSpec(tuple(self.depths[self.check_axis(t)] for t in axes))

    def remove_axes(self, axes: Sequence[int]) -> "GridSpec":
        keep = [t for t in range(self.param_count) if t not in set(axes)]
        if not keep:
            raise GridError("cannot remove every axis of a grid")
        return self.axis_spec(keep)

    def check_axis(self, axis: int) -> int:
        if not 0 <= axis < self.param_count:
            raise GridError(f"axis {axis} out of range for a {self.param_count}-parameter grid")
        return axis

    def check_axes(self, axes: Optional[Sequence[int]]) -> Tuple[int, ...]:
        """Normalise an axis subset; ``None`` means every axis."""
        if axes is None:
            return tuple(range(self.param_count))
        axes = tuple(int(t) for t in axes)
        if not axes:
            raise GridError("axis subset must not be empty")
        if len(set(axes)) != len(axes):
            raise GridError(f"duplicate axes in {axes}")
        for t in axes:
            self.check_axis(t)
        return tuple(sorted(axes))

    def to_json(self) -> Dict[str, Any]:
        return {"m": self.param_count, "depths": list(self.depths)}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "GridSpec":
        depths = tuple(data["depths"])
        if "m" in data and int(data["m"]) != len(depths):
            raise GridError(f"header m={data['m']} does not match depths {list(depths)}")
        return cls(depths)

    def __str__(self):
        return "N=" + ",".join(str(n) for n in self.depths)


# ==================== Intervals and rectangles ====================

def interval_index(scale: int, position: int) -> int:
    return 2 ** scale - 1 + position


def interval_from_index(index: int, axis: int = 0) -> "DyadicInterval":
    scale = (index + 1).bit_length() - 1
    return DyadicInterval(scale, index + 1 - 2 ** scale, axis)


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """``[j 2^-k, (j+1) 2^-k)`` on parameter axis ``axis``."""
    scale: int
    position: int
    axis: int = 0

    def __post_init__(self):
        if self.scale < 0:
            raise GridError(f"negative scale {self.scale}")
        if not 0 <= self.position < 2 ** self.scale:
            raise GridError(f"position {self.position} outside [0, 2^{self.scale})")
        if self.axis < 0:
            raise GridError(f"negative axis {self.axis}")

    @property
    def length(self) -> float:
        return 2.0 ** -self.scale

    @property
    def start(self) -> float:
        return self.position * self.length

    @property
    def end(self) -> float:
        return (self.position + 1) * self.length

    @property
    def index(self) -> int:
        return interval_index(self.scale, self.position)

    def check(self, spec: GridSpec) -> "DyadicInterval":
        spec.check_axis(self.axis)
        if self.scale > spec.depths[self.axis]:
            raise ScaleError(f"scale {self.scale} exceeds depth {spec.depths[self.axis]} on axis {self.axis}")
        return self

    def cells(self, depth: int) -> slice:
        """Slice of finest cells (at ``depth``) covered by the interval."""
        if self.scale > depth:
            raise ScaleError(f"scale {self.scale} exceeds depth {depth}")
        width = 2 ** (depth - self.scale)
        return slice(self.position * width, (self.position + 1) * width)

    @property
    def parent(self) -> "DyadicInterval":
        if self.scale == 0:
            raise ScaleError("the root interval has no parent")
        return DyadicInterval(self.scale - 1, self.position // 2, self.axis)

    def ancestor(self, generations: int) -> "DyadicInterval":
        """``I^{(l)}``: the dyadic ancestor ``generations`` levels up."""
        if not 0 <= generations <= self.scale:
            raise ScaleError(f"no ancestor {generations} levels above scale {self.scale}")
        return DyadicInterval(self.scale - generations, self.position >> generations, self.axis)

    def children(self) -> Tuple["DyadicInterval", "DyadicInterval"]:
        return (
            DyadicInterval(self.scale + 1, 2 * self.position, self.axis),
            DyadicInterval(self.scale + 1, 2 * self.position + 1, self.axis),
        )

    def descendants(self, generations: int) -> List["DyadicInterval"]:
        """All ``J`` with ``J^{(generations)} == self``, left to right."""
        if generations < 0:
            raise ScaleError(f"negative generation count {generations}")
        base = self.position << generations
        return [DyadicInterval(self.scale + generations, base + i, self.axis) for i in range(2 ** generations)]

    def contains(self, other: "DyadicInterval") -> bool:
        return (
            other.axis == self.axis
            and other.scale >= self.scale
            and other.position >> (other.scale - self.scale) == self.position
        )

    def key(self) -> str:
        return f"{self.axis}:{self.scale}:{self.position}"

    @classmethod
    def from_key(cls, key: str) -> "DyadicInterval":
        try:
            axis, scale, position = (int(part) for part in key.split(":"))
        except ValueError:
            raise GridError(f"malformed interval key {key!r}")
        return cls(scale, position, axis)


@dataclass(frozen=True)
class DyadicRectangle:
    """Product of one dyadic interval per axis, axis ``t`` at position ``t``."""
    intervals: Tuple[DyadicInterval, ...]

    def __post_init__(self):
        intervals = tuple(self.intervals)
        object.__setattr__(self, "intervals", intervals)
        if not intervals:
            raise GridError("a rectangle needs at least one interval")
        for t, interval in enumerate(intervals):
            if interval.axis != t:
                raise GridError(f"interval {interval.key()} sits at axis slot {t}")

    @classmethod
    def of(cls, *pairs: Tuple[int, int]) -> "DyadicRectangle":
        """Build from ``(scale, position)`` pairs, one per axis."""
        return cls(tuple(DyadicInterval(k, j, t) for t, (k, j) in enumerate(pairs)))

    @classmethod
    def from_indices(cls, indices: Sequence[int]) -> "DyadicRectangle":
        return cls(tuple(interval_from_index(int(i), t) for t, i in enumerate(indices)))

    @property
    def param_count(self) -> int:
        return len(self.intervals)

    @property
    def scales(self) -> Tuple[int, ...]:
        return tuple(i.scale for i in self.intervals)

    @property
    def positions(self) -> Tuple[int, ...]:
        return tuple(i.position for i in self.intervals)

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(i.index for i in self.intervals)

    @property
    def measure(self) -> float:
        return float(np.prod([i.length for i in self.intervals]))

    def sort_key(self):
        return (self.scales, self.positions)

    def check(self, spec: GridSpec) -> "DyadicRectangle":
        if self.param_count != spec.param_count:
            raise SpecMismatchError(
                f"rectangle has {self.param_count} axes, grid has {spec.param_count}"
            )
        for interval in self.intervals:
            interval.check(spec)
        return self

    def slices(self, spec: GridSpec) -> Tuple[slice, ...]:
        self.check(spec)
        return tuple(i.cells(n) for i, n in zip(self.intervals, spec.depths))

    def contains_cell(self, spec: GridSpec, cell: Sequence[int]) -> bool:
        return all(s.start <= c < s.stop for s, c in zip(self.slices(spec), cell))

    def contains(self, other: "DyadicRectangle") -> bool:
        return all(a.contains(b) for a, b in zip(self.intervals, other.intervals))

    def children(self) -> List["DyadicRectangle"]:
        """The ``2**m`` rectangles one scale finer on every axis."""
        return [DyadicRectangle(combo) for combo in itertools.product(*(i.children() for i in self.intervals))]

    def key(self) -> str:
        return "|".join(i.key() for i in self.intervals)

    @classmethod
    def from_key(cls, key: str) -> "DyadicRectangle":
        return cls(tuple(DyadicInterval.from_key(part) for part in key.split("|")))

    def __str__(self):
        return " x ".join(f"[{i.start:g},{i.end:g})" for i in self.intervals)


def rectangle_count(spec: GridSpec) -> int:
    return int(np.prod(spec.table_shape))


def enumerate_rectangles(spec: GridSpec) -> List[DyadicRectangle]:
    """Every dyadic rectangle of the grid, sorted by (scales, positions)."""
    per_axis = [
        [DyadicInterval(k, j, t) for k in range(n + 1) for j in range(2 ** k)]
        for t, n in enumerate(spec.depths)
    ]
    rectangles = [DyadicRectangle(combo) for combo in itertools.product(*per_axis)]
    rectangles.sort(key=DyadicRectangle.sort_key)
    return rectangles


# ==================== Per-axis tables ====================

@lru_cache(maxsize=None)
def average_matrix(depth: int) -> np.ndarray:
    """``A[I, x] = 1_I(x) / #cells(I)``: rows average over an interval."""
    n = 2 ** depth
    mat = np.zeros((2 * n - 1, n))
    for k in range(depth + 1):
        width = 2 ** (depth - k)
        for j in range(2 ** k):
            mat[interval_index(k, j), j * width:(j + 1) * width] = 1.0 / width
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=None)
def indicator_matrix(depth: int) -> np.ndarray:
    mat = (average_matrix(depth) > 0).astype(float)
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=None)
def interval_lengths(depth: int) -> np.ndarray:
    lengths = np.array([2.0 ** -k for k in range(depth + 1) for _ in range(2 ** k)])
    lengths.setflags(write=False)
    return lengths


@lru_cache(maxsize=None)
def normalized_indicator_matrix(depth: int) -> np.ndarray:
    """``M[I, x] = 1_I(x) / |I|``."""
    mat = indicator_matrix(depth) / interval_lengths(depth)[:, None]
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=None)
def ancestor_table(depth: int) -> np.ndarray:
    """``T[x, k]`` = linear index of the scale-``k`` interval containing cell ``x``."""
    n = 2 ** depth
    cells = np.arange(n)
    table = np.stack([interval_index(k, 0) + (cells >> (depth - k)) for k in range(depth + 1)], axis=1)
    table.setflags(write=False)
    return table


def apply_axis(matrix: np.ndarray, array: np.ndarray, axis: int) -> np.ndarray:
    """Contract ``matrix[:, x]`` with ``array`` along ``axis``; the result keeps axis order."""
    return np.moveaxis(np.tensordot(matrix, array, axes=(1, axis)), 0, axis)


def containing_reduce(table: np.ndarray, spec: GridSpec, axes: Sequence[int], reducer: Callable = np.max) -> np.ndarray:
    """Reduce a rectangle table over the intervals containing each cell.

    ``table`` carries a linear interval index on every axis in ``axes`` and a
    cell index on the others. The result carries cell indices everywhere:
    ``out[x] = reducer over {I_t ∋ x_t, t in axes} of table[I]``. Max and sum
    factor over axes, so the reduction runs one axis at a time.
    """
    out = table
    for t in axes:
        out = reducer(np.take(out, ancestor_table(spec.depths[t]), axis=t), axis=t + 1)
    return out


def measure_tensor(spec: GridSpec) -> np.ndarray:
    """``|R|`` for every rectangle, as a table."""
    out = np.ones(())
    for n in spec.depths:
        out = np.multiply.outer(out, interval_lengths(n))
    return out


# ==================== Grid functions ====================

Number = Union[int, float]


class GridFunction:
    """A real function constant on the finest cells of a grid.

    ``values`` has shape ``spec.shape`` with axis 0 slowest (C order). The
    array is copied and frozen on construction.
    """

    __slots__ = ("spec", "values")

    def __init__(self, spec: GridSpec, values):
        arr = np.array(values, dtype=float)
        if arr.shape != spec.shape:
            if arr.size == spec.cell_count and arr.ndim == 1:
                arr = arr.reshape(spec.shape)
            else:
                raise GridError(f"values of shape {arr.shape} do not fit grid {spec.shape}")
        if not np.all(np.isfinite(arr)):
            raise GridError("grid function values must be finite")
        arr.setflags(write=False)
        self.spec = spec
        self.values = arr

    # -- constructors

    @classmethod
    def constant(cls, spec: GridSpec, c: Number = 1.0) -> "GridFunction":
        return cls(spec, np.full(spec.shape, float(c)))

    @classmethod
    def zeros(cls, spec: GridSpec) -> "GridFunction":
        return cls(spec, np.zeros(spec.shape))

    @classmethod
    def random(cls, spec: GridSpec, seed: Optional[int] = None, distribution: str = "normal") -> "GridFunction":
        """Random cell values; ``distribution`` is "normal" or "uniform" (on [-1, 1))."""
        rng = np.random.default_rng(seed)
        if distribution == "normal":
            return cls(spec, rng.standard_normal(spec.shape))
        if distribution == "uniform":
            return cls(spec, rng.uniform(-1.0, 1.0, spec.shape))
        raise GridError(f"unknown distribution {distribution!r}")

    @classmethod
    def indicator(cls, spec: GridSpec, rectangle: DyadicRectangle) -> "GridFunction":
        values = np.zeros(spec.shape)
        values[rectangle.slices(spec)] = 1.0
        return cls(spec, values)

    # -- measures

    def integral(self) -> float:
        return float(self.values.sum() * self.spec.cell_volume)

    def average(self, rectangle: DyadicRectangle) -> float:
        return average(self, rectangle)

    def slice_average(self, axis: int, interval: DyadicInterval) -> "GridFunction":
        """``<f>^axis_I`` as a function of the remaining variables."""
        self.spec.check_axis(axis)
        if interval.axis != axis:
            interval = DyadicInterval(interval.scale, interval.position, axis)
        interval.check(self.spec)
        rest = self.spec.remove_axes([axis])
        sl = interval.cells(self.spec.depths[axis])
        return GridFunction(rest, np.take(self.values, range(sl.start, sl.stop), axis=axis).mean(axis=axis))

    # -- arithmetic

    def _other(self, other):
        if isinstance(other, GridFunction):
            if other.spec != self.spec:
                raise SpecMismatchError(f"grid {other.spec} does not match {self.spec}")
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.spec, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.spec, self.values - self._other(other))

    def __rsub__(self, other):
        return GridFunction(self.spec, self._other(other) - self.values)

    def __mul__(self, other):
        return GridFunction(self.spec, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridFunction(self.spec, self.values / self._other(other))

    def __neg__(self):
        return GridFunction(self.spec, -self.values)

    def __abs__(self):
        return GridFunction(self.spec, np.abs(self.values))

    def __pow__(self, exponent):
        return GridFunction(self.spec, self.values ** exponent)

    def __eq__(self, other):
        return isinstance(other, GridFunction) and other.spec == self.spec and np.array_equal(other.values, self.values)

    __hash__ = None

    def allclose(self, other: "GridFunction", atol: float = 1e-10) -> bool:
        return bool(np.allclose(self.values, self._other(other), rtol=0.0, atol=atol))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    # -- serialisation

    def to_json(self) -> Dict[str, Any]:
        return {"spec": self.spec.to_json(), "values": self.values.ravel().tolist()}

    @classmethod
    def from_json(cls, data: Union[str, Dict[str, Any]]) -> "GridFunction":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(GridSpec.from_json(data["spec"]), np.asarray(data["values"], dtype=float))

    def __repr__(self):
        return f"GridFunction({self.spec}, max|f|={self.max_abs():.4g})"


def tensor_product(*factors: GridFunction) -> GridFunction:
    """``f_0 ⊗ f_1 ⊗ ...`` on the concatenated grid."""
    if not factors:
        raise GridError("tensor product of nothing")
    depths: Tuple[int, ...] = ()
    values = np.ones(())
    for f in factors:
        depths += f.spec.depths
        values = np.multiply.outer(values, f.values)
    return GridFunction(GridSpec(depths), values)


def average(f: GridFunction, rectangle: DyadicRectangle) -> float:
    """``|R|^-1 ∫_R f`` by exact cell summation."""
    return float(f.values[rectangle.slices(f.spec)].mean())


def rectangle_averages(f: Union[GridFunction, np.ndarray], spec: Optional[GridSpec] = None,
                       axes: Optional[Sequence[int]] = None) -> np.ndarray:
    """Averages of ``f`` over every rectangle at once.

    With ``axes`` only those axes are averaged (one-axis slice averages keep a
    cell index on the other axes).
    """
    if isinstance(f, GridFunction):
        spec, values = f.spec, f.values
    else:
        values = f
    axes = spec.check_axes(axes)
    out = values
    for t in axes:
        out = apply_axis(average_matrix(spec.depths[t]), out, t)
    return out


# ==================== Omega sets ====================

@dataclass(frozen=True)
class OmegaSet:
    """Nonempty finite union of finest cells (flat row-major indices)."""
    spec: GridSpec
    cells: Tuple[int, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        cells = tuple(sorted(set(int(c) for c in self.cells)))
        object.__setattr__(self, "cells", cells)
        if not cells:
            raise GridError("Omega must be nonempty")
        if cells[0] < 0 or cells[-1] >= self.spec.cell_count:
            raise GridError(f"cell index out of range [0, {self.spec.cell_count})")

    @classmethod
    def from_mask(cls, spec: GridSpec, mask: np.ndarray, label: str = "") -> "OmegaSet":
        return cls(spec, tuple(np.flatnonzero(np.asarray(mask, dtype=bool).ravel())), label)

    @classmethod
    def from_rectangle(cls, spec: GridSpec, rectangle: DyadicRectangle) -> "OmegaSet":
        mask = np.zeros(spec.shape, dtype=bool)
        mask[rectangle.slices(spec)] = True
        return cls.from_mask(spec, mask, rectangle.key())

    @classmethod
    def full(cls, spec: GridSpec) -> "OmegaSet":
        return cls(spec, tuple(range(spec.cell_count)), "full")

    @cached_property
    def mask(self) -> np.ndarray:
        mask = np.zeros(self.spec.cell_count, dtype=bool)
        mask[list(self.cells)] = True
        mask = mask.reshape(self.spec.shape)
        mask.setflags(write=False)
        return mask

    @property
    def measure(self) -> float:
        return len(self.cells) * self.spec.cell_volume

    @cached_property
    def containment(self) -> np.ndarray:
        """Boolean rectangle table: ``R ⊆ Ω``."""
        table = rectangle_averages(self.mask.astype(float), self.spec) >= 1.0 - CONTAINMENT_TOLERANCE
        table.setflags(write=False)
        return table

    def contains(self, rectangle: DyadicRectangle) -> bool:
        return bool(self.mask[rectangle.slices(self.spec)].all())

    def describe(self) -> str:
        return self.label or f"cells={len(self.cells)}"

    def to_json(self) -> Dict[str, Any]:
        return {"spec": self.spec.to_json(), "cells": list(self.cells), "label": self.label}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "OmegaSet":
        return cls(GridSpec.from_json(data["spec"]), tuple(data["cells"]), data.get("label", ""))


class OmegaFamily(SequenceABC):
    """Ordered finite family of Omega sets with a textual descriptor."""

    def __init__(self, sets: Sequence[OmegaSet], descriptor: str):
        self.sets = tuple(sets)
        self.descriptor = descriptor

    def __getitem__(self, index):
        return self.sets[index]

    def __len__(self):
        return len(self.sets)

    def __add__(self, other: "OmegaFamily") -> "OmegaFamily":
        return OmegaFamily(self.sets + tuple(other.sets), f"{self.descriptor}+{other.descriptor}")

    def require_nonempty(self) -> "OmegaFamily":
        if not self.sets:
            raise FamilyError(f"Omega family {self.descriptor} is empty")
        return self

    def __repr__(self):
        return f"OmegaFamily({self.descriptor}, {len(self.sets)} sets)"


@dataclass(frozen=True)
class AllRectangles:
    """One Omega per dyadic rectangle."""

    def describe(self) -> str:
        return "AllRectangles"


@dataclass(frozen=True)
class RandomUnions:
    """``count`` unions of ``k`` random dyadic rectangles."""
    k: int
    count: int

    def __post_init__(self):
        if self.k < 1 or self.count < 1:
            raise FamilyError(f"RandomUnions needs k >= 1 and count >= 1, got k={self.k}, count={self.count}")

    def describe(self) -> str:
        return f"RandomUnions(k={self.k},count={self.count})"


@dataclass(frozen=True)
class LevelSets:
    """Superlevel sets ``{g > t}``."""
    g: GridFunction
    thresholds: Tuple[float, ...]

    def describe(self) -> str:
        return f"LevelSets(n={len(self.thresholds)})"


@dataclass(frozen=True)
class FullSpace:
    """The whole grid."""

    def describe(self) -> str:
        return "FullSpace"


OmegaStrategy = Union[AllRectangles, RandomUnions, LevelSets, FullSpace]


def omega_family(spec: GridSpec, strategy: OmegaStrategy, seed: Optional[int] = 0) -> OmegaFamily:
    """Build a finite Omega family; deterministic given ``seed``."""
    if isinstance(strategy, AllRectangles):
        sets = [OmegaSet.from_rectangle(spec, r) for r in enumerate_rectangles(spec)]
        descriptor = strategy.describe()
    elif isinstance(strategy, FullSpace):
        sets = [OmegaSet.full(spec)]
        descriptor = strategy.describe()
    elif isinstance(strategy, RandomUnions):
        rectangles = enumerate_rectangles(spec)
        rng = np.random.default_rng(seed)
        sets = []
        for i in range(strategy.count):
            mask = np.zeros(spec.shape, dtype=bool)
            for pick in rng.integers(0, len(rectangles), size=strategy.k):
                mask[rectangles[pick].slices(spec)] = True
            sets.append(OmegaSet.from_mask(spec, mask, f"union#{i}"))
        descriptor = f"{strategy.describe()}[seed={seed}]"
    elif isinstance(strategy, LevelSets):
        if strategy.g.spec != spec:
            raise SpecMismatchError(f"level-set function lives on {strategy.g.spec}, not {spec}")
        sets = []
        for t in strategy.thresholds:
            mask = strategy.g.values > t
            if mask.any():
                sets.append(OmegaSet.from_mask(spec, mask, f"level>{t:g}"))
        descriptor = strategy.describe()
    else:
        raise FamilyError(f"unknown Omega strategy {strategy!r}")
    logger.debug("omega family %s on %s: %d sets", descriptor, spec, len(sets))
    return OmegaFamily(sets, descriptor)


def parse_strategy(data: Dict[str, Any], g: Optional[GridFunction] = None) -> OmegaStrategy:
    """Strategy from its JSON form ``{"strategy": ..., "k": ..., "count": ...}``."""
    name = data.get("strategy")
    if name == "AllRectangles":
        return AllRectangles()
    if name == "FullSpace":
        return FullSpace()
    if name == "RandomUnions":
        return RandomUnions(int(data.get("k", 3)), int(data.get("count", 50)))
    if name == "LevelSets":
        if g is None:
            raise FamilyError("LevelSets needs a function to threshold")
        thresholds = data.get("thresholds")
        if thresholds is None:
            thresholds = np.quantile(g.values, np.linspace(0.0, 0.95, 20)).tolist()
        return LevelSets(g, tuple(float(t) for t in thresholds))
    raise FamilyError(f"unknown Omega strategy {name!r}")
