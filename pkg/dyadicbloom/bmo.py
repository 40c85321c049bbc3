#!/usr/bin/env python3
# file: dyadicbloom/bmo.py
# Description: Product BMO norms of coefficient sequences (plain, weight-measured,
# weight-normalised), H1-BMO pairing and Bloom little-bmo surrogates.
# License: MIT

"""BMO-type norms on a finite dyadic grid.

Every supremum over open sets runs over an explicit :class:`OmegaFamily`, and
every report carries that family's descriptor: values are only comparable
family to family.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .config import split_seed
from .exceptions import ExponentError, FamilyError, GridError, ScaleError, SpecMismatchError
from .haar import HaarIndex, cancellative_projection, coefficient_matrix, synthesize
from .lattice import (
    AllRectangles,
    DyadicInterval,
    DyadicRectangle,
    GridFunction,
    GridSpec,
    OmegaFamily,
    OmegaSet,
    ancestor_table,
    apply_axis,
    containing_reduce,
    measure_tensor,
    omega_family,
    rectangle_averages,
)
from .logger import performance_monitor
from .maximal_square import lp_norm, square_function
from .weights import Weight, describe_weight, weight_values

logger = logging.getLogger(__name__)

__all__ = [
    "CoefSequence",
    "BmoReport",
    "PairingReport",
    "JohnNirenbergReport",
    "HaarSampler",
    "sa",
    "sa_omega",
    "bmo_prod",
    "bmo_prod_w",
    "bmo_prod_weighted",
    "lift_aw",
    "h1_bmo_pairing",
    "little_bmo_bloom",
    "dual_bmo_lower",
    "jn_ratio",
    "all_rectangles_family",
]

BATCH_SIZE = 256


# ==================== Coefficient sequences ====================

def _finest_mask(spec: GridSpec) -> np.ndarray:
    """Rectangle-table mask of rectangles with a finest-scale side."""
    mask = np.zeros(spec.table_shape, dtype=bool)
    for t, n in enumerate(spec.depths):
        index = [slice(None)] * spec.param_count
        index[t] = slice(2 ** n - 1, None)
        mask[tuple(index)] = True
    return mask


class CoefSequence:
    """Sequence ``(a_R)`` over the fully cancellative rectangles of a grid.

    Stored densely as a rectangle table; entries of rectangles with a
    finest-scale side (no cancellative Haar function) must be zero.
    """

    __slots__ = ("spec", "values")

    def __init__(self, spec: GridSpec, values):
        arr = np.array(values, dtype=float)
        if arr.shape != spec.table_shape:
            raise GridError(f"coefficient table {arr.shape} does not fit grid {spec.table_shape}")
        if not np.all(np.isfinite(arr)):
            raise GridError("coefficients must be finite")
        if np.any(arr[_finest_mask(spec)] != 0.0):
            raise ScaleError("coefficient on a rectangle with a finest-scale side")
        arr.setflags(write=False)
        self.spec = spec
        self.values = arr

    @classmethod
    def zeros(cls, spec: GridSpec) -> "CoefSequence":
        return cls(spec, np.zeros(spec.table_shape))

    @classmethod
    def from_mapping(cls, spec: GridSpec, mapping: Mapping[DyadicRectangle, float]) -> "CoefSequence":
        values = np.zeros(spec.table_shape)
        for rectangle, value in mapping.items():
            rectangle.check(spec)
            for interval, n in zip(rectangle.intervals, spec.depths):
                if interval.scale >= n:
                    raise ScaleError(f"rectangle {rectangle.key()} has a finest-scale side")
            values[rectangle.indices] = float(value)
        return cls(spec, values)

    @classmethod
    def from_function(cls, f: GridFunction) -> "CoefSequence":
        """``(<f, h_R>)_R`` over fully cancellative rectangles."""
        values = f.values
        for t, n in enumerate(f.spec.depths):
            values = apply_axis(coefficient_matrix(n), values, t)
        return cls(f.spec, values)

    @classmethod
    def random(cls, spec: GridSpec, support: int, seed: Optional[int] = None) -> "CoefSequence":
        """Standard normal values on ``support`` distinct random rectangles."""
        rng = np.random.default_rng(seed)
        candidates = np.flatnonzero(~_finest_mask(spec).ravel())
        picks = rng.choice(candidates, size=min(int(support), candidates.size), replace=False)
        values = np.zeros(spec.table_shape)
        values.ravel()[picks] = rng.standard_normal(picks.size)
        return cls(spec, values)

    def __getitem__(self, rectangle: DyadicRectangle) -> float:
        rectangle.check(self.spec)
        return float(self.values[rectangle.indices])

    def items(self) -> Iterator[Tuple[DyadicRectangle, float]]:
        for indices in zip(*np.nonzero(self.values)):
            yield DyadicRectangle.from_indices(indices), float(self.values[indices])

    @property
    def support(self) -> List[DyadicRectangle]:
        return [r for r, _ in self.items()]

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def scaled(self, c: float) -> "CoefSequence":
        return CoefSequence(self.spec, self.values * float(c))

    def abs(self) -> "CoefSequence":
        return CoefSequence(self.spec, np.abs(self.values))

    def __add__(self, other: "CoefSequence") -> "CoefSequence":
        if other.spec != self.spec:
            raise SpecMismatchError(f"sequence on {other.spec} added to one on {self.spec}")
        return CoefSequence(self.spec, self.values + other.values)

    def to_json(self) -> Dict[str, Any]:
        return {"spec": self.spec.to_json(), "coefficients": {r.key(): v for r, v in self.items()}}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "CoefSequence":
        spec = GridSpec.from_json(data["spec"])
        mapping = {DyadicRectangle.from_key(k): float(v) for k, v in data["coefficients"].items()}
        return cls.from_mapping(spec, mapping)

    def __repr__(self):
        return f"CoefSequence({self.spec}, support={int(np.count_nonzero(self.values))})"


# ==================== Square sums ====================

def _density_table(A: CoefSequence) -> np.ndarray:
    return A.values ** 2 / measure_tensor(A.spec)


def sa(A: CoefSequence) -> GridFunction:
    """``S_A = (sum_R |a_R|^2 1_R/|R|)^{1/2}``."""
    return GridFunction(A.spec, np.sqrt(containing_reduce(_density_table(A), A.spec, range(A.spec.param_count), np.sum)))


def sa_omega(A: CoefSequence, omega: OmegaSet) -> GridFunction:
    """``S_{A,Ω}``: the square sum restricted to rectangles ``R ⊆ Ω``."""
    if omega.spec != A.spec:
        raise SpecMismatchError(f"Omega lives on {omega.spec}, not {A.spec}")
    table = _density_table(A) * omega.containment
    return GridFunction(A.spec, np.sqrt(containing_reduce(table, A.spec, range(A.spec.param_count), np.sum)))


def _batched_square_sums(density: np.ndarray, containment: np.ndarray, spec: GridSpec) -> np.ndarray:
    """``S_{A,Ω}^2`` for a stack of containment tables (leading batch axis)."""
    out = containment * density[None]
    for t, n in enumerate(spec.depths):
        out = np.take(out, ancestor_table(n), axis=t + 1).sum(axis=t + 2)
    return out


@lru_cache(maxsize=16)
def all_rectangles_family(spec: GridSpec) -> OmegaFamily:
    """Shared ``AllRectangles`` family per grid (containment tables stay cached)."""
    return omega_family(spec, AllRectangles())


def _default_family(spec: GridSpec, family: Optional[OmegaFamily]) -> OmegaFamily:
    family = all_rectangles_family(spec) if family is None else family
    family.require_nonempty()
    for omega in family:
        if omega.spec != spec:
            raise SpecMismatchError(f"Omega family on {omega.spec} used with {spec}")
    return family


# ==================== Reports ====================

@dataclass(frozen=True)
class BmoReport:
    """A family supremum together with the set attaining it."""
    value: float
    omega: OmegaSet
    family: str
    p: float
    weight: str
    kind: str = "prod_w"

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "value": self.value,
            "omega": self.omega.describe(),
            "omega_cells": list(self.omega.cells),
            "family": self.family,
            "p": self.p,
            "weight": self.weight,
        }


@dataclass(frozen=True)
class PairingReport:
    lhs: float
    bmo: float
    s_b_norm: float
    rhs: float
    family: str

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else 0.0


@dataclass(frozen=True)
class JohnNirenbergReport:
    low: BmoReport
    high: BmoReport

    @property
    def ratio(self) -> float:
        """``||A||(q) / ||A||(p)``; 0 for the zero sequence."""
        return self.high.value / self.low.value if self.low.value > 0 else 0.0


# ==================== Product BMO ====================

@performance_monitor
def bmo_prod_w(A: CoefSequence, p: float, w: Optional[Weight] = None,
               family: Optional[OmegaFamily] = None) -> BmoReport:
    """``max_Ω ||S_{A,Ω}||_{L^p(w)} / w(Ω)^{1/p}`` over ``family``.

    ``w=None`` is ``w ≡ 1`` and ``family=None`` is every dyadic rectangle.

    Raises:
        ExponentError: if ``p`` is not in (0, inf).
        FamilyError: if ``family`` is empty.
    """
    p = float(p)
    if not 0.0 < p < np.inf:
        raise ExponentError(f"BMO exponent must lie in (0, inf), got {p}")
    spec = A.spec
    family = _default_family(spec, family)
    wv = weight_values(w, spec)
    density = _density_table(A)
    best_value, best_index = -1.0, 0
    for start in range(0, len(family), BATCH_SIZE):
        chunk = family[start:start + BATCH_SIZE]
        containment = np.stack([omega.containment for omega in chunk])
        masks = np.stack([omega.mask for omega in chunk])
        squares = _batched_square_sums(density, containment, spec)
        axes = tuple(range(1, spec.param_count + 1))
        norms = (np.sum(squares ** (p / 2.0) * wv[None], axis=axes) * spec.cell_volume) ** (1.0 / p)
        measures = np.sum(masks * wv[None], axis=axes) * spec.cell_volume
        quotients = norms / measures ** (1.0 / p)
        i = int(np.argmax(quotients))
        if quotients[i] > best_value:
            best_value, best_index = float(quotients[i]), start + i
    logger.debug("bmo_prod_w p=%g over %s: %.6g", p, family.descriptor, best_value)
    return BmoReport(best_value, family[best_index], family.descriptor, p, describe_weight(w), "prod_w")


def bmo_prod(A: CoefSequence, p: float, family: Optional[OmegaFamily] = None) -> BmoReport:
    """Unweighted product BMO ``||A||_{BMO_prod}(p)`` over ``family``."""
    report = bmo_prod_w(A, p, None, family)
    return BmoReport(report.value, report.omega, report.family, report.p, "1", "prod")


@performance_monitor
def bmo_prod_weighted(A: CoefSequence, w: Optional[Weight] = None,
                      family: Optional[OmegaFamily] = None) -> BmoReport:
    """``max_Ω (w(Ω)^{-1} sum_{R ⊆ Ω} |a_R|^2 / <w>_R)^{1/2}``."""
    spec = A.spec
    family = _default_family(spec, family)
    wv = weight_values(w, spec)
    table = A.values ** 2 / rectangle_averages(wv, spec)
    best_value, best_index = -1.0, 0
    for i, omega in enumerate(family):
        inner = float(np.sum(table[omega.containment]))
        value = np.sqrt(inner / float(np.sum(wv[omega.mask]) * spec.cell_volume))
        if value > best_value:
            best_value, best_index = float(value), i
    return BmoReport(best_value, family[best_index], family.descriptor, 2.0, describe_weight(w), "prod(w)")


def lift_aw(A: CoefSequence, w: Optional[Weight]) -> CoefSequence:
    """``A_w = (a_R <w>_R)_R``."""
    wv = weight_values(w, A.spec)
    return CoefSequence(A.spec, A.values * rectangle_averages(wv, A.spec))


def jn_ratio(A: CoefSequence, p: float, q: float, w: Optional[Weight] = None,
             family: Optional[OmegaFamily] = None) -> JohnNirenbergReport:
    """Both John-Nirenberg directions at once: ``||A||(p)`` and ``||A||(q)``, ``p <= q``."""
    if p > q:
        raise ExponentError(f"expected p <= q, got p={p}, q={q}")
    family = _default_family(A.spec, family)
    return JohnNirenbergReport(bmo_prod_w(A, p, w, family), bmo_prod_w(A, q, w, family))


def h1_bmo_pairing(A: CoefSequence, B: CoefSequence, w: Optional[Weight] = None,
                   family: Optional[OmegaFamily] = None) -> PairingReport:
    """``sum_R |a_R| <w>_R |b_R|`` against ``||A||_{BMO_prod} ||S_B||_{L^1(w)}``."""
    if A.spec != B.spec:
        raise SpecMismatchError(f"sequences on {A.spec} and {B.spec}")
    family = _default_family(A.spec, family)
    wv = weight_values(w, A.spec)
    lhs = float(np.sum(np.abs(A.values) * rectangle_averages(wv, A.spec) * np.abs(B.values)))
    bmo = bmo_prod(A, 2.0, family).value
    s_b_norm = lp_norm(sa(B), 1.0, w)
    return PairingReport(lhs, bmo, s_b_norm, bmo * s_b_norm, family.descriptor)


# ==================== Function BMO (Bloom) ====================

@performance_monitor
def little_bmo_bloom(b: GridFunction, nu: Weight) -> float:
    """``max_R nu(R)^{-1} ∫_R |b - <b>_R|`` over all dyadic rectangles."""
    spec = b.spec
    nv = weight_values(nu, spec)
    best = 0.0
    for scales in np.ndindex(*(n + 1 for n in spec.depths)):
        blocks = []
        for k, n in zip(scales, spec.depths):
            blocks += [2 ** k, 2 ** (n - k)]
        inner = tuple(range(1, 2 * spec.param_count, 2))
        bb = b.values.reshape(blocks)
        oscillation = np.abs(bb - bb.mean(axis=inner, keepdims=True)).sum(axis=inner)
        quotient = oscillation / nv.reshape(blocks).sum(axis=inner)
        best = max(best, float(quotient.max()))
    return best


class HaarSampler:
    """Test functions for :func:`dual_bmo_lower`, mean zero along ``axes``.

    Even draws are Haar atoms ``h^eta_R`` (cancellative on ``axes``, averaging
    elsewhere); odd draws are random Haar polynomials.
    """

    def __init__(self, spec: GridSpec, axes: Optional[Sequence[int]] = None, count: int = 64, seed: int = 0):
        self.spec = spec
        self.axes = spec.check_axes(axes)
        self.count = int(count)
        self.seed = seed

    def __len__(self):
        return self.count

    def __iter__(self) -> Iterator[GridFunction]:
        bits = tuple(1 if t in self.axes else 0 for t in range(self.spec.param_count))
        for i in range(self.count):
            rng = np.random.default_rng(split_seed(self.seed, i))
            if i % 2 == 0:
                intervals = []
                for t, n in enumerate(self.spec.depths):
                    k = int(rng.integers(0, n if bits[t] else n + 1))
                    intervals.append(DyadicInterval(k, int(rng.integers(0, 2 ** k)), t))
                yield synthesize(self.spec, DyadicRectangle(tuple(intervals)), HaarIndex(bits))
            else:
                f = GridFunction(self.spec, rng.standard_normal(self.spec.shape))
                yield cancellative_projection(f, self.axes)


def dual_bmo_lower(b: GridFunction, nu: Weight, axes: Optional[Sequence[int]] = None,
                   sampler=None) -> float:
    """Sampled lower bound of ``sup_f |<b, f>| / ||S^S f||_{L^1(nu)}``.

    Samples that are not mean zero along every axis of ``S`` and samples with
    ``S^S f ≡ 0`` are skipped. Returns 0 when nothing usable was drawn.
    """
    spec = b.spec
    axes = spec.check_axes(axes)
    sampler = HaarSampler(spec, axes) if sampler is None else sampler
    best, used = 0.0, 0
    for f in sampler:
        if f.spec != spec:
            raise SpecMismatchError(f"sample on {f.spec}, b on {spec}")
        scale = max(f.max_abs(), 1.0)
        if any(not np.allclose(f.values.mean(axis=t), 0.0, atol=1e-12 * scale) for t in axes):
            continue
        denominator = lp_norm(square_function(f, axes), 1.0, nu)
        if denominator <= 1e-14 * scale:
            continue
        used += 1
        pairing = abs(float(np.sum(b.values * f.values)) * spec.cell_volume)
        best = max(best, pairing / denominator)
    logger.debug("dual BMO lower bound on axes %s from %d samples: %.6g", axes, used, best)
    return best
