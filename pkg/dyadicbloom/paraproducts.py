#!/usr/bin/env python3
# file: dyadicbloom/paraproducts.py
# Description: Linear and bilinear bi-parameter paraproducts, the tri-parameter
# partial paraproduct, the auxiliary paraproducts A^i_j and the operator U.
# License: MIT

"""Paraproducts on finite dyadic grids.

Per-axis building blocks (depth ``N``, ``L = 2**(N+1) - 1`` intervals):

* ``haar_matrix(N)`` ``(L, n)``: rows ``h_I``; used to emit ``h_I``.
* ``coefficient_matrix(N)``: rows pair with ``h_I`` (``<f, h_I>``).
* ``average_matrix(N)``: rows pair with ``1_I/|I|`` (``<f>_I``).
* ``normalized_indicator_matrix(N)``: rows ``1_I/|I|``; used to emit them.

Full paraproduct symmetries are slot assignments, one per axis, naming which
of ``f1``, ``f2`` or the output carries the cancellative Haar function:

===============  ====================================================
axis 0 / axis 1  operator
===============  ====================================================
F1 / OUTPUT      ``sum a_R <f1, h_I ⊗ 1_J/|J|> <f2>_R 1_I/|I| ⊗ h_J``
F1 / F2          ``sum a_R <f1, h_I ⊗ 1_J/|J|> <f2, 1_I/|I| ⊗ h_J> 1_R/|R|``
===============  ====================================================

and likewise for the other seven pairs.
"""

import enum
import itertools
import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from .bmo import CoefSequence, all_rectangles_family, bmo_prod
from .config import split_seed
from .exceptions import ExponentError, GridError, NormalizationError, ScaleError, SymmetryError
from .haar import coefficient_matrix, haar_matrix, scale_average, scale_difference
from .lattice import (
    DyadicInterval,
    GridFunction,
    GridSpec,
    apply_axis,
    average_matrix,
    containing_reduce,
    interval_lengths,
    normalized_indicator_matrix,
    rectangle_averages,
)
from .logger import performance_monitor
from .maximal_square import lp_norm
from .weights import Weight, power_product, weight_values

logger = logging.getLogger(__name__)

__all__ = [
    "Slot",
    "FullParaproductSymmetry",
    "ParaproductReport",
    "PartialParaproductCoefs",
    "all_symmetries",
    "linear_paraproduct",
    "full_paraproduct",
    "full_paraproduct_bound_report",
    "case_one_majorant",
    "dual_sum",
    "partial_paraproduct",
    "block_inputs",
    "emit_block",
    "generate_partial_coefs",
    "aij",
    "aij2",
    "coarse",
    "coarse2",
    "operator_u",
]

NORMALIZATION_TOLERANCE = 1e-9


# ==================== Linear paraproduct ====================

def linear_paraproduct(A: CoefSequence, f: GridFunction) -> GridFunction:
    """``Pi_A f = sum_R a_R <f>_R h_R``."""
    if A.spec != f.spec:
        raise GridError(f"coefficients on {A.spec}, function on {f.spec}")
    out = A.values * rectangle_averages(f)
    for t, n in enumerate(f.spec.depths):
        out = apply_axis(haar_matrix(n).T, out, t)
    return GridFunction(f.spec, out)


# ==================== Full paraproducts ====================

class Slot(enum.Enum):
    F1 = "F1"
    F2 = "F2"
    OUTPUT = "OUTPUT"


@dataclass(frozen=True)
class FullParaproductSymmetry:
    """Where the cancellative Haar function sits, per axis."""
    axis0: Slot
    axis1: Slot

    def __post_init__(self):
        for name in ("axis0", "axis1"):
            value = getattr(self, name)
            if not isinstance(value, Slot):
                try:
                    object.__setattr__(self, name, Slot(str(value).upper()))
                except ValueError:
                    raise SymmetryError(f"unknown slot {value!r}; expected F1, F2 or OUTPUT")

    @property
    def slots(self) -> Tuple[Slot, Slot]:
        return (self.axis0, self.axis1)

    def key(self) -> str:
        return f"{self.axis0.value}/{self.axis1.value}"

    @classmethod
    def parse(cls, text: str) -> "FullParaproductSymmetry":
        """From ``"F1/OUTPUT"``."""
        parts = str(text).split("/")
        if len(parts) != 2:
            raise SymmetryError(f"symmetry must look like 'F1/OUTPUT', got {text!r}")
        return cls(parts[0], parts[1])

    def __str__(self):
        return self.key()


FullParaproductSymmetry.EQ_ONE = FullParaproductSymmetry(Slot.F1, Slot.OUTPUT)
FullParaproductSymmetry.CASE_TWO = FullParaproductSymmetry(Slot.F1, Slot.F2)


def all_symmetries() -> List[FullParaproductSymmetry]:
    """The nine slot assignments, axis-0 slot major."""
    return [FullParaproductSymmetry(a, b) for a, b in itertools.product(Slot, Slot)]


def _check_symmetry(sym) -> FullParaproductSymmetry:
    if isinstance(sym, FullParaproductSymmetry):
        return sym
    if isinstance(sym, str):
        return FullParaproductSymmetry.parse(sym)
    raise SymmetryError(f"invalid full paraproduct symmetry {sym!r}")


def _check_bi_parameter(A: CoefSequence, *fs: GridFunction) -> GridSpec:
    spec = A.spec
    if spec.param_count != 2:
        raise GridError(f"full paraproducts live on bi-parameter grids, got {spec}")
    for f in fs:
        if f is not None and f.spec != spec:
            raise GridError(f"function on {f.spec}, coefficients on {spec}")
    return spec


def _pairing(f: GridFunction, sym: FullParaproductSymmetry, slot: Slot) -> np.ndarray:
    """``<f, phi_I ⊗ phi_J>`` with ``phi = h`` on the axes where ``slot`` is cancellative."""
    out = f.values
    for t, (n, s) in enumerate(zip(f.spec.depths, sym.slots)):
        matrix = coefficient_matrix(n) if s == slot else average_matrix(n)
        out = apply_axis(matrix, out, t)
    return out


def _emit(table: np.ndarray, spec: GridSpec, sym: FullParaproductSymmetry) -> np.ndarray:
    out = table
    for t, (n, s) in enumerate(zip(spec.depths, sym.slots)):
        matrix = haar_matrix(n) if s == Slot.OUTPUT else normalized_indicator_matrix(n)
        out = apply_axis(matrix.T, out, t)
    return out


def full_paraproduct(A: CoefSequence, f1: GridFunction, f2: GridFunction, sym=FullParaproductSymmetry.EQ_ONE) -> GridFunction:
    """Bilinear bi-parameter full paraproduct of the given symmetry.

    Raises:
        SymmetryError: for anything that is not one of the nine symmetries.
    """
    sym = _check_symmetry(sym)
    spec = _check_bi_parameter(A, f1, f2)
    table = A.values * _pairing(f1, sym, Slot.F1) * _pairing(f2, sym, Slot.F2)
    return GridFunction(spec, _emit(table, spec, sym))


def case_one_majorant(A: CoefSequence, f1: GridFunction) -> GridFunction:
    """``sum_R |a_R| |<f1, h_I ⊗ 1_J/|J|>| 1_I/|I| ⊗ h_J``."""
    spec = _check_bi_parameter(A, f1)
    sym = FullParaproductSymmetry.EQ_ONE
    table = np.abs(A.values) * np.abs(_pairing(f1, sym, Slot.F1))
    return GridFunction(spec, _emit(table, spec, sym))


def dual_sum(A: CoefSequence, f1: GridFunction, f2: GridFunction, w: Optional[Weight] = None,
             sym=FullParaproductSymmetry.CASE_TWO, f3: Optional[GridFunction] = None) -> float:
    """``sum_R |a_R| <w>_R |<f1, .>| |<f2, .>|`` with the pairings of ``sym``.

    With ``f3`` each term also carries the weighted average ``<|f3|>^w_R``.
    """
    sym = _check_symmetry(sym)
    spec = _check_bi_parameter(A, f1, f2, f3)
    wv = weight_values(w, spec)
    table = np.abs(A.values) * rectangle_averages(wv, spec)
    table = table * np.abs(_pairing(f1, sym, Slot.F1)) * np.abs(_pairing(f2, sym, Slot.F2))
    if f3 is not None:
        table = table * rectangle_averages(np.abs(f3.values) * wv, spec) / rectangle_averages(wv, spec)
    return float(table.sum())


@dataclass(frozen=True)
class ParaproductReport:
    symmetry: str
    p: float
    q: float
    r: float
    weight: str
    ratios: Tuple[float, ...]
    dual_ratios: Tuple[float, ...]

    @property
    def sup(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    @property
    def median(self) -> float:
        return float(np.median(self.ratios)) if self.ratios else 0.0

    @property
    def dual_sup(self) -> float:
        return max(self.dual_ratios) if self.dual_ratios else 0.0


@performance_monitor
def full_paraproduct_bound_report(A: CoefSequence, w1: Optional[Weight], w2: Optional[Weight], p: float, q: float,
                                  sym=FullParaproductSymmetry.EQ_ONE, samples: int = 50,
                                  seed: int = 0) -> ParaproductReport:
    """Sampled ``||Pi(f1, f2)||_{L^r(w)} / (||f1||_{L^p(w1)} ||f2||_{L^q(w2)})``.

    ``1/r = 1/p + 1/q`` and ``w = w1^{r/p} w2^{r/q}``; ``A`` is rescaled to unit
    product BMO norm first. The dual sum of each sample is reported on the
    same scale.
    """
    sym = _check_symmetry(sym)
    spec = _check_bi_parameter(A)
    for name, value in (("p", p), ("q", q)):
        if not 1.0 < float(value) < np.inf:
            raise ExponentError(f"{name} must lie in (1, inf), got {value}")
    r = 1.0 / (1.0 / p + 1.0 / q)
    unit = Weight.unit(spec)
    w1 = unit if w1 is None else w1
    w2 = unit if w2 is None else w2
    w = power_product([w1, w2], [r / p, r / q])
    norm = bmo_prod(A, 2.0, all_rectangles_family(spec)).value
    ratios: List[float] = []
    dual: List[float] = []
    if norm > 0:
        A = A.scaled(1.0 / norm)
        for i in range(samples):
            f1 = GridFunction.random(spec, split_seed(seed, 2 * i))
            f2 = GridFunction.random(spec, split_seed(seed, 2 * i + 1))
            denominator = lp_norm(f1, p, w1) * lp_norm(f2, q, w2)
            ratios.append(lp_norm(full_paraproduct(A, f1, f2, sym), r, w) / denominator)
            dual.append(dual_sum(A, f1, f2, w, sym) / denominator)
    else:
        ratios = [0.0] * samples
        dual = [0.0] * samples
    return ParaproductReport(sym.key(), p, q, r, w.descriptor, tuple(ratios), tuple(dual))


# ==================== Partial paraproduct ====================

BlockKey = Tuple[DyadicInterval, DyadicInterval, DyadicInterval]


class PartialParaproductCoefs:
    """Coefficients of a tri-parameter partial paraproduct of complexity ``(i1, j1)``.

    ``blocks`` maps ``(K1, I1, J1)`` with ``I1^{(i1)} = J1^{(j1)} = K1`` (axis-0
    intervals) to a :class:`CoefSequence` over axes 1 and 2.
    """

    def __init__(self, spec: GridSpec, i1: int, j1: int, blocks: Mapping[BlockKey, CoefSequence]):
        if spec.param_count != 3:
            raise GridError(f"partial paraproducts live on tri-parameter grids, got {spec}")
        n1 = spec.depths[0]
        if not (0 <= i1 <= n1 - 1 and 0 <= j1 <= n1 - 1):
            raise ScaleError(f"complexity ({i1}, {j1}) exceeds depth {n1} - 1")
        inner = spec.axis_spec((1, 2))
        checked: Dict[BlockKey, CoefSequence] = {}
        for (K1, I1, J1), coefs in blocks.items():
            for interval in (K1, I1, J1):
                if interval.axis != 0:
                    raise GridError(f"block interval {interval.key()} is not on axis 0")
            if I1.scale >= n1 or J1.scale >= n1:
                raise ScaleError(f"block ({K1.key()}, {I1.key()}, {J1.key()}) reaches the finest scale")
            if I1.scale != K1.scale + i1 or I1.ancestor(i1) != K1:
                raise GridError(f"{I1.key()} is not a generation-{i1} descendant of {K1.key()}")
            if J1.scale != K1.scale + j1 or J1.ancestor(j1) != K1:
                raise GridError(f"{J1.key()} is not a generation-{j1} descendant of {K1.key()}")
            if coefs.spec != inner:
                raise GridError(f"inner coefficients on {coefs.spec}, expected {inner}")
            checked[(K1, I1, J1)] = coefs
        self.spec = spec
        self.i1 = i1
        self.j1 = j1
        self.blocks: Dict[BlockKey, CoefSequence] = dict(sorted(checked.items()))

    @staticmethod
    def bound(K1: DyadicInterval, I1: DyadicInterval, J1: DyadicInterval) -> float:
        """``|I1|^{1/2} |J1|^{1/2} / |K1|``."""
        return np.sqrt(I1.length * J1.length) / K1.length

    def check_normalization(self) -> "PartialParaproductCoefs":
        """Raises NormalizationError if an inner product BMO norm exceeds its bound."""
        family = all_rectangles_family(self.spec.axis_spec((1, 2)))
        for (K1, I1, J1), coefs in self.blocks.items():
            value = bmo_prod(coefs, 2.0, family).value
            limit = self.bound(K1, I1, J1)
            if value > limit * (1.0 + NORMALIZATION_TOLERANCE):
                raise NormalizationError(
                    f"block ({K1.key()}, {I1.key()}, {J1.key()}): BMO norm {value:.6g} exceeds {limit:.6g}"
                )
        return self

    def scaled(self, c: float) -> "PartialParaproductCoefs":
        return PartialParaproductCoefs(self.spec, self.i1, self.j1, {k: v.scaled(c) for k, v in self.blocks.items()})

    def items(self) -> Iterator[Tuple[BlockKey, CoefSequence]]:
        return iter(self.blocks.items())

    def __len__(self):
        return len(self.blocks)

    def to_json(self) -> Dict[str, Any]:
        return {
            "spec": self.spec.to_json(),
            "i1": self.i1,
            "j1": self.j1,
            "blocks": [
                {"K1": K1.key(), "I1": I1.key(), "J1": J1.key(), "coefficients": coefs.to_json()}
                for (K1, I1, J1), coefs in self.blocks.items()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "PartialParaproductCoefs":
        blocks = {
            (DyadicInterval.from_key(b["K1"]), DyadicInterval.from_key(b["I1"]), DyadicInterval.from_key(b["J1"])):
                CoefSequence.from_json(b["coefficients"])
            for b in data["blocks"]
        }
        return cls(GridSpec.from_json(data["spec"]), int(data["i1"]), int(data["j1"]), blocks)

    def __repr__(self):
        return f"PartialParaproductCoefs({self.spec}, i1={self.i1}, j1={self.j1}, blocks={len(self.blocks)})"


def generate_partial_coefs(spec: GridSpec, i1: int, j1: int, block_count: int, seed: int = 0,
                           support: int = 3) -> PartialParaproductCoefs:
    """Random normalised coefficients.

    Each inner sequence is rescaled so that its product BMO norm equals the
    block bound times a factor drawn uniformly from ``[1/2, 1]``.
    """
    n1 = spec.depths[0]
    if spec.param_count != 3:
        raise GridError(f"partial paraproducts live on tri-parameter grids, got {spec}")
    if max(i1, j1) > n1 - 1 or min(i1, j1) < 0:
        raise ScaleError(f"complexity ({i1}, {j1}) exceeds depth {n1} - 1")
    inner = spec.axis_spec((1, 2))
    family = all_rectangles_family(inner)
    rng = np.random.default_rng(seed)
    top = n1 - 1 - max(i1, j1)
    blocks: Dict[BlockKey, CoefSequence] = {}
    attempts = 0
    while len(blocks) < block_count and attempts < 20 * max(block_count, 1):
        attempts += 1
        k = int(rng.integers(0, top + 1))
        K1 = DyadicInterval(k, int(rng.integers(0, 2 ** k)), 0)
        I1 = K1.descendants(i1)[int(rng.integers(0, 2 ** i1))]
        J1 = K1.descendants(j1)[int(rng.integers(0, 2 ** j1))]
        if (K1, I1, J1) in blocks:
            continue
        coefs = CoefSequence.random(inner, support, split_seed(seed, attempts))
        norm = bmo_prod(coefs, 2.0, family).value
        if norm == 0.0:
            continue
        target = PartialParaproductCoefs.bound(K1, I1, J1) * rng.uniform(0.5, 1.0)
        blocks[(K1, I1, J1)] = coefs.scaled(target / norm)
    logger.debug("generated %d partial paraproduct blocks (i1=%d, j1=%d)", len(blocks), i1, j1)
    return PartialParaproductCoefs(spec, i1, j1, blocks)


def block_inputs(f_values: np.ndarray, spec: GridSpec, I1: DyadicInterval) -> Tuple[np.ndarray, np.ndarray]:
    """``g = <f, h_I1>_1`` and ``F[K2, K3] = <g, h_K2 ⊗ 1_K3/|K3|>``."""
    n1, n2, n3 = spec.depths
    g = np.tensordot(coefficient_matrix(n1)[I1.index], f_values, axes=(0, 0))
    F = coefficient_matrix(n2) @ g @ average_matrix(n3).T
    return g, F


def emit_block(c: np.ndarray, spec: GridSpec) -> np.ndarray:
    """``sum c[K2, K3] 1_K2/|K2| ⊗ h_K3`` as an ``(n2, n3)`` array."""
    _, n2, n3 = spec.depths
    return normalized_indicator_matrix(n2).T @ c @ haar_matrix(n3)


@performance_monitor
def partial_paraproduct(C: PartialParaproductCoefs, f: GridFunction) -> GridFunction:
    """``Pf = sum a <f, h_I1 ⊗ h_K2 ⊗ 1_K3/|K3|> h_J1 ⊗ 1_K2/|K2| ⊗ h_K3``."""
    if f.spec != C.spec:
        raise GridError(f"function on {f.spec}, coefficients on {C.spec}")
    spec = C.spec
    H1 = haar_matrix(spec.depths[0])
    out = np.zeros(spec.shape)
    for (K1, I1, J1), coefs in C.items():
        _, F = block_inputs(f.values, spec, I1)
        out += np.multiply.outer(H1[J1.index], emit_block(coefs.values * F, spec))
    return GridFunction(spec, out)


# ==================== Auxiliary paraproducts ====================

def _scale_ops(spec: GridSpec, axis: int, kind: int) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Operator pairs ``(X_k, Y_k)`` of one axis: ``A_kind = sum_k X_k b * Y_k f``.

    ``kind`` 1 is ``(D, D)``, 2 is ``(D, E)``, 3 is ``(E, D)``; kind 0 is the
    single coarse pair ``(E_0, E_0)``.
    """
    if kind == 0:
        yield (lambda v: scale_average(v, spec, axis, 0)), (lambda v: scale_average(v, spec, axis, 0))
        return
    if kind not in (1, 2, 3):
        raise GridError(f"paraproduct kind must be 1, 2 or 3, got {kind}")
    for k in range(spec.depths[axis]):
        diff = (lambda v, k=k: scale_difference(v, spec, axis, k))
        avg = (lambda v, k=k: scale_average(v, spec, axis, k))
        yield {1: (diff, diff), 2: (diff, avg), 3: (avg, diff)}[kind]


def _check_pair(b: GridFunction, f: GridFunction) -> GridSpec:
    if b.spec != f.spec:
        raise GridError(f"b on {b.spec}, f on {f.spec}")
    return b.spec


def aij(b: GridFunction, f: GridFunction, axis: int, kind: int) -> GridFunction:
    """``A^axis_kind(b, f)``: ``sum_I Δb Δf``, ``sum_I Δb E f`` or ``sum_I E b Δf``."""
    spec = _check_pair(b, f)
    spec.check_axis(axis)
    out = np.zeros(spec.shape)
    for x, y in _scale_ops(spec, axis, kind):
        out += x(b.values) * y(f.values)
    return GridFunction(spec, out)


def coarse(b: GridFunction, f: GridFunction, axis: int) -> GridFunction:
    """``E^axis_0 b * E^axis_0 f``; completes ``b f = A_1 + A_2 + A_3 + coarse``."""
    return aij(b, f, axis, 0)


def aij2(b: GridFunction, f: GridFunction, first: Tuple[int, int], second: Tuple[int, int]) -> GridFunction:
    """``A^{i1,i2}_{j1,j2}(b, f) = A^{i1}_{j1} A^{i2}_{j2}(b, f)`` for distinct axes.

    ``first`` and ``second`` are ``(axis, kind)`` pairs; kind 0 selects the
    coarse pair.
    """
    spec = _check_pair(b, f)
    (i1, j1), (i2, j2) = first, second
    spec.check_axis(i1)
    spec.check_axis(i2)
    if i1 == i2:
        raise GridError(f"composed paraproducts need distinct axes, got {i1} twice")
    out = np.zeros(spec.shape)
    for x2, y2 in _scale_ops(spec, i2, j2):
        b2, f2 = x2(b.values), y2(f.values)
        for x1, y1 in _scale_ops(spec, i1, j1):
            out += x1(b2) * y1(f2)
    return GridFunction(spec, out)


def coarse2(b: GridFunction, f: GridFunction, first_axis: int, second_axis: int) -> GridFunction:
    """Every term of the two-axis expansion of ``b f`` with a coarse factor.

    Together with the nine ``aij2`` terms of kinds 1..3 this sums to ``b f``.
    """
    spec = _check_pair(b, f)
    if first_axis == second_axis:
        raise GridError(f"composed paraproducts need distinct axes, got {first_axis} twice")
    e1b = scale_average(b.values, spec, first_axis, 0)
    e1f = scale_average(f.values, spec, first_axis, 0)
    e2b = scale_average(b.values, spec, second_axis, 0)
    e2f = scale_average(f.values, spec, second_axis, 0)
    e12b = scale_average(e1b, spec, second_axis, 0)
    e12f = scale_average(e1f, spec, second_axis, 0)
    return GridFunction(spec, e2b * e2f + e1b * e1f - e12b * e12f)


# ==================== Operator U ====================

@performance_monitor
def operator_u(g: GridFunction, nu: Optional[Weight] = None) -> GridFunction:
    """``U g = sum_{V1, V3} h_V1 ⊗ (S_{D^2} <g, h_V1 ⊗ h_V3>_{1,3}) <nu>^{1,3}_{V1 x V3} ⊗ h_V3``."""
    spec = g.spec
    if spec.param_count != 3:
        raise GridError(f"U acts on tri-parameter grids, got {spec}")
    n1, n2, n3 = spec.depths
    G = apply_axis(coefficient_matrix(n3), apply_axis(coefficient_matrix(n1), g.values, 0), 2)
    coefs = apply_axis(coefficient_matrix(n2), G, 1) ** 2
    coefs = coefs / interval_lengths(n2).reshape(1, -1, 1)
    square = np.sqrt(containing_reduce(coefs, spec, (1,), np.sum))
    nv = weight_values(nu, spec)
    nu_avg = apply_axis(average_matrix(n3), apply_axis(average_matrix(n1), nv, 0), 2)
    out = apply_axis(haar_matrix(n1).T, square * nu_avg, 0)
    return GridFunction(spec, apply_axis(haar_matrix(n3).T, out, 2))
