#!/usr/bin/env python3
# file: dyadicbloom/commutators.py
# Description: The commutator [b, P] of a tri-parameter partial paraproduct, its
# exact decomposition, the error-term dual bounds and the vector-valued pairing estimate.
# License: MIT

"""Commutators ``[b, P] f = b Pf - P(b f)``.

Axes 0, 1 and 2 play the roles of the shift parameter, the paraproduct
parameter paired with ``h_K2`` on the input and the paraproduct parameter
emitting ``h_K3``. On a finite grid every per-axis expansion of a product
carries a coarse term, so the decomposition here is an exact identity:

* ``A13_{j1}{j2}``  ``A^{0,2}_{j1,j2}(b, Pf)`` for ``(j1, j2) != (3, 3)``
* ``PA12_{j1}{j2}`` ``-P(A^{0,1}_{j1,j2}(b, f))`` for ``(j1, j2) != (3, 3)``
* ``coarse``        the coarse corrections of both expansions
* ``E1``, ``E1m``   average gaps against ``<b>_{K1 x K2 x K3}``
* ``E2``, ``E2m``   slice averages against full rectangle averages
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from .bmo import CoefSequence, all_rectangles_family, bmo_prod, little_bmo_bloom
from .exceptions import DegenerateInstanceError, ExponentError, FamilyError, GridError, NormalizationError, SpecMismatchError
from .haar import coefficient_matrix, haar_matrix, martingale_block
from .lattice import (
    DyadicInterval,
    GridFunction,
    GridSpec,
    apply_axis,
    average_matrix,
    normalized_indicator_matrix,
)
from .logger import performance_monitor
from .maximal_square import lp_norm
from .paraproducts import (
    PartialParaproductCoefs,
    block_inputs,
    emit_block,
    aij2,
    coarse2,
    operator_u,
    partial_paraproduct,
)
from .weights import Weight, bloom_nu, weight_values

logger = logging.getLogger(__name__)

__all__ = [
    "TERM_NAMES",
    "CommutatorDecomposition",
    "E1Bound",
    "E2Form",
    "VectorPairingReport",
    "commutator",
    "decompose",
    "average_gap_telescoped",
    "e1_dual_bound",
    "e2_dual_form",
    "vector_pairing_sides",
    "bloom_ratio",
]

KINDS = (1, 2, 3)
PAIRS = [(j1, j2) for j1 in KINDS for j2 in KINDS if (j1, j2) != (3, 3)]
TERM_NAMES = (
    tuple(f"A13_{j1}{j2}" for j1, j2 in PAIRS)
    + tuple(f"PA12_{j1}{j2}" for j1, j2 in PAIRS)
    + ("coarse", "E1", "E1m", "E2", "E2m")
)


def _check(b: GridFunction, C: PartialParaproductCoefs, f: GridFunction) -> GridSpec:
    if b.spec != C.spec or f.spec != C.spec:
        raise SpecMismatchError(f"b on {b.spec}, f on {f.spec}, coefficients on {C.spec}")
    return C.spec


def commutator(b: GridFunction, C: PartialParaproductCoefs, f: GridFunction) -> GridFunction:
    """``b Pf - P(b f)``."""
    _check(b, C, f)
    return b * partial_paraproduct(C, f) - partial_paraproduct(C, b * f)


# ==================== Block quantities ====================

def _axis0_average(values: np.ndarray, interval: DyadicInterval, depth: int) -> np.ndarray:
    """``<v>^1_I`` as a function of ``(x2, x3)``."""
    return np.tensordot(average_matrix(depth)[interval.index], values, axes=(0, 0))


def _axis0_pairing(values: np.ndarray, interval: DyadicInterval, depth: int) -> np.ndarray:
    """``<v, h_I>_1`` as a function of ``(x2, x3)``."""
    return np.tensordot(coefficient_matrix(depth)[interval.index], values, axes=(0, 0))


class _Block:
    """Per-block tables shared by the error terms."""

    def __init__(self, spec: GridSpec, key, coefs: CoefSequence, b: np.ndarray, f: np.ndarray):
        n1, n2, n3 = spec.depths
        K1, I1, J1 = key
        self.key = key
        self.a = coefs.values
        A2, A3 = average_matrix(n2), average_matrix(n3)
        self.g, self.F = block_inputs(f, spec, I1)
        self.g12 = coefficient_matrix(n2) @ self.g
        self.b_I = _axis0_average(b, I1, n1)
        self.b_J = _axis0_average(b, J1, n1)
        self.b_K = _axis0_average(b, K1, n1)
        self.T_I = A2 @ self.b_I @ A3.T
        self.T_J = A2 @ self.b_J @ A3.T
        self.T_K = A2 @ self.b_K @ A3.T
        self.A3 = A3
        self.A2 = A2


@dataclass
class CommutatorDecomposition:
    """Named terms whose sum is ``[b, P] f``."""
    spec: GridSpec
    terms: Dict[str, GridFunction] = field(default_factory=dict)

    def total(self) -> GridFunction:
        out = np.zeros(self.spec.shape)
        for term in self.terms.values():
            out = out + term.values
        return GridFunction(self.spec, out)

    def norms(self, p: float = 2.0, w: Optional[Weight] = None) -> Dict[str, float]:
        return {name: lp_norm(term, p, w) for name, term in self.terms.items()}

    def __getitem__(self, name: str) -> GridFunction:
        return self.terms[name]


@performance_monitor
def decompose(b: GridFunction, C: PartialParaproductCoefs, f: GridFunction) -> CommutatorDecomposition:
    """Split ``[b, P] f`` into paraproduct pieces and error terms.

    The ``(3, 3)`` parts of both expansions are rewritten through the average
    differences ``<b>^{1,3}_{J1 x K3} - <b>_{J1 x K2 x K3}`` and
    ``<b>^{1,2}_{I1 x K2} - <b>_{I1 x K2 x K3}`` and the add-and-subtract of
    ``<b>_{K1 x K2 x K3}``.
    """
    spec = _check(b, C, f)
    n1 = spec.depths[0]
    pf = partial_paraproduct(C, f)
    decomposition = CommutatorDecomposition(spec)
    terms = decomposition.terms
    for j1, j2 in PAIRS:
        terms[f"A13_{j1}{j2}"] = aij2(b, pf, (0, j1), (2, j2))
    for j1, j2 in PAIRS:
        terms[f"PA12_{j1}{j2}"] = -partial_paraproduct(C, aij2(b, f, (0, j1), (1, j2)))
    terms["coarse"] = coarse2(b, pf, 0, 2) - partial_paraproduct(C, coarse2(b, f, 0, 1))

    H1 = haar_matrix(n1)
    H3 = haar_matrix(spec.depths[2])
    M2 = normalized_indicator_matrix(spec.depths[1])
    e1 = np.zeros(spec.shape)
    e1m = np.zeros(spec.shape)
    e2 = np.zeros(spec.shape)
    e2m = np.zeros(spec.shape)
    for key, coefs in C.items():
        K1, I1, J1 = key
        blk = _Block(spec, key, coefs, b.values, f.values)
        h_J = H1[J1.index]
        c = blk.a * blk.F
        e1 += np.multiply.outer(h_J, emit_block(-c * (blk.T_I - blk.T_K), spec))
        e1m += np.multiply.outer(h_J, emit_block(c * (blk.T_J - blk.T_K), spec))
        # <b>^{1,3}_{J1 x K3}(x2), one column per K3
        slice_avg = blk.b_J @ blk.A3.T
        U = M2.T @ c
        V = M2.T @ (c * blk.T_J)
        e2 += np.multiply.outer(h_J, (slice_avg * U - V) @ H3)
        # <b>^{1,2}_{I1 x K2}(x3), one row per K2
        alpha = blk.A2 @ blk.b_I
        gap = (alpha * blk.g12) @ blk.A3.T - blk.T_I * blk.F
        e2m += np.multiply.outer(h_J, emit_block(-blk.a * gap, spec))
    terms["E1"] = GridFunction(spec, e1)
    terms["E1m"] = GridFunction(spec, e1m)
    terms["E2"] = GridFunction(spec, e2)
    terms["E2m"] = GridFunction(spec, e2m)
    return decomposition


def average_gap_telescoped(b: GridFunction, I1: DyadicInterval, K1: DyadicInterval,
                           K2: DyadicInterval, K3: DyadicInterval) -> float:
    """``<b>_{I1 x K2 x K3} - <b>_{K1 x K2 x K3}`` as the finite sum over
    ``L = I1^{(l)}``, ``l = 1..i1``, of ``<h_L>_{I1} <<b, h_L>_1>_{K2 x K3}``."""
    spec = b.spec
    if spec.param_count != 3:
        raise GridError(f"expected a tri-parameter grid, got {spec}")
    generations = I1.scale - K1.scale
    if generations < 0 or I1.ancestor(generations) != K1:
        raise GridError(f"{K1.key()} is not an ancestor of {I1.key()}")
    n1, n2, n3 = spec.depths
    H1 = haar_matrix(n1)
    total = 0.0
    for l in range(1, generations + 1):
        L = I1.ancestor(l)
        coef = _axis0_pairing(b.values, L, n1)
        mean_h = float(H1[L.index][I1.cells(n1)].mean())
        total += mean_h * float(average_matrix(n2)[K2.index] @ coef @ average_matrix(n3)[K3.index])
    return total


# ==================== Dual bounds ====================

@dataclass(frozen=True)
class E1Bound:
    """Quantities along the E1 estimate.

    ``pairing <= lhs`` and ``reduced <= majorized`` hold exactly; ``rhs`` is
    ``bmo_factor * majorant`` with the rectangle-oscillation surrogate.
    """
    pairing: float
    lhs: float
    majorant: float
    bmo_factor: float
    rhs: float
    reduced: float
    majorized: float


@dataclass(frozen=True)
class E2Form:
    pairing: float
    form: float


def _inner_product(u: np.ndarray, v: np.ndarray, spec: GridSpec) -> float:
    return float(np.sum(u * v) * spec.cell_volume)


def _test_pairing(g: np.ndarray, J1: DyadicInterval, spec: GridSpec) -> np.ndarray:
    """``G[K2, K3] = <g, h_J1 ⊗ 1_K2/|K2| ⊗ h_K3>``."""
    n1, n2, n3 = spec.depths
    return average_matrix(n2) @ _axis0_pairing(g, J1, n1) @ coefficient_matrix(n3).T


@performance_monitor
def e1_dual_bound(b: GridFunction, C: PartialParaproductCoefs, f: GridFunction, g: GridFunction,
                  nu: Weight) -> E1Bound:
    """Evaluate every stage of the E1 estimate for one test function ``g``."""
    spec = _check(b, C, f)
    if g.spec != spec:
        raise SpecMismatchError(f"test function on {g.spec}, expected {spec}")
    n1, n2, n3 = spec.depths
    nv = weight_values(nu, spec)
    e1 = decompose(b, C, f)["E1"]
    pairing = abs(_inner_product(e1.values, g.values, spec))

    M2, M3 = normalized_indicator_matrix(n2), normalized_indicator_matrix(n3)
    A1, A2, A3 = average_matrix(n1), average_matrix(n2), average_matrix(n3)
    C2, C3 = coefficient_matrix(n2), coefficient_matrix(n3)
    # <|<f, h_K2>_2|> over I1 x K3 needs the axis-1 coefficients of f for every x1, x3
    f_k2 = np.abs(apply_axis(C2, f.values, 1))

    lhs = 0.0
    majorant = 0.0
    reduced = 0.0
    majorized = 0.0
    for l in range(1, C.i1 + 1):
        groups: Dict[DyadicInterval, Dict[str, np.ndarray]] = {}
        for (K1, I1, J1), coefs in C.items():
            L = I1.ancestor(l)
            abs_b = np.abs(_axis0_pairing(b.values, L, n1))
            _, F = block_inputs(f.values, spec, I1)
            G = _test_pairing(g.values, J1, spec)
            weightless = np.abs(coefs.values) * np.abs(F) * np.abs(G)
            lhs += L.length ** -0.5 * float(np.sum(weightless * (A2 @ abs_b @ A3.T)))

            qf = np.abs(C2 @ _axis0_pairing(f.values, I1, n1)) @ A3.T
            qg = A2 @ np.abs(_axis0_pairing(g.values, J1, n1) @ C3.T)
            pf = (A1[I1.index] @ f_k2.reshape(2 ** n1, -1)).reshape(f_k2.shape[1:]) @ A3.T
            block = martingale_block(g, 0, K1, C.j1).values
            pg_cells = np.abs(apply_axis(C3, block, 2))
            pg = A2 @ (A1[J1.index] @ pg_cells.reshape(2 ** n1, -1)).reshape(pg_cells.shape[1:])
            root = np.sqrt(I1.length * J1.length)

            group = groups.setdefault(L, {
                "K1": K1,
                "X": np.zeros((2 ** n2, 2 ** n3)),
                "Y": np.zeros((2 ** n2, 2 ** n3)),
                "Z": np.zeros((2 ** n2, 2 ** n3)),
            })
            group["X"] = group["X"] + M2.T @ weightless @ M3
            group["Y"] = group["Y"] + root * np.sqrt(M2.T @ (qf ** 2 * qg ** 2) @ M3)
            group["Z"] = group["Z"] + root * root * np.sqrt(M2.T @ (pf ** 2 * pg ** 2) @ M3)

        sums = {name: np.zeros(spec.shape) for name in ("X", "Y", "Z")}
        for L, group in groups.items():
            profile = np.zeros(2 ** n1)
            profile[L.cells(n1)] = 1.0
            K1 = group["K1"]
            sums["X"] += np.multiply.outer(profile / L.length ** 2, group["X"] ** 2)
            scale = 1.0 / (L.length ** 2 * K1.length ** 2)
            sums["Y"] += np.multiply.outer(profile * scale, group["Y"] ** 2)
            sums["Z"] += np.multiply.outer(profile * scale, group["Z"] ** 2)
        majorant += _inner_product(np.sqrt(sums["X"]), nv, spec)
        reduced += _inner_product(np.sqrt(sums["Y"]), nv, spec)
        majorized += _inner_product(np.sqrt(sums["Z"]), nv, spec)

    bmo_factor = little_bmo_bloom(b, nu)
    return E1Bound(pairing, lhs, majorant, bmo_factor, bmo_factor * majorant, reduced, majorized)


def e2_dual_form(b: GridFunction, C: PartialParaproductCoefs, f: GridFunction, g: GridFunction,
                 nu: Weight) -> E2Form:
    """``|<E2, g>|`` and the form ``sum |a| |<f, .>| |<Ug, h_J1 ⊗ 1_K2/|K2| ⊗ h_K3>|``."""
    spec = _check(b, C, f)
    if g.spec != spec:
        raise SpecMismatchError(f"test function on {g.spec}, expected {spec}")
    e2 = decompose(b, C, f)["E2"]
    ug = operator_u(g, nu).values
    form = 0.0
    for (K1, I1, J1), coefs in C.items():
        _, F = block_inputs(f.values, spec, I1)
        form += float(np.sum(np.abs(coefs.values) * np.abs(F) * np.abs(_test_pairing(ug, J1, spec))))
    return E2Form(abs(_inner_product(e2.values, g.values, spec)), form)


# ==================== Vector-valued pairing estimate ====================

@dataclass(frozen=True)
class VectorPairingReport:
    lhs: float
    rhs: float
    ratio: float
    degenerate: bool = False


def _iterated_integral(parts: Mapping[Tuple[int, int], np.ndarray], p: float, q: float,
                       wv: np.ndarray, spec: GridSpec) -> float:
    inner: Dict[int, np.ndarray] = {}
    for (j, k), values in parts.items():
        inner[j] = inner.get(j, 0.0) + values
    total = sum(v ** p for v in inner.values())
    return float(np.sum(total ** (q / p) * wv) * spec.cell_volume)


def vector_pairing_sides(families: Mapping[Tuple[int, int], CoefSequence], fs: Mapping[Tuple[int, int], GridFunction],
                  gs: Mapping[Tuple[int, int], GridFunction], w: Optional[Weight] = None,
                  p: float = 2.0, q: float = 1.0) -> VectorPairingReport:
    """Both sides of the vector-valued estimate on a bi-parameter grid.

    ``families``, ``fs`` and ``gs`` are keyed by ``(j, k)``. The left side
    sums ``|a| |<f, h_K2 ⊗ 1_K3/|K3|>| |<g, 1_K2/|K2| ⊗ h_K3>|`` localised to
    ``K2 x K3``; the right side the square sum of the averaged one-axis
    coefficients. ``0/0`` gives ratio 0 with ``degenerate`` set.

    Raises:
        NormalizationError: if a family has product BMO norm above 1.
        ExponentError: if ``p`` or ``q`` is not in (0, inf).
    """
    for name, value in (("p", p), ("q", q)):
        if not 0.0 < float(value) < np.inf:
            raise ExponentError(f"{name} must lie in (0, inf), got {value}")
    if not families:
        raise FamilyError("no coefficient families given")
    if set(families) != set(fs) or set(families) != set(gs):
        raise FamilyError("families, fs and gs need the same (j, k) keys")
    spec = next(iter(families.values())).spec
    if spec.param_count != 2:
        raise GridError(f"the vector-valued estimate lives on bi-parameter grids, got {spec}")
    n2, n3 = spec.depths
    M2, M3 = normalized_indicator_matrix(n2), normalized_indicator_matrix(n3)
    A2, A3 = average_matrix(n2), average_matrix(n3)
    C2, C3 = coefficient_matrix(n2), coefficient_matrix(n3)
    wv = weight_values(w, spec)
    family = all_rectangles_family(spec)

    left: Dict[Tuple[int, int], np.ndarray] = {}
    right: Dict[Tuple[int, int], np.ndarray] = {}
    for key, coefs in families.items():
        f, g = fs[key], gs[key]
        if coefs.spec != spec or f.spec != spec or g.spec != spec:
            raise SpecMismatchError(f"entry {key} is not on {spec}")
        norm = bmo_prod(coefs, 2.0, family).value
        if norm > 1.0 + 1e-12:
            raise NormalizationError(f"family {key} has product BMO norm {norm:.6g} > 1")
        Ff = C2 @ f.values @ A3.T
        Gg = A2 @ g.values @ C3.T
        left[key] = M2.T @ (np.abs(coefs.values) * np.abs(Ff) * np.abs(Gg)) @ M3
        qf = np.abs(C2 @ f.values) @ A3.T
        qg = A2 @ np.abs(g.values @ C3.T)
        right[key] = np.sqrt(M2.T @ (qf ** 2 * qg ** 2) @ M3)

    lhs = _iterated_integral(left, p, q, wv, spec)
    rhs = _iterated_integral(right, p, q, wv, spec)
    if rhs == 0.0:
        return VectorPairingReport(lhs, rhs, 0.0, degenerate=True)
    return VectorPairingReport(lhs, rhs, lhs / rhs)


# ==================== Bloom ratio ====================

def bloom_ratio(b: GridFunction, C: PartialParaproductCoefs, f: GridFunction, mu: Weight, lam: Weight,
                p: float) -> float:
    """``||[b, P] f||_{L^p(lam)} / (||b||_{bmo(nu)} ||f||_{L^p(mu)})`` with ``nu`` the Bloom weight.

    Raises:
        DegenerateInstanceError: if ``b`` has no oscillation or ``f`` vanishes.
    """
    bloom = bloom_nu(mu, lam, p)
    numerator = lp_norm(commutator(b, C, f), p, bloom.lam)
    oscillation = little_bmo_bloom(b, bloom.nu)
    size = lp_norm(f, p, bloom.mu)
    if oscillation <= 1e-13 * b.max_abs() or size == 0.0:
        raise DegenerateInstanceError("Bloom ratio denominator vanishes")
    return numerator / (oscillation * size)
