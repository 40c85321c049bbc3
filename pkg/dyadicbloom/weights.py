#!/usr/bin/env python3
# file: dyadicbloom/weights.py
# Description: Multi-parameter weights: recipes, dyadic A_p / A_infinity
# characteristics and Bloom weights.
# License: MIT

"""Weights on a dyadic grid.

All characteristics are suprema over *dyadic rectangles* only. A weight is a
strictly positive :class:`~dyadicbloom.lattice.GridFunction`; recipes build
them deterministically from a seed.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .config import split_seed
from .exceptions import ExponentError, GridError, RecipeError, SpecMismatchError
from .lattice import GridFunction, GridSpec, rectangle_averages, tensor_product

logger = logging.getLogger(__name__)

__all__ = [
    "MAX_VALUE_RATIO",
    "Weight",
    "BloomWeight",
    "Constant",
    "Tensor",
    "PowerLike",
    "RandomBoundedRatio",
    "NonTensorMix",
    "ap_constant",
    "ainf_constant",
    "iterated_ap",
    "generate_weight",
    "parse_recipe",
    "dual_weight",
    "power_product",
    "is_tensor",
    "bloom_nu",
    "weight_values",
]

MAX_VALUE_RATIO = 1e4
BLOOM_TOLERANCE = 1e-12


def _check_p(p: float) -> float:
    p = float(p)
    if not 1.0 < p < np.inf:
        raise ExponentError(f"A_p exponent must lie in (1, inf), got {p}")
    return p


def _conjugate(p: float) -> float:
    return p / (p - 1.0)


class Weight:
    """Positive grid function with cached A_p constants.

    Args:
        function: Cell values, all > 0.
        descriptor: Short text naming where the weight came from.
    """

    __slots__ = ("function", "descriptor", "_ap_cache", "_ainf")

    def __init__(self, function: GridFunction, descriptor: str = "custom"):
        if not isinstance(function, GridFunction):
            raise RecipeError(f"a weight wraps a GridFunction, got {type(function).__name__}")
        if np.any(function.values <= 0.0):
            raise RecipeError("weight values must be strictly positive")
        self.function = function
        self.descriptor = descriptor
        self._ap_cache: Dict[float, float] = {}
        self._ainf: Optional[float] = None

    @classmethod
    def unit(cls, spec: GridSpec) -> "Weight":
        return cls(GridFunction.constant(spec, 1.0), "1")

    @property
    def spec(self) -> GridSpec:
        return self.function.spec

    @property
    def values(self) -> np.ndarray:
        return self.function.values

    def ap(self, p: float) -> float:
        p = _check_p(p)
        if p not in self._ap_cache:
            self._ap_cache[p] = ap_constant(self, p)
        return self._ap_cache[p]

    def ainf(self) -> float:
        if self._ainf is None:
            self._ainf = ainf_constant(self)
        return self._ainf

    def measure(self, mask: Optional[np.ndarray] = None) -> float:
        """``w(E)`` for a boolean cell mask (the whole grid by default)."""
        values = self.values if mask is None else self.values[mask]
        return float(values.sum() * self.spec.cell_volume)

    def value_ratio(self) -> float:
        return float(self.values.max() / self.values.min())

    def __repr__(self):
        return f"Weight({self.descriptor}, {self.spec})"


WeightLike = Union[Weight, GridFunction]


def _function(w: WeightLike) -> GridFunction:
    if isinstance(w, Weight):
        return w.function
    if isinstance(w, GridFunction):
        if np.any(w.values <= 0.0):
            raise RecipeError("weight values must be strictly positive")
        return w
    raise RecipeError(f"expected a Weight, got {type(w).__name__}")


def weight_values(w: Optional[WeightLike], spec: GridSpec) -> np.ndarray:
    """Cell values of ``w`` on ``spec``; ``None`` stands for ``w ≡ 1``."""
    if w is None:
        return np.ones(spec.shape)
    function = _function(w)
    if function.spec != spec:
        raise SpecMismatchError(f"weight lives on {function.spec}, not {spec}")
    return function.values


def describe_weight(w: Optional[WeightLike]) -> str:
    if w is None:
        return "1"
    return w.descriptor if isinstance(w, Weight) else "custom"


# ==================== Characteristics ====================

def ap_constant(w: WeightLike, p: float) -> float:
    """Dyadic rectangle A_p constant ``max_R <w>_R <w^{1-p'}>_R^{p-1}``.

    Raises:
        ExponentError: if ``p`` is not in (1, inf).
    """
    p = _check_p(p)
    f = _function(w)
    sigma = f.values ** (1.0 - _conjugate(p))
    table = rectangle_averages(f) * rectangle_averages(sigma, f.spec) ** (p - 1.0)
    return float(table.max())


def ainf_constant(w: WeightLike) -> float:
    """Dyadic A_infinity constant ``max_R <w>_R exp(<log w^{-1}>_R)``."""
    f = _function(w)
    table = rectangle_averages(f) * np.exp(-rectangle_averages(np.log(f.values), f.spec))
    return float(table.max())


def iterated_ap(w: WeightLike, p: float) -> Tuple[float, ...]:
    """Per-axis slice constants: the 1D dyadic A_p constant along axis ``t``,
    maximised over the frozen variables, for every axis ``t``.

    Raises:
        GridError: on a one-parameter grid.
    """
    p = _check_p(p)
    f = _function(w)
    if f.spec.param_count < 2:
        raise GridError("iterated A_p constants need at least two parameters")
    sigma = f.values ** (1.0 - _conjugate(p))
    out = []
    for t in range(f.spec.param_count):
        table = rectangle_averages(f.values, f.spec, (t,)) * rectangle_averages(sigma, f.spec, (t,)) ** (p - 1.0)
        out.append(float(table.max()))
    return tuple(out)


def dual_weight(w: WeightLike, p: float) -> Weight:
    """``w^{1-p'}``."""
    p = _check_p(p)
    f = _function(w)
    return Weight(GridFunction(f.spec, f.values ** (1.0 - _conjugate(p))), f"dual({describe_weight(w)},p={p:g})")


def power_product(weights: Sequence[WeightLike], exponents: Sequence[float]) -> Weight:
    """``prod_i w_i^{e_i}`` cellwise, e.g. ``w_1^{r/p} w_2^{r/q}``."""
    if len(weights) != len(exponents) or not weights:
        raise RecipeError("power_product needs one exponent per weight")
    functions = [_function(w) for w in weights]
    spec = functions[0].spec
    values = np.ones(spec.shape)
    for f, e in zip(functions, exponents):
        if f.spec != spec:
            raise SpecMismatchError(f"weight lives on {f.spec}, not {spec}")
        values = values * f.values ** float(e)
    descriptor = "*".join(f"{describe_weight(w)}^{e:g}" for w, e in zip(weights, exponents))
    return Weight(GridFunction(spec, values), descriptor)


def is_tensor(w: WeightLike, rtol: float = 1e-9) -> bool:
    """Cross-ratio test: ``w`` factors as a tensor product of one-axis profiles.

    Compares ``w(x) w(0)^{m-1}`` with the product of the axis slices through
    the origin cell.
    """
    f = _function(w)
    m = f.spec.param_count
    if m == 1:
        return True
    values = f.values
    origin = values[(0,) * m]
    product = np.ones(())
    for t in range(m):
        index = tuple(slice(None) if s == t else 0 for s in range(m))
        product = np.multiply.outer(product, values[index])
    return bool(np.allclose(values * origin ** (m - 1), product, rtol=rtol, atol=0.0))


# ==================== Recipes ====================

@dataclass(frozen=True)
class Constant:
    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise RecipeError(f"Constant weight needs c > 0, got {self.c}")

    def build(self, spec: GridSpec, seed: int) -> np.ndarray:
        return np.full(spec.shape, float(self.c))

    def describe(self) -> str:
        return f"Constant(c={self.c:g})"


@dataclass(frozen=True)
class PowerLike:
    """``prod_t (x_t + eps)^{a_t}`` sampled at cell midpoints."""
    exponents: Tuple[float, ...]
    eps: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(float(a) for a in self.exponents))
        if not self.eps > 0:
            raise RecipeError(f"PowerLike needs eps > 0, got {self.eps}")
        for a in self.exponents:
            if not a > -1.0:
                raise RecipeError(f"PowerLike exponent must exceed -1, got {a}")

    def build(self, spec: GridSpec, seed: int) -> np.ndarray:
        if len(self.exponents) != spec.param_count:
            raise RecipeError(f"PowerLike has {len(self.exponents)} exponents for a {spec.param_count}-parameter grid")
        values = np.ones(())
        for n, a in zip(spec.depths, self.exponents):
            midpoints = (np.arange(2 ** n) + 0.5) * 2.0 ** -n
            values = np.multiply.outer(values, (midpoints + self.eps) ** a)
        return values

    def describe(self) -> str:
        return "PowerLike(" + ",".join(f"{a:g}" for a in self.exponents) + f";eps={self.eps:g})"


@dataclass(frozen=True)
class RandomBoundedRatio:
    """Cellwise iid values uniform on ``[1/rho, rho]``."""
    rho: float
    seed: Optional[int] = None

    def __post_init__(self):
        if not 1.0 <= self.rho <= 100.0:
            raise RecipeError(f"RandomBoundedRatio needs 1 <= rho <= 100, got {self.rho}")

    def build(self, spec: GridSpec, seed: int) -> np.ndarray:
        if self.rho == 1.0:
            return np.ones(spec.shape)
        rng = np.random.default_rng(self.seed if self.seed is not None else seed)
        return rng.uniform(1.0 / self.rho, self.rho, spec.shape)

    def describe(self) -> str:
        return f"RandomBoundedRatio(rho={self.rho:g})"


@dataclass(frozen=True)
class Tensor:
    """Tensor product of one-parameter recipes, one per axis."""
    factors: Tuple[Any, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise RecipeError("Tensor recipe needs at least one factor")

    def build(self, spec: GridSpec, seed: int) -> np.ndarray:
        if len(self.factors) != spec.param_count:
            raise RecipeError(f"Tensor has {len(self.factors)} factors for a {spec.param_count}-parameter grid")
        parts = [
            GridFunction(spec.axis_spec((t,)), factor.build(spec.axis_spec((t,)), split_seed(seed, t)))
            for t, factor in enumerate(self.factors)
        ]
        return tensor_product(*parts).values

    def describe(self) -> str:
        return "Tensor(" + ",".join(f.describe() for f in self.factors) + ")"


@dataclass(frozen=True)
class NonTensorMix:
    """Positive combination ``sum_i c_i w_i`` of component weights.

    The result must fail :func:`is_tensor`; components that mix into a tensor
    weight (all constants, say) are rejected.
    """
    components: Tuple[Any, ...]
    mixing: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise RecipeError("NonTensorMix needs at least one component")
        if self.mixing is not None:
            mixing = tuple(float(c) for c in self.mixing)
            object.__setattr__(self, "mixing", mixing)
            if len(mixing) != len(self.components) or any(c <= 0 for c in mixing):
                raise RecipeError("NonTensorMix mixing needs one positive coefficient per component")

    def build(self, spec: GridSpec, seed: int) -> np.ndarray:
        if spec.param_count < 2:
            raise RecipeError("NonTensorMix needs a grid with at least two parameters")
        mixing = self.mixing or (1.0,) * len(self.components)
        values = np.zeros(spec.shape)
        for i, (component, c) in enumerate(zip(self.components, mixing)):
            values = values + c * component.build(spec, split_seed(seed, i))
        if is_tensor(GridFunction(spec, values)):
            raise RecipeError(f"{self.describe()} produced a tensor weight")
        return values

    def describe(self) -> str:
        return "NonTensorMix(" + ",".join(c.describe() for c in self.components) + ")"


Recipe = Union[Constant, Tensor, PowerLike, RandomBoundedRatio, NonTensorMix]


def generate_weight(spec: GridSpec, recipe: Union[Recipe, Dict[str, Any]], seed: int = 0) -> Weight:
    """Build a weight from ``recipe``; deterministic in ``seed``.

    Raises:
        RecipeError: on invalid parameters or a max/min value ratio above
            ``MAX_VALUE_RATIO``.
    """
    if isinstance(recipe, dict):
        recipe = parse_recipe(recipe)
    values = np.asarray(recipe.build(spec, seed), dtype=float)
    if np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        raise RecipeError(f"{recipe.describe()} produced non-positive values")
    ratio = values.max() / values.min()
    if ratio > MAX_VALUE_RATIO:
        raise RecipeError(f"{recipe.describe()} has value ratio {ratio:.3g} > {MAX_VALUE_RATIO:g}")
    weight = Weight(GridFunction(spec, values), recipe.describe())
    logger.debug("generated %s on %s (seed=%d, ratio=%.3g)", weight.descriptor, spec, seed, ratio)
    return weight


def parse_recipe(data: Dict[str, Any]) -> Recipe:
    """Recipe from its JSON form, e.g. ``{"recipe": "RandomBoundedRatio", "rho": 4}``."""
    if not isinstance(data, dict) or "recipe" not in data:
        raise RecipeError(f"recipe must be an object with a 'recipe' field, got {data!r}")
    name = data["recipe"]
    try:
        if name == "Constant":
            return Constant(float(data.get("c", 1.0)))
        if name == "PowerLike":
            return PowerLike(tuple(data["exponents"]), float(data.get("eps", 0.05)))
        if name == "RandomBoundedRatio":
            return RandomBoundedRatio(float(data["rho"]), data.get("seed"))
        if name == "Tensor":
            return Tensor(tuple(parse_recipe(f) for f in data["factors"]))
        if name == "NonTensorMix":
            mixing = data.get("mixing")
            return NonTensorMix(
                tuple(parse_recipe(c) for c in data["components"]),
                tuple(mixing) if mixing is not None else None,
            )
    except KeyError as e:
        raise RecipeError(f"recipe {name} is missing field {e.args[0]!r}")
    raise RecipeError(f"unknown recipe {name!r}")


# ==================== Bloom weights ====================

@dataclass(frozen=True)
class BloomWeight:
    """``nu = mu^{1/p} lambda^{-1/p}`` together with its ingredients."""
    mu: Weight
    lam: Weight
    p: float
    nu: Weight = field(compare=False)

    def __post_init__(self):
        _check_p(self.p)
        expected = self.mu.values ** (1.0 / self.p) * self.lam.values ** (-1.0 / self.p)
        if not np.allclose(self.nu.values, expected, rtol=BLOOM_TOLERANCE, atol=0.0):
            raise RecipeError("Bloom weight does not match mu^{1/p} lambda^{-1/p}")


def bloom_nu(mu: WeightLike, lam: WeightLike, p: float) -> BloomWeight:
    p = _check_p(p)
    mu = mu if isinstance(mu, Weight) else Weight(_function(mu))
    lam = lam if isinstance(lam, Weight) else Weight(_function(lam))
    if mu.spec != lam.spec:
        raise SpecMismatchError(f"mu lives on {mu.spec}, lambda on {lam.spec}")
    nu = GridFunction(mu.spec, mu.values ** (1.0 / p) * lam.values ** (-1.0 / p))
    return BloomWeight(mu, lam, p, Weight(nu, f"bloom({mu.descriptor},{lam.descriptor},p={p:g})"))
