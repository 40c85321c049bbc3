#!/usr/bin/env python3
# file: dyadicbloom/test_paraproducts.py
# Description: Tests for linear, full and partial paraproducts and the auxiliary
# paraproduct expansion of products.
# License: MIT

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from dyadicbloom.bmo import CoefSequence, bmo_prod
from dyadicbloom.exceptions import GridError, NormalizationError, ScaleError, SymmetryError
from dyadicbloom.haar import haar_function, scale_average, scale_difference, synthesize
from dyadicbloom.lattice import DyadicInterval, DyadicRectangle, GridFunction, GridSpec
from dyadicbloom.maximal_square import lp_norm
from dyadicbloom.paraproducts import (
    FullParaproductSymmetry,
    PartialParaproductCoefs,
    Slot,
    aij,
    aij2,
    all_symmetries,
    block_inputs,
    case_one_majorant,
    coarse,
    coarse2,
    dual_sum,
    emit_block,
    full_paraproduct,
    full_paraproduct_bound_report,
    generate_partial_coefs,
    linear_paraproduct,
    operator_u,
    partial_paraproduct,
)


def _profile(interval: DyadicInterval, depth: int, cancellative: bool) -> np.ndarray:
    """``h_I`` or ``1_I/|I|`` on one axis."""
    if cancellative:
        return haar_function(interval, depth=depth).values
    out = np.zeros(2 ** depth)
    out[interval.cells(depth)] = 1.0 / interval.length
    return out


def _product(profiles):
    out = np.ones(())
    for p in profiles:
        out = np.multiply.outer(out, p)
    return out


def _brute_full(A: CoefSequence, f1: GridFunction, f2: GridFunction, sym: FullParaproductSymmetry) -> np.ndarray:
    spec = A.spec
    out = np.zeros(spec.shape)
    for rectangle, a in A.items():
        pieces = {}
        for slot in Slot:
            pieces[slot] = _product([
                _profile(i, n, s == slot) for i, n, s in zip(rectangle.intervals, spec.depths, sym.slots)
            ])
        x1 = np.sum(f1.values * pieces[Slot.F1]) * spec.cell_volume
        x2 = np.sum(f2.values * pieces[Slot.F2]) * spec.cell_volume
        out += a * x1 * x2 * pieces[Slot.OUTPUT]
    return out


def test_linear_paraproduct_matches_brute_force(plane, random_function):
    A = CoefSequence.random(plane, 6, seed=1)
    f = random_function(plane, 2)
    expected = np.zeros(plane.shape)
    for rectangle, a in A.items():
        expected += a * f.average(rectangle) * synthesize(plane, rectangle).values
    assert_allclose(linear_paraproduct(A, f).values, expected, atol=1e-12)


def test_symmetry_parsing():
    assert len(all_symmetries()) == 9
    assert FullParaproductSymmetry.parse("f1/output") == FullParaproductSymmetry.EQ_ONE
    assert str(FullParaproductSymmetry.CASE_TWO) == "F1/F2"
    with pytest.raises(SymmetryError):
        FullParaproductSymmetry.parse("F1")
    with pytest.raises(SymmetryError):
        FullParaproductSymmetry("F1", "F3")
    with pytest.raises(SymmetryError):
        full_paraproduct(CoefSequence.zeros(GridSpec((1, 1))), GridFunction.zeros(GridSpec((1, 1))),
                         GridFunction.zeros(GridSpec((1, 1))), 3)


@settings(max_examples=9, deadline=None)
@given(st.sampled_from(all_symmetries()), st.integers(0, 2 ** 31 - 1))
def test_full_paraproduct_matches_brute_force(sym, seed):
    spec = GridSpec((2, 2))
    A = CoefSequence.random(spec, 4, seed)
    f1 = GridFunction.random(spec, seed + 1)
    f2 = GridFunction.random(spec, seed + 2)
    assert_allclose(full_paraproduct(A, f1, f2, sym).values, _brute_full(A, f1, f2, sym), atol=1e-12)


def test_full_paraproduct_needs_two_parameters(cube):
    with pytest.raises(GridError):
        full_paraproduct(CoefSequence.zeros(cube), GridFunction.zeros(cube), GridFunction.zeros(cube))


def test_case_one_majorant_dominates(plane, random_function):
    A = CoefSequence.random(plane, 6, seed=3)
    f1 = random_function(plane, 4)
    f2 = GridFunction.constant(plane, 1.0)
    output = full_paraproduct(A, f1, f2, FullParaproductSymmetry.EQ_ONE)
    majorant = case_one_majorant(A, f1)
    assert lp_norm(output, 2.0) <= lp_norm(majorant, 2.0) + 1e-12


def test_dual_sum_bounds_pairing(plane, random_function):
    A = CoefSequence.random(plane, 6, seed=5)
    f1, f2, f3 = (random_function(plane, s) for s in (6, 7, 8))
    sym = FullParaproductSymmetry.CASE_TWO
    pairing = abs(np.sum(full_paraproduct(A, f1, f2, sym).values * f3.values) * plane.cell_volume)
    assert pairing <= dual_sum(A, f1, f2, None, sym, f3) + 1e-12


def test_bound_report(plane, random_weight):
    A = CoefSequence.random(plane, 5, seed=9)
    report = full_paraproduct_bound_report(A, random_weight(plane, 1), random_weight(plane, 2), 2.0, 4.0,
                                           samples=4, seed=3)
    assert report.r == pytest.approx(4.0 / 3.0)
    assert len(report.ratios) == 4 and report.sup > 0.0
    zero = full_paraproduct_bound_report(CoefSequence.zeros(plane), None, None, 2.0, 2.0, samples=2)
    assert zero.sup == 0.0


@pytest.mark.parametrize("axis", [0, 1])
def test_one_axis_expansion_of_product(plane, random_function, axis):
    b = random_function(plane, 10)
    f = random_function(plane, 11)
    total = aij(b, f, axis, 1) + aij(b, f, axis, 2) + aij(b, f, axis, 3) + coarse(b, f, axis)
    assert total.allclose(b * f)
    with pytest.raises(GridError):
        aij(b, f, axis, 4)


def test_two_axis_expansion_of_product(cube, random_function):
    b = random_function(cube, 12)
    f = random_function(cube, 13)
    total = coarse2(b, f, 0, 2)
    for j1 in (1, 2, 3):
        for j2 in (1, 2, 3):
            total = total + aij2(b, f, (0, j1), (2, j2))
    assert total.allclose(b * f)
    with pytest.raises(GridError):
        aij2(b, f, (1, 1), (1, 2))


def test_aij2_is_composition(plane, random_function):
    b = random_function(plane, 14)
    f = random_function(plane, 15)
    brute = np.zeros(plane.shape)
    for k1 in range(plane.depths[0]):
        for k2 in range(plane.depths[1]):
            # kind 2 on axis 0 and kind 1 on axis 1
            db = scale_difference(scale_difference(b.values, plane, 1, k2), plane, 0, k1)
            ef = scale_average(scale_difference(f.values, plane, 1, k2), plane, 0, k1)
            brute += db * ef
    assert_allclose(aij2(b, f, (0, 2), (1, 1)).values, brute, atol=1e-12)


def _partial_brute(C: PartialParaproductCoefs, f: GridFunction) -> np.ndarray:
    spec = C.spec
    n1, n2, n3 = spec.depths
    out = np.zeros(spec.shape)
    for (K1, I1, J1), coefs in C.items():
        for rectangle, a in coefs.items():
            K2 = DyadicInterval(rectangle.intervals[0].scale, rectangle.intervals[0].position, 1)
            K3 = DyadicInterval(rectangle.intervals[1].scale, rectangle.intervals[1].position, 2)
            test = _product([_profile(I1, n1, True), _profile(K2, n2, True), _profile(K3, n3, False)])
            emit = _product([_profile(J1, n1, True), _profile(K2, n2, False), _profile(K3, n3, True)])
            out += a * np.sum(f.values * test) * spec.cell_volume * emit
    return out


def test_partial_paraproduct_matches_brute_force(cube, random_function):
    C = generate_partial_coefs(cube, 1, 0, 3, seed=2)
    f = random_function(cube, 16)
    assert len(C) > 0
    assert_allclose(partial_paraproduct(C, f).values, _partial_brute(C, f), atol=1e-12)


def test_generated_coefficients_are_normalised(cube):
    C = generate_partial_coefs(cube, 1, 1, 4, seed=7)
    C.check_normalization()
    for (K1, I1, J1), coefs in C.items():
        assert I1.ancestor(1) == K1 and J1.ancestor(1) == K1
        assert bmo_prod(coefs, 2.0).value <= C.bound(K1, I1, J1) * (1 + 1e-9)
    with pytest.raises(NormalizationError):
        C.scaled(3.0).check_normalization()


def test_partial_coefficient_validation(cube):
    inner = GridSpec(cube.depths[1:])
    K1 = DyadicInterval(0, 0)
    I1 = DyadicInterval(1, 1)
    coefs = CoefSequence.random(inner, 2, seed=1)
    with pytest.raises(GridError):
        PartialParaproductCoefs(cube, 1, 1, {(K1, I1, DyadicInterval(2, 3)): coefs})
    with pytest.raises(ScaleError):
        PartialParaproductCoefs(cube, 3, 0, {})
    with pytest.raises(GridError):
        PartialParaproductCoefs(GridSpec((2, 2)), 0, 0, {})
    C = PartialParaproductCoefs(cube, 1, 1, {(K1, I1, DyadicInterval(1, 0)): coefs})
    again = PartialParaproductCoefs.from_json(C.to_json())
    assert list(again.blocks) == list(C.blocks)


def test_operator_u_on_tensor_atom():
    spec = GridSpec((2, 2, 2))
    V1, K2, V3 = DyadicInterval(0, 0, 0), DyadicInterval(1, 1, 1), DyadicInterval(1, 0, 2)
    g = synthesize(spec, DyadicRectangle((V1, K2, V3)))
    expected = _product([
        _profile(V1, 2, True),
        _profile(K2, 2, False) * np.sqrt(K2.length),
        _profile(V3, 2, True),
    ])
    assert_allclose(operator_u(g).values, expected, atol=1e-12)
    with pytest.raises(GridError):
        operator_u(GridFunction.zeros(GridSpec((2, 2))))


@settings(max_examples=9, deadline=None)
@given(st.sampled_from(all_symmetries()), st.integers(0, 2 ** 31 - 1), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_full_paraproduct_is_trilinear(sym, seed, s, t):
    spec = GridSpec((2, 3))
    A, B = CoefSequence.random(spec, 4, seed), CoefSequence.random(spec, 3, seed + 1)
    f1, g1, f2, g2 = (GridFunction.random(spec, seed + k) for k in range(2, 6))
    base = full_paraproduct(A, f1, f2, sym).values
    assert_allclose(full_paraproduct(A, s * f1 + t * g1, f2, sym).values,
                    s * base + t * full_paraproduct(A, g1, f2, sym).values, atol=1e-10)
    assert_allclose(full_paraproduct(A, f1, s * f2 + t * g2, sym).values,
                    s * base + t * full_paraproduct(A, f1, g2, sym).values, atol=1e-10)
    assert_allclose(full_paraproduct(A.scaled(s) + B.scaled(t), f1, f2, sym).values,
                    s * base + t * full_paraproduct(B, f1, f2, sym).values, atol=1e-10)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-4.0, 4.0))
def test_scaling_coefficients_scales_the_norm(seed, c):
    spec = GridSpec((3, 2, 2))
    C = generate_partial_coefs(spec, 1, 0, 3, seed=seed)
    f = GridFunction.random(spec, seed + 1)
    norm = lp_norm(partial_paraproduct(C, f), 2.0)
    assert lp_norm(partial_paraproduct(C.scaled(c), f), 2.0) == pytest.approx(abs(c) * norm, rel=1e-10, abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.data())
def test_single_block_matches_direct_assembly(data):
    spec = GridSpec((3, 2, 2))
    k1 = data.draw(st.integers(0, 2))
    K1 = DyadicInterval(k1, data.draw(st.integers(0, 2 ** k1 - 1)), 0)
    k2, k3 = data.draw(st.integers(0, 1)), data.draw(st.integers(0, 1))
    K2 = DyadicInterval(k2, data.draw(st.integers(0, 2 ** k2 - 1)), 0)
    K3 = DyadicInterval(k3, data.draw(st.integers(0, 2 ** k3 - 1)), 1)
    a = data.draw(st.floats(-2.0, 2.0))
    f = GridFunction.random(spec, data.draw(st.integers(0, 10 ** 6)))
    inner = CoefSequence.from_mapping(spec.axis_spec((1, 2)), {DyadicRectangle((K2, K3)): a})
    C = PartialParaproductCoefs(spec, 0, 0, {(K1, K1, K1): inner})
    test = _product([_profile(K1, 3, True), _profile(K2, 2, True), _profile(K3, 2, False)])
    emit = _product([_profile(K1, 3, True), _profile(K2, 2, False), _profile(K3, 2, True)])
    expected = a * np.sum(f.values * test) * spec.cell_volume * emit
    assert_allclose(partial_paraproduct(C, f).values, expected, atol=1e-12)


def test_block_helpers(cube, random_function):
    f = random_function(cube, 4)
    I1 = DyadicInterval(1, 1, 0)
    g, F = block_inputs(f.values, cube, I1)
    assert_allclose(g, np.tensordot(_profile(I1, 3, True), f.values, axes=(0, 0)) / 8.0, atol=1e-12)
    K2, K3 = DyadicInterval(0, 0, 1), DyadicInterval(1, 1, 2)
    pairing = np.sum(g * np.outer(_profile(K2, 2, True), _profile(K3, 2, False))) / 16.0
    assert F[K2.index, K3.index] == pytest.approx(pairing, abs=1e-12)
    c = np.zeros_like(F)
    c[K2.index, K3.index] = 1.0
    assert_allclose(emit_block(c, cube), np.outer(_profile(K2, 2, False), _profile(K3, 2, True)), atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-5.0, 5.0))
def test_operator_u_is_absolutely_homogeneous(seed, c):
    spec = GridSpec((2, 2, 2))
    g = GridFunction.random(spec, seed)
    assert_allclose(operator_u(c * g).values, abs(c) * operator_u(g).values, atol=1e-10)
