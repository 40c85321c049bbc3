#!/usr/bin/env python3
# file: dyadicbloom/test_haar.py
# Description: Tests for Haar functions, martingale operators and the separable transform.
# License: MIT

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from dyadicbloom.exceptions import GridError, ScaleError, SpecMismatchError
from dyadicbloom.haar import (
    HaarCoefficients,
    HaarIndex,
    cancellative_projection,
    forward_transform,
    haar_coefficient,
    haar_function,
    inverse_transform,
    martingale_avg,
    martingale_block,
    martingale_diff,
    partial_coefficient,
    synthesize,
)
from dyadicbloom.lattice import DyadicInterval, DyadicRectangle, GridFunction, GridSpec, enumerate_rectangles
from dyadicbloom.maximal_square import lp_norm


def _brute_haar(interval: DyadicInterval, depth: int) -> np.ndarray:
    """``|I|^{-1/2} (1_left - 1_right)`` sampled cell by cell."""
    x = (np.arange(2 ** depth) + 0.5) * 2.0 ** -depth
    left = (interval.start <= x) & (x < interval.start + interval.length / 2)
    right = (interval.start + interval.length / 2 <= x) & (x < interval.end)
    return (left.astype(float) - right.astype(float)) / np.sqrt(interval.length)


def test_haar_function_profile():
    interval = DyadicInterval(1, 1)
    h = haar_function(interval, depth=3)
    assert_allclose(h.values, _brute_haar(interval, 3))
    assert lp_norm(h, 2.0) == pytest.approx(1.0)
    assert h.integral() == pytest.approx(0.0)


def test_haar_function_averaging_profile():
    h0 = haar_function(DyadicInterval(2, 1), cancellative=False, depth=2)
    assert_allclose(h0.values, [0.0, 2.0, 0.0, 0.0])


def test_no_cancellative_function_at_finest_scale():
    with pytest.raises(ScaleError):
        haar_function(DyadicInterval(3, 0), depth=3)


def test_haar_index_validation():
    assert HaarIndex.of(None, 2) == HaarIndex((1, 1))
    assert HaarIndex((1, 0)).cancellative_axes == (0,)
    with pytest.raises(GridError):
        HaarIndex((2,))
    with pytest.raises(SpecMismatchError):
        HaarIndex.of((1, 0), 3)


def test_synthesized_atoms_are_orthonormal():
    spec = GridSpec((2, 2))
    rectangles = [r for r in enumerate_rectangles(spec) if all(k < 2 for k in r.scales)]
    atoms = np.stack([synthesize(spec, r).values.ravel() for r in rectangles])
    gram = atoms @ atoms.T * spec.cell_volume
    assert_allclose(gram, np.eye(len(rectangles)), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_haar_coefficient_matches_cell_sum(seed):
    spec = GridSpec((3, 2))
    f = GridFunction.random(spec, seed)
    rectangle = DyadicRectangle.of((1, 0), (0, 0))
    brute = np.sum(f.values * np.multiply.outer(_brute_haar(rectangle.intervals[0], 3),
                                                _brute_haar(DyadicInterval(0, 0), 2))) * spec.cell_volume
    assert haar_coefficient(f, rectangle) == pytest.approx(brute, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([(4,), (3, 2), (2, 2, 2)]), st.integers(0, 2 ** 31 - 1))
def test_transform_round_trip_and_parseval(depths, seed):
    spec = GridSpec(depths)
    f = GridFunction.random(spec, seed)
    coefs = forward_transform(f)
    assert inverse_transform(coefs).allclose(f)
    assert coefs.energy() == pytest.approx(lp_norm(f, 2.0) ** 2, rel=1e-10)


def test_transform_agrees_with_direct_coefficients(plane, random_function):
    f = random_function(plane, 11)
    coefs = forward_transform(f)
    for rectangle in enumerate_rectangles(plane):
        if rectangle.scales[0] < 3 and rectangle.scales[1] < 2:
            assert coefs.get(rectangle) == pytest.approx(haar_coefficient(f, rectangle), abs=1e-12)
    root = DyadicRectangle.of((0, 0), (0, 0))
    assert coefs.get(root, (0, 0)) == pytest.approx(f.integral())
    with pytest.raises(GridError):
        coefs.get(DyadicRectangle.of((1, 0), (0, 0)), (0, 1))


def test_cancellative_table_layout(plane, random_function):
    f = random_function(plane, 5)
    table = forward_transform(f).cancellative()
    assert table.shape == plane.table_shape
    rectangle = DyadicRectangle.of((2, 3), (1, 1))
    assert table[rectangle.indices] == pytest.approx(haar_coefficient(f, rectangle))
    assert np.all(table[7:, :] == 0.0)


def test_coefficients_json_round_trip():
    spec = GridSpec((2, 1))
    coefs = forward_transform(GridFunction.random(spec, 2))
    again = HaarCoefficients.from_json(coefs.to_json())
    assert_allclose(again.values, coefs.values)


def test_martingale_differences_telescope(line, random_function):
    f = random_function(line, 8)
    total = martingale_avg(f, 0, DyadicInterval(0, 0))
    for k in range(3):
        for j in range(2 ** k):
            total = total + martingale_diff(f, 0, DyadicInterval(k, j))
    assert total.allclose(f)


def test_martingale_avg_is_slice_average(plane, random_function):
    f = random_function(plane, 9)
    interval = DyadicInterval(1, 0, 1)
    avg = martingale_avg(f, 1, interval)
    assert_allclose(avg.values[:, :2], np.repeat(f.values[:, :2].mean(axis=1, keepdims=True), 2, axis=1))
    assert_allclose(avg.values[:, 2:], 0.0)


def test_martingale_block_sums_descendants(cube, random_function):
    f = random_function(cube, 12)
    K = DyadicInterval(0, 0)
    block = martingale_block(f, 0, K, 1)
    expected = sum((martingale_diff(f, 0, J) for J in K.descendants(1)), GridFunction.zeros(cube))
    assert block.allclose(expected)
    assert martingale_block(f, 0, K, 3) == GridFunction.zeros(cube)
    with pytest.raises(ScaleError):
        martingale_block(f, 0, DyadicInterval(1, 0), 3)


def test_cancellative_projection_mean_zero(plane, random_function):
    f = random_function(plane, 4)
    g = cancellative_projection(f, (1,))
    assert_allclose(g.values.mean(axis=1), 0.0, atol=1e-12)
    h = cancellative_projection(f)
    assert_allclose(h.values.mean(axis=0), 0.0, atol=1e-12)
    assert_allclose(h.values.mean(axis=1), 0.0, atol=1e-12)


def test_partial_coefficient_on_one_axis(cube, random_function):
    f = random_function(cube, 6)
    I = DyadicInterval(1, 1, 0)
    partial = partial_coefficient(f, (0,), (I,))
    assert partial.spec == GridSpec((2, 2))
    expected = np.tensordot(_brute_haar(I, 3), f.values, axes=(0, 0)) * 2.0 ** -3
    assert_allclose(partial.values, expected, atol=1e-12)
    with pytest.raises(GridError):
        partial_coefficient(f, (0, 1, 2), (I, I, I))
