import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epitome.coda import (
    AllZero,
    ClrVector,
    Composition,
    DimensionMismatch,
    EmptyVector,
    NonPositivePart,
    NotCentered,
    aitchison_distance,
    aitchison_distance_logratio,
    closure,
    clr,
    clr_inverse,
    euclidean_distance,
    geometric_mean,
    perturbation,
    zero_replace,
)

LN2 = math.log(2)


@st.composite
def raw_vectors(draw, D=None):
    D = D or draw(st.integers(min_value=2, max_value=21))
    return np.array(draw(st.lists(st.floats(1e-3, 1e3), min_size=D, max_size=D)))


@st.composite
def composition_pairs(draw, n=2):
    D = draw(st.integers(min_value=2, max_value=21))
    k = draw(st.sampled_from([1.0, 100.0]))
    return [closure(draw(raw_vectors(D)), k) for _ in range(n)]


# -- closure ---------------------------------------------------------------------


def test_closure_examples():
    np.testing.assert_allclose(closure([1, 1, 1, 1], 100).parts, [25, 25, 25, 25])
    np.testing.assert_allclose(closure([2, 2], 1).parts, [0.5, 0.5])
    np.testing.assert_allclose(closure([3, 1], 100).parts, [75, 25])


@pytest.mark.parametrize("bad", [[1, 0, 2], [1, -1], [0, 0]])
def test_closure_rejects_nonpositive(bad):
    with pytest.raises(NonPositivePart):
        closure(bad, 1)


@pytest.mark.parametrize("short", [[], [1.0]])
def test_closure_rejects_short(short):
    with pytest.raises(EmptyVector):
        closure(short, 1)


def test_composition_invariants():
    with pytest.raises(ValueError):
        Composition(np.array([0.5, 0.6]), 1.0)
    with pytest.raises(NonPositivePart):
        Composition(np.array([1.0, 0.0]), 1.0)
    c = closure([1, 2, 3], 6)
    with pytest.raises(ValueError):
        c.parts[0] = 5


# -- zero replacement --------------------------------------------------------------


def test_zero_replace_examples():
    np.testing.assert_allclose(zero_replace([1, 0, 1], 0.01), [0.995, 0.01, 0.995])
    np.testing.assert_array_equal(zero_replace([5, 5], 0.01), [5, 5])


def test_zero_replace_all_zero():
    with pytest.raises(AllZero):
        zero_replace([0, 0, 0], 0.01)


def test_zero_replace_rejects_huge_delta():
    with pytest.raises(ValueError):
        zero_replace([1, 0, 0], 1.0)


@given(
    st.lists(st.one_of(st.just(0.0), st.floats(1e-2, 1e3)), min_size=2, max_size=21).filter(lambda v: any(v)),
    st.floats(1e-6, 1e-3),
)
def test_zero_replace_keeps_sum_and_positivity(v, delta):
    v = np.array(v)
    out = zero_replace(v, delta)
    assert np.all(out > 0)
    assert out.sum() == pytest.approx(v.sum(), rel=1e-9)


# -- geometric mean and clr ----------------------------------------------------------


def test_geometric_mean_examples():
    assert geometric_mean(closure([1, 1, 1, 1], 100)) == pytest.approx(25, rel=1e-12)
    assert geometric_mean(closure([0.8, 0.2], 1)) == pytest.approx(0.4, rel=1e-12)
    assert geometric_mean(closure([75, 25], 100)) == pytest.approx(math.sqrt(1875), rel=1e-12)


def test_clr_examples():
    np.testing.assert_allclose(clr(closure([25, 25, 25, 25], 100)).coords, 0, atol=1e-12)
    np.testing.assert_allclose(clr(closure([0.8, 0.2], 1)).coords, [LN2, -LN2], atol=1e-12)


@given(raw_vectors(), st.floats(1e-3, 1e3))
def test_clr_scale_invariant(v, c):
    a = clr(closure(c * v, 100)).coords
    b = clr(closure(v, 100)).coords
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_clr_inverse_examples():
    np.testing.assert_allclose(clr_inverse(ClrVector(np.zeros(3)), 1).parts, [1 / 3] * 3, rtol=1e-12)
    np.testing.assert_allclose(clr_inverse(ClrVector(np.array([LN2, -LN2])), 1).parts, [0.8, 0.2], rtol=1e-12)


def test_clr_inverse_not_centered():
    with pytest.raises(NotCentered):
        clr_inverse(np.array([1.0, 1.0, 1.0]), 1)


@given(raw_vectors(), st.sampled_from([1.0, 100.0]))
def test_clr_round_trip(v, k):
    x = closure(v, k)
    z = clr(x)
    assert abs(z.coords.sum()) <= 1e-9 * x.D
    back = clr_inverse(z, k)
    np.testing.assert_allclose(back.parts, x.parts, rtol=1e-9)
    np.testing.assert_allclose(clr(back).coords, z.coords, atol=1e-9)


# -- distances ------------------------------------------------------------------------


def test_aitchison_examples():
    x = closure([0.8, 0.2], 1)
    assert aitchison_distance(x, x) == 0.0
    assert aitchison_distance(x, closure([0.5, 0.5], 1)) == pytest.approx(math.sqrt(2) * LN2, abs=1e-12)


def test_aitchison_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        aitchison_distance(closure([1, 2], 1), closure([1, 2, 3], 1))


@settings(max_examples=200)
@given(composition_pairs(3))
def test_metric_axioms(xyz):
    x, y, z = xyz
    dxy = aitchison_distance(x, y)
    assert dxy == aitchison_distance(y, x)
    assert dxy >= 0
    assert aitchison_distance(x, x) == 0
    assert aitchison_distance(x, z) <= dxy + aitchison_distance(y, z) + 1e-9


@given(composition_pairs(2))
def test_logratio_form_agrees(xy):
    x, y = xy
    assert aitchison_distance_logratio(x, y) == pytest.approx(aitchison_distance(x, y), abs=1e-10)


@given(composition_pairs(2))
def test_closure_constant_invariance(xy):
    x, y = xy
    a = aitchison_distance(closure(x.parts, 1), closure(y.parts, 1))
    b = aitchison_distance(closure(x.parts, 100), closure(y.parts, 100))
    assert a == pytest.approx(b, abs=1e-10)


def test_mixed_closure_constants():
    x = closure([3, 1, 2], 1)
    y = closure([1, 1, 5], 100)
    assert aitchison_distance(x, y) == pytest.approx(aitchison_distance(x, closure(y.parts, 1)), abs=1e-12)


def test_euclidean_examples():
    x = closure([75, 25], 100)
    assert euclidean_distance(x, x) == 0
    assert euclidean_distance(x, closure([25, 75], 100)) == pytest.approx(math.sqrt(50**2 + 50**2), rel=1e-12)
    # shares are compared, not raw parts
    assert euclidean_distance(closure([3, 1], 1), closure([1, 3], 100)) == pytest.approx(70.7106781, rel=1e-7)


def test_perturbation_examples():
    x = closure([0.8, 0.2], 1)
    np.testing.assert_allclose(perturbation(closure([0.5, 0.5], 1), x).parts, [0.8, 0.2], rtol=1e-12)
    y = closure([1, 2, 3, 4], 100)
    np.testing.assert_allclose(perturbation(closure([1, 1, 1, 1], 1), y).parts, y.parts, rtol=1e-12)
    assert perturbation(closure([1, 1, 1, 1], 1), y).k == 100


@given(composition_pairs(3))
def test_perturbation_isometry_and_euclidean_contrast(pxy):
    p, x, y = pxy
    assert aitchison_distance(perturbation(p, x), perturbation(p, y)) == pytest.approx(
        aitchison_distance(x, y), abs=1e-9
    )


def test_euclidean_not_perturbation_invariant():
    p = closure([10, 1, 1], 1)
    x, y = closure([1, 2, 3], 1), closure([3, 2, 1], 1)
    before, after = euclidean_distance(x, y), euclidean_distance(perturbation(p, x), perturbation(p, y))
    assert abs(before - after) > 1.0
    assert aitchison_distance(perturbation(p, x), perturbation(p, y)) == pytest.approx(aitchison_distance(x, y))
