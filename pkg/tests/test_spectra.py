import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import harmonic_poly_count, sphere_levels, torus_levels
from slconifold.errors import InvalidInputError
from slconifold.spectra import (
    Explicit,
    FlatTorus,
    LinkDescriptor,
    RoundSphere,
    Spectrum,
    harmonic_dim,
    resolve_link,
    sphere_spectrum,
    torus_spectrum,
)


def test_sphere_constants_only():
    assert sphere_spectrum(2, 0).as_dict() == {0.0: 1}


def test_sphere_s2_and_s3():
    assert sphere_spectrum(2, 7).as_dict() == {0.0: 1, 2.0: 3, 6.0: 5}
    assert sphere_spectrum(3, 9).as_dict() == {0.0: 1, 3.0: 4, 8.0: 9}


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_sphere_multiplicities_match_polynomial_oracle(d):
    assert sphere_spectrum(d, 40).as_dict() == sphere_levels(d, 40)


@pytest.mark.parametrize("d,k", [(2, 0), (2, 1), (2, 5), (3, 4), (6, 3)])
def test_harmonic_dim_formula(d, k):
    assert harmonic_dim(d, k) == harmonic_poly_count(d + 1, k)


def test_sphere_rejects_small_dim():
    with pytest.raises(InvalidInputError):
        sphere_spectrum(1, 3)


def test_square_torus():
    B = 2 * math.pi * np.eye(2)
    ent = torus_spectrum(B, 4).entries
    assert [k for _, k in ent] == [1, 4, 4, 4]
    assert [e for e, _ in ent] == pytest.approx([0, 1, 2, 4], rel=1e-12)
    assert torus_spectrum(B, 0).as_dict() == {0.0: 1}


def test_singular_basis():
    with pytest.raises(InvalidInputError):
        torus_spectrum([[1, 2], [2, 4]], 5)


def _same(a, b):
    return len(a) == len(b) and all(
        k1 == k2 and math.isclose(e1, e2, rel_tol=1e-9, abs_tol=1e-12)
        for (e1, k1), (e2, k2) in zip(a, b)
    )


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-2, 2), min_size=4, max_size=4),
    st.floats(1, 60),
)
def test_torus_matches_exhaustive_enumeration(flat, cutoff):
    B = np.array(flat).reshape(2, 2) + 2 * np.eye(2)
    if np.linalg.cond(B) > 30:
        return
    assert _same(torus_spectrum(B, cutoff).entries, torus_levels(B, cutoff))


def test_torus_three_dim_oracle():
    B = np.array([[1.0, 0.2, 0.0], [0.0, 1.3, 0.4], [0.1, 0.0, 0.9]])
    assert _same(torus_spectrum(B, 120).entries, torus_levels(B, 120))


@settings(max_examples=30, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3))
def test_torus_invariant_under_unimodular_change(a, b):
    B = np.array([[1.0, 0.3], [0.2, 1.4]])
    U = np.array([[1, a], [0, 1]]) @ np.array([[1, 0], [b, 1]])
    assert _same(torus_spectrum(B, 80).entries, torus_spectrum(U @ B, 80).entries)


def test_torus_scaling():
    B = np.array([[1.0, 0.3], [0.2, 1.4]])
    small = torus_spectrum(B, 40).entries
    big = torus_spectrum(2 * B, 10).entries
    assert _same([(e / 4, k) for e, k in small if e / 4 <= 10], big)


@pytest.mark.parametrize(
    "entries,cutoff",
    [
        (((0.0, 1), (2.0, 0)), 3),
        (((0.0, 1), (2.0, 1), (1.0, 1)), 3),
        (((0.0, 1), (5.0, 1)), 3),
        (((1.0, 1),), 3),
        (((0.0, 1), (-1.0, 1)), 3),
    ],
)
def test_spectrum_invariants(entries, cutoff):
    with pytest.raises(InvalidInputError):
        Spectrum(entries, cutoff)


def test_truncate_and_insert():
    s = Spectrum.from_mapping({0: 1, 2: 3, 6: 5}, cutoff=7)
    assert s.truncate(3).as_dict() == {0.0: 1, 2.0: 3}
    assert s.truncate(3).cutoff == 3
    assert s.with_eigenvalue(2.0).multiplicity(2.0) == 4
    assert s.with_eigenvalue(1.0).multiplicity(1.0) == 1


def test_resolve_link_dispatch():
    assert resolve_link(LinkDescriptor(RoundSphere(2)), 7, m=3).as_dict() == {0.0: 1, 2.0: 3, 6.0: 5}
    t = resolve_link(LinkDescriptor(FlatTorus(((2 * math.pi, 0), (0, 2 * math.pi)))), 1, m=3)
    assert [k for _, k in t.entries] == [1, 4]
    e = resolve_link(LinkDescriptor(Explicit(Spectrum.from_mapping({0: 1, 2: 6, 6: 6}, 7))), 3)
    assert e.cutoff == 3 and e.as_dict() == {0.0: 1, 2.0: 6}


def test_resolve_link_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        resolve_link(LinkDescriptor(RoundSphere(3)), 5, m=3)
    with pytest.raises(InvalidInputError):
        LinkDescriptor(RoundSphere(2), b0=2)
