import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coherent_oga.dictionary import gen_identity_hadamard
from coherent_oga.linalg import ProjectionError, cholesky, gram_matrix, inner, project_onto_span, solve_spd
from oracles import gauss_solve


def test_inner_examples():
    e = np.eye(4)
    assert inner(e[0], e[0]) == 1.0
    assert inner(e[0], e[1]) == 0.0
    assert inner([1, 2, 3], [4, 5, 6]) == 32.0


def test_inner_dimension_mismatch():
    with pytest.raises(ValueError):
        inner([1, 2], [1, 2, 3])


def test_project_axis():
    p, r, c = project_onto_span([[1.0, 0.0]], [3.0, 4.0])
    np.testing.assert_array_equal(p, [3, 0])
    np.testing.assert_array_equal(r, [0, 4])
    np.testing.assert_array_equal(c, [3])


def test_project_full_basis_leaves_nothing():
    rng = np.random.default_rng(1)
    q, _ = np.linalg.qr(rng.standard_normal((7, 7)))
    v = rng.standard_normal(7)
    _, r, _ = project_onto_span(q.T, v)
    assert np.linalg.norm(r) < 1e-12


def test_project_one_atom_closed_form():
    h = np.array([1.0, 1.0]) / math.sqrt(2)
    _, r, c = project_onto_span([h], [1.0, 0.0])
    assert c[0] == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert np.linalg.norm(r) == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_project_empty_span():
    p, r, c = project_onto_span([], np.array([1.0, 2.0]))
    assert not p.any() and c.size == 0
    np.testing.assert_array_equal(r, [1, 2])


def test_solve_spd_examples():
    r = np.array([0.3, -1.0, 2.0])
    np.testing.assert_array_equal(solve_spd(np.eye(3), r), r)
    np.testing.assert_allclose(solve_spd([[1, 0.5], [0.5, 1]], [1, 0]), [4 / 3, -2 / 3], rtol=0, atol=1e-15)


def test_solve_spd_hadamard_union_gram():
    d = gen_identity_hadamard(4)
    g = d.gram([0, 3, 20])
    rhs = np.array([1.0, -2.0, 0.5])
    np.testing.assert_allclose(solve_spd(g, rhs), gauss_solve(g, rhs), rtol=0, atol=1e-12)


def test_dependent_atoms_report_pivot():
    with pytest.raises(ProjectionError) as exc:
        project_onto_span([[1.0, 0.0], [2.0, 0.0]], [1.0, 1.0])
    assert exc.value.n_atoms == 2 and exc.value.pivot_index == 1


def test_gram_matrix_symmetric():
    rng = np.random.default_rng(3)
    g = gram_matrix(rng.standard_normal((5, 9)))
    assert np.array_equal(g, g.T)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 40), seed=st.integers(0, 2**32 - 1))
def test_solve_spd_matches_elimination(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    g = a @ a.T + n * np.eye(n)
    rhs = rng.standard_normal(n)
    x = solve_spd(g, rhs)
    ref = gauss_solve(g, rhs)
    assert np.linalg.norm(x - ref) <= 1e-10 * np.linalg.norm(ref)
    assert np.linalg.norm(g @ x - rhs) <= 1e-12 * np.linalg.norm(g) * np.linalg.norm(x) * n


@settings(max_examples=80, deadline=None)
@given(dim=st.integers(2, 40), frac=st.floats(0.05, 0.5), seed=st.integers(0, 2**32 - 1))
def test_projection_properties(dim, frac, seed):
    rng = np.random.default_rng(seed)
    n = max(1, int(frac * dim))
    atoms = rng.standard_normal((n, dim))
    atoms /= np.linalg.norm(atoms, axis=1, keepdims=True)
    v = rng.standard_normal(dim)
    vn = np.linalg.norm(v)
    p, r, c = project_onto_span(atoms, v)
    np.testing.assert_allclose(p + r, v, rtol=0, atol=1e-14 * vn * dim)
    np.testing.assert_allclose(c @ atoms, p, rtol=0, atol=1e-14 * vn * dim)
    p2, _, _ = project_onto_span(atoms, p)
    assert np.linalg.norm(p2 - p) <= 1e-12 * vn
    assert abs(vn ** 2 - p @ p - r @ r) <= 1e-10 * vn ** 2
    assert np.max(np.abs(atoms @ r)) <= 1e-10 * vn


def test_cholesky_rejects_indefinite():
    with pytest.raises(ProjectionError):
        cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))
