import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coherent_oga.dictionary import build_dictionary, gen_identity_hadamard, gen_orthonormal, gen_random_spherical
from coherent_oga.oga import BELOW_TOL, COMPLETED, max_correlation, run_oga, write_trace_csv, x_table_path
from oracles import reference_oga


def _algebra(d, trace):
    """Worst expansion-delta and selected-atom orthogonality errors relative to ||f_0||."""
    f0 = trace.residual_norms[0]
    delta = orth = 0.0
    for n in range(1, trace.n_steps + 1):
        g = d.atoms[trace.selected[:n]]
        step = trace.residuals[n - 1] - trace.residuals[n] - trace.x[n - 1, :n] @ g
        delta = max(delta, np.linalg.norm(step) / f0)
        orth = max(orth, np.max(np.abs(g @ trace.residuals[n])) / f0)
    return delta, orth


def test_orthonormal_example():
    d = gen_orthonormal(3)
    t = run_oga(d, [2.0, 1.0, 0.0], 2)
    assert list(t.selected) == [0, 1]
    np.testing.assert_allclose(t.d, [2, 1], rtol=0, atol=1e-15)
    np.testing.assert_allclose(t.residual_norms, [math.sqrt(5), 1, 0], rtol=0, atol=1e-15)
    assert t.stop_reason == COMPLETED


def test_single_atom_signal_stops():
    d = gen_identity_hadamard(2)
    t = run_oga(d, d.atoms[5], 3)
    assert t.n_steps == 1 and t.d[0] == pytest.approx(1.0, abs=1e-15)
    assert t.residual_norms[1] <= 1e-15
    assert t.stop_reason == BELOW_TOL


def test_hand_simulation_k2():
    d = gen_identity_hadamard(2)
    f = d.atoms[0] + 0.3 * d.atoms[5]
    t = run_oga(d, f, 4)
    sel, ds, norms = reference_oga(d.atoms, f, t.n_steps)
    assert t.d[0] == pytest.approx(np.max(np.abs(d.atoms @ f)), abs=1e-15)
    assert list(t.selected) == sel
    np.testing.assert_allclose(t.d, ds, rtol=0, atol=1e-12)
    np.testing.assert_allclose(t.residual_norms, norms, rtol=0, atol=1e-12)


def test_max_correlation_examples():
    d = gen_orthonormal(10)
    assert max_correlation(d, d.atoms[0]) == (0, 1.0)
    assert max_correlation(d, np.zeros(10)) == (0, 0.0)
    v = 0.6 * d.atoms[3] + 0.5 * d.atoms[7]
    idx, val = max_correlation(d, v)
    assert idx == 3 and val == pytest.approx(0.6, abs=1e-15)


def test_tie_breaks_to_lowest_index():
    d = gen_orthonormal(4)
    assert max_correlation(d, [0.0, -1.0, 1.0, 0.0])[0] == 1


def test_argument_errors():
    d = gen_orthonormal(4)
    with pytest.raises(ValueError):
        run_oga(d, np.ones(3), 1)
    with pytest.raises(ValueError):
        run_oga(d, np.ones(4), 5)
    with pytest.raises(ValueError):
        run_oga(d, np.ones(4), 0)
    with pytest.raises(ValueError):
        run_oga(d, np.ones(4), 1, stop_tol=-1.0)


@settings(max_examples=60, deadline=None)
@given(dim=st.integers(4, 30), extra=st.integers(0, 30), seed=st.integers(0, 10_000), steps_frac=st.floats(0.1, 0.6))
def test_trace_invariants(dim, extra, seed, steps_frac):
    d = gen_random_spherical(dim, dim + extra, seed=seed)
    f = np.random.default_rng(seed).standard_normal(dim)
    steps = max(1, int(steps_frac * dim))
    t = run_oga(d, f, steps)
    k = t.n_steps
    assert len(set(t.selected.tolist())) == k
    assert np.all(np.diff(t.residual_norms) <= 1e-12 * t.residual_norms[0])
    delta, orth = _algebra(d, t)
    assert delta <= 1e-8 and orth <= 1e-10
    for n in range(1, k + 1):
        corr = np.abs(d.atoms @ t.residuals[n - 1])
        assert abs(t.d[n - 1]) >= corr.max() * (1 - 1e-15)
        gn = t.coeffs_per_step[n] @ d.atoms[t.selected[:n]]
        gp = t.coeffs_per_step[n - 1] @ d.atoms[t.selected[: n - 1]] if n > 1 else 0 * gn
        lhs = t.residual_norms[n - 1] ** 2 - t.residual_norms[n] ** 2
        assert lhs == pytest.approx(np.linalg.norm(gn - gp) ** 2, rel=1e-8, abs=1e-14 * t.residual_norms[0] ** 2)
    assert np.all(np.triu(t.x, 1) == 0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), m=st.integers(1, 6))
def test_orthonormal_exactness(seed, m):
    d = gen_orthonormal(12, seed=seed)
    f = np.random.default_rng(seed).standard_normal(12)
    t = run_oga(d, f, m)
    sigma = math.sqrt(np.sort((d.atoms @ f) ** 2)[: 12 - m].sum())
    assert abs(t.residual_norms[-1] - sigma) <= 1e-10


def test_matches_reference_on_union(union6):
    rng = np.random.default_rng(5)
    for _ in range(10):
        f = rng.standard_normal(64)
        t = run_oga(union6, f, 8)
        sel, ds, norms = reference_oga(union6.atoms, f, 8)
        assert list(t.selected) == sel
        np.testing.assert_allclose(t.residual_norms, norms, rtol=0, atol=1e-12 * norms[0])


def test_full_span_leaves_zero_residual():
    d = build_dictionary([[1.0, 0.0], [0.6, 0.8], [0.0, 1.0]])
    t = run_oga(d, [0.3, 0.9], 2)
    assert t.n_steps == 2 and t.residual_norms[-1] < 1e-14


def test_trace_csv(tmp_path):
    d = gen_identity_hadamard(3)
    t = run_oga(d, np.arange(1.0, 9.0), 3)
    path = tmp_path / "trace.csv"
    xpath = write_trace_csv(t, path)
    assert xpath == x_table_path(path) == tmp_path / "trace_x.csv"
    rows = list(csv.DictReader(path.open()))
    assert [int(r["selected_index"]) for r in rows] == t.selected.tolist()
    assert [float(r["d_n"]) for r in rows] == t.d.tolist()
    assert [float(r["residual_norm"]) for r in rows] == t.residual_norms[1:].tolist()
    xs = list(csv.DictReader(xpath.open()))
    assert len(xs) == 6
    for r in xs:
        assert float(r["x"]) == t.x_entry(int(r["i"]), int(r["n"]))


def test_trace_is_immutable():
    t = run_oga(gen_orthonormal(3), [1.0, 2.0, 3.0], 1)
    with pytest.raises(AttributeError):
        t.stop_reason = "other"
