"""Built-in self checks: checker falsifiability, oracle agreement, projection properties."""

import dataclasses
import itertools

import numpy as np

from ._rng import make_rng
from .analysis import check_lemma_suite, classify, diagnostics
from .dictionary import gen_identity_hadamard, gen_orthonormal, gen_random_spherical
from .linalg import project_onto_span
from .oga import run_oga
from .oracle import best_m_term, plant_instance, reference_from_best


def inject_d(trace, n, factor):
    """Copy of ``trace`` with ``d_n`` multiplied by ``factor``."""
    d = trace.d.copy()
    d[n - 1] *= factor
    return dataclasses.replace(trace, d=d)


def inject_x(trace, i, n, factor):
    """Copy of ``trace`` with ``x_{i,n}`` multiplied by ``factor``."""
    x = trace.x.copy()
    x[n - 1, i - 1] *= factor
    return dataclasses.replace(trace, x=x)


def _suite(dictionary, trace, ref, m):
    classes = classify(trace, ref)
    diag = diagnostics(trace, ref, dictionary, classes)
    return check_lemma_suite(trace, ref, m, dictionary.m_coherence, dictionary, classes, diag)


def lemma4_fault():
    """Equal-coefficient signal on an orthonormal basis has ``|d_n|`` constant; inflating
    ``d_2`` by 10% must break the growth bound at step 2 and nowhere else beforehand."""
    d = gen_orthonormal(8)
    m = 2
    f = np.zeros(8)
    f[:4] = 1.0
    trace = run_oga(d, f, 2 * m)
    ref = reference_from_best(best_m_term(d, f, m))
    clean = _suite(d, trace, ref, m)
    bad = _suite(d, inject_d(trace, 2, 1.1), ref, m)
    hits = [c for c in bad if c.check_name == "lemma4_dn_growth" and c.failed]
    ok = not any(c.failed for c in clean) and bool(hits) and hits[0].step == 2
    return ok, f"lemma4 failures at steps {[c.step for c in hits]}"


def lemma3_fault(k=10, m=1, seed=0):
    """Scale by 10 the off-diagonal ``x_{i,n}`` closest to its bound.

    The default ``k=10, m=1`` is the smallest union in the coherence regime.
    """
    d = gen_identity_hadamard(k)
    f, ref = plant_instance(d, m, 1.0, 2.0, 0.5, seed)
    trace = run_oga(d, f, 2 * m)
    M = d.m_coherence
    mM = m * M
    best, where = -1.0, None
    for n in range(2, trace.n_steps + 1):
        bound = M * abs(trace.d[n - 1]) * (1 + 3 * mM)
        for i in range(1, n):
            ratio = abs(trace.x[n - 1, i - 1]) / bound
            if ratio > best:
                best, where = ratio, (i, n)
    i, n = where
    clean = _suite(d, trace, ref, m)
    bad = _suite(d, inject_x(trace, i, n, 10.0), ref, m)
    hits = [c for c in bad if c.family == "lemma3" and c.failed]
    ok = not any(c.failed for c in clean) and any(c.step == n for c in hits)
    return ok, f"x_{{{i},{n}}} at {best:.2f} of its bound; lemma3 failures at steps {[c.step for c in hits]}"


def brute_force_best(atoms, f, m):
    """Reference enumeration via ``itertools.combinations`` and ``numpy.linalg.lstsq``."""
    best = (np.inf, None)
    for support in itertools.combinations(range(atoms.shape[0]), m):
        a = atoms[list(support)].T
        coef, *_ = np.linalg.lstsq(a, f, rcond=None)
        r = float(np.linalg.norm(f - a @ coef))
        if r < best[0]:
            best = (r, support)
    return best


def oracle_agreement(n_cases=20, tol=1e-12):
    worst = 0.0
    mismatched = 0
    for s in range(n_cases):
        d = gen_random_spherical(6, 8, seed=1000 + s)
        f = make_rng(s, stream=7).standard_normal(6)
        m = 1 + s % 3
        sigma, support = brute_force_best(d.atoms, f, m)
        res = best_m_term(d, f, m)
        worst = max(worst, abs(res.sigma - sigma))
        mismatched += res.support != support
    return worst <= tol and mismatched == 0, f"max |sigma diff| {worst:.2e}, support mismatches {mismatched}"


def projection_properties(n_cases=50):
    """Idempotence (1e-12), Pythagoras (1e-10) and residual orthogonality (1e-10)."""
    rng = make_rng(0, stream=8)
    worst = 0.0
    for _ in range(n_cases):
        dim = int(rng.integers(2, 41))
        n = int(rng.integers(1, dim // 2 + 1))
        atoms = rng.standard_normal((n, dim))
        atoms /= np.linalg.norm(atoms, axis=1, keepdims=True)
        v = rng.standard_normal(dim)
        p, r, _ = project_onto_span(atoms, v)
        p2, _, _ = project_onto_span(atoms, p)
        vn = np.linalg.norm(v)
        worst = max(
            worst,
            np.linalg.norm(p2 - p) / vn / 1e-12,
            abs(vn ** 2 - p @ p - r @ r) / vn ** 2 / 1e-10,
            np.max(np.abs(atoms @ r)) / vn / 1e-10,
        )
    return worst <= 1.0, f"worst error / tolerance = {worst:.3g}"


def orthonormal_exactness(n_cases=20):
    worst = 0.0
    for s in range(n_cases):
        d = gen_orthonormal(16, seed=s)
        f = make_rng(s, stream=9).standard_normal(16)
        m = 1 + s % 4
        sigma = float(np.sqrt(np.sort((d.atoms @ f) ** 2)[: 16 - m].sum()))
        trace = run_oga(d, f, m)
        worst = max(worst, abs(trace.residual_norms[-1] - sigma))
    return worst <= 1e-10, f"max | ||f_m|| - sigma_m | = {worst:.2e}"


CHECKS = [
    ("lemma4 fault injection", lemma4_fault),
    ("lemma3 fault injection", lemma3_fault),
    ("oracle vs enumeration", oracle_agreement),
    ("projection properties", projection_properties),
    ("orthonormal exactness", orthonormal_exactness),
]


def run_selftest():
    """Run every self check; returns a list of ``(name, passed, detail)``."""
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not an aborted run
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out

