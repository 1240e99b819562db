"""Exact best m-term approximation and planted reference decompositions."""

from dataclasses import dataclass
from math import comb

import numba
import numpy as np

from ._rng import make_rng
from .linalg import as_vector, project_onto_span

DEFAULT_BUDGET = 50_000_000
EXACT = "exact_oracle"
PLANTED = "planted"

# A candidate atom whose squared distance to the span of the current prefix
# falls below this is treated as dependent; its supports are skipped since a
# smaller independent support reaches the same span.
_PIVOT_FLOOR = 1e-10


class OracleBudgetError(RuntimeError):
    pass


class PlantingError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class BestTermResult:
    m: int
    support: tuple
    coeffs: np.ndarray
    sigma: float
    v0: np.ndarray
    n_supports: int = 0


@dataclass(frozen=True, eq=False)
class ReferenceDecomposition:
    """m-atom subspace ``L`` with ``f = sum_j coeffs[j] * atom[support[j]] + v0``."""

    support: tuple
    coeffs: np.ndarray
    v0: np.ndarray
    v0_norm: float
    provenance: str

    @property
    def m(self):
        return len(self.support)


@numba.njit(cache=True)
def _best_support(gram, corr, m, pivot_floor):
    # Lexicographic DFS over m-subsets. The Cholesky factor of the prefix
    # Gram block and the forward-solved correlations are extended one row per
    # level, so a leaf costs O(m^2) and its projection energy is ||y||^2.
    n = corr.shape[0]
    idx = np.empty(m, np.int64)
    low = np.zeros((m, m))
    y = np.zeros(m)
    energy = np.zeros(m + 1)
    best = -1.0
    best_idx = np.arange(m)
    level = 0
    idx[0] = -1
    while level >= 0:
        idx[level] += 1
        j = idx[level]
        if j > n - m + level:
            level -= 1
            continue
        s = 0.0
        for t in range(level):
            v = gram[j, idx[t]]
            for u in range(t):
                v -= low[level, u] * low[t, u]
            v /= low[t, t]
            low[level, t] = v
            s += v * v
        piv = gram[j, j] - s
        if piv <= pivot_floor:
            continue
        low[level, level] = np.sqrt(piv)
        r = corr[j]
        for t in range(level):
            r -= low[level, t] * y[t]
        y[level] = r / low[level, level]
        energy[level + 1] = energy[level] + y[level] * y[level]
        if level == m - 1:
            if energy[m] > best:
                best = energy[m]
                for t in range(m):
                    best_idx[t] = idx[t]
        else:
            level += 1
            idx[level] = idx[level - 1]
    return best_idx, best


def best_m_term(d, f, m, budget=DEFAULT_BUDGET):
    """Best ``m``-term approximation of ``f`` by exhaustive support enumeration.

    Every ``m``-subset of atoms is scored by the energy of the orthogonal
    projection of ``f`` onto its span; the winner (lexicographically smallest
    on exact ties) is then re-projected directly to get ``coeffs`` and ``v0``.

    Raises
    ------
    OracleBudgetError
        If ``C(atom count, m)`` exceeds ``budget``.
    """
    f = as_vector(f, d.dim, "f")
    m = int(m)
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    if m > min(d.dim, d.count):
        raise ValueError(f"m={m} exceeds min(dim, atom count) = {min(d.dim, d.count)}")
    if m == 0:
        return BestTermResult(0, (), np.empty(0), float(np.linalg.norm(f)), f.copy(), 1)
    n_supports = comb(d.count, m)
    if n_supports > budget:
        raise OracleBudgetError(
            f"C({d.count}, {m}) = {n_supports} supports exceeds budget {budget}; "
            "restrict to a subdictionary or raise the budget"
        )
    gram = d.gram()
    corr = d.atoms @ f
    support, energy = _best_support(gram, corr, m, _PIVOT_FLOOR)
    if energy < 0:
        raise np.linalg.LinAlgError(f"every {m}-subset of atoms is numerically dependent")
    support = tuple(int(i) for i in support)
    _, v0, coeffs = project_onto_span(d.atoms[list(support)], f)
    return BestTermResult(m, support, coeffs, float(np.linalg.norm(v0)), v0, n_supports)


def reference_from_best(result):
    return ReferenceDecomposition(
        support=result.support,
        coeffs=np.asarray(result.coeffs),
        v0=result.v0,
        v0_norm=result.sigma,
        provenance=EXACT,
    )


def plant_instance(d, m, coeff_low, coeff_high, noise_norm, seed, max_retries=10):
    """Signal ``f = sum_j a_j psi_j + v0`` with ``v0`` orthogonal to the planted span.

    Returns ``(f, ReferenceDecomposition)``. Coefficient magnitudes are uniform
    on ``[coeff_low, coeff_high]`` with random signs and ``||v0|| == noise_norm``.
    """
    m = int(m)
    if not 1 <= m <= d.count:
        raise ValueError(f"m must be in [1, {d.count}], got {m}")
    if not 0 < coeff_low <= coeff_high:
        raise ValueError("need 0 < coeff_low <= coeff_high")
    if noise_norm < 0:
        raise ValueError("noise_norm must be non-negative")
    if d.dim <= m:
        raise ValueError(f"dim {d.dim} leaves no room for noise orthogonal to {m} atoms")
    rng = make_rng(seed)
    support = np.sort(rng.choice(d.count, size=m, replace=False))
    coeffs = rng.uniform(coeff_low, coeff_high, size=m) * rng.choice([-1.0, 1.0], size=m)
    atoms = d.atoms[support]
    for _ in range(max_retries):
        raw = rng.standard_normal(d.dim)
        _, perp, _ = project_onto_span(atoms, raw)
        norm = np.linalg.norm(perp)
        if norm > 1e-8 * np.linalg.norm(raw):
            break
    else:
        raise PlantingError(f"random draws kept landing in the planted span after {max_retries} tries")
    v0 = perp * (noise_norm / norm)
    f = coeffs @ atoms + v0
    ref = ReferenceDecomposition(
        support=tuple(int(i) for i in support),
        coeffs=coeffs,
        v0=v0,
        v0_norm=float(np.linalg.norm(v0)),
        provenance=PLANTED,
    )
    return f, ref
