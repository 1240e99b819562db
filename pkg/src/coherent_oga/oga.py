"""Orthogonal Greedy Algorithm (orthogonal matching pursuit) with a full trace."""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import ProjectionError, as_vector, solve_spd

COMPLETED = "completed_steps"
BELOW_TOL = "correlation_below_tol"


class OgaError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class OgaTrace:
    """Record of an OGA run with ``K`` completed steps.

    Steps are numbered from 1 as in ``d_n = <f_{n-1}, g_n>``; arrays indexed
    by step store step ``n`` at position ``n - 1``, except ``residuals`` and
    ``residual_norms`` which hold ``f_0 .. f_K``.

    Attributes
    ----------
    selected : ndarray of int, shape (K,)
        Dictionary indices of ``g_1 .. g_K``.
    d : ndarray, shape (K,)
        Signed correlations ``d_n``.
    residual_norms : ndarray, shape (K + 1,)
    residuals : ndarray, shape (K + 1, dim)
    coeffs_per_step : tuple of ndarray
        ``coeffs_per_step[n]`` expands ``G_n(f)`` over ``g_1 .. g_n``
        (entry 0 is empty).
    x : ndarray, shape (K, K)
        ``x[n - 1, i - 1] = x_{i,n}``; zero above the diagonal.
    stop_reason : str
    """

    selected: np.ndarray
    d: np.ndarray
    residual_norms: np.ndarray
    residuals: np.ndarray
    coeffs_per_step: tuple
    x: np.ndarray
    stop_reason: str

    @property
    def n_steps(self):
        return len(self.selected)

    @property
    def f(self):
        return self.residuals[0]

    def x_entry(self, i, n):
        return float(self.x[n - 1, i - 1])


def max_correlation(d, v):
    """Lowest atom index maximizing ``|<v, g>|`` and the signed inner product there."""
    corr = d.atoms @ np.asarray(v, dtype=np.float64)
    idx = int(np.argmax(np.abs(corr)))
    return idx, float(corr[idx])


def run_oga(d, f, steps, stop_tol=None):
    """Run ``steps`` iterations of OGA on ``f`` over dictionary ``d``.

    The run ends early when the largest residual correlation is at most
    ``stop_tol`` (default ``1e-13 * ||f||``).
    """
    f = as_vector(f, d.dim, "f")
    steps = int(steps)
    if steps < 1:
        raise ValueError(f"steps must be positive, got {steps}")
    if steps > min(d.dim, d.count):
        raise ValueError(f"steps={steps} exceeds min(dim, atom count) = {min(d.dim, d.count)}")
    f_norm = float(np.linalg.norm(f))
    if stop_tol is None:
        stop_tol = 1e-13 * f_norm
    if stop_tol < 0:
        raise ValueError("stop_tol must be non-negative")

    selected = []
    ds = []
    residuals = [f.copy()]
    coeffs = [np.empty(0)]
    x = np.zeros((steps, steps))
    residual = f
    stop_reason = COMPLETED
    for n in range(1, steps + 1):
        idx, corr = max_correlation(d, residual)
        if abs(corr) <= stop_tol:
            stop_reason = BELOW_TOL
            break
        if idx in selected:
            raise OgaError(f"step {n}: atom {idx} selected twice (correlation {corr:.3e})")
        selected.append(idx)
        ds.append(corr)
        atoms = d.atoms[selected]
        try:
            c = solve_spd(d.gram(selected), atoms @ f)
        except ProjectionError as exc:
            raise OgaError(f"step {n}: projection failed: {exc}") from exc
        residual = f - c @ atoms
        x[n - 1, :n] = c
        x[n - 1, : n - 1] -= coeffs[-1]
        coeffs.append(c)
        residuals.append(residual)

    k = len(selected)
    residuals = np.array(residuals)
    return OgaTrace(
        selected=np.array(selected, dtype=np.intp),
        d=np.array(ds),
        residual_norms=np.linalg.norm(residuals, axis=1),
        residuals=residuals,
        coeffs_per_step=tuple(coeffs),
        x=x[:k, :k].copy(),
        stop_reason=stop_reason,
    )


def x_table_path(path):
    path = Path(path)
    return path.with_name(path.stem + "_x" + (path.suffix or ".csv"))


def write_trace_csv(trace, path):
    """Write the per-step table to ``path`` and the x triangle next to it.

    Returns the path of the companion ``n,i,x`` file.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "selected_index", "d_n", "residual_norm"])
        for n in range(1, trace.n_steps + 1):
            w.writerow([n, int(trace.selected[n - 1]), format(trace.d[n - 1], ".17g"),
                        format(trace.residual_norms[n], ".17g")])
    xpath = x_table_path(path)
    with xpath.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "i", "x"])
        for n in range(1, trace.n_steps + 1):
            for i in range(1, n + 1):
                w.writerow([n, i, format(trace.x[n - 1, i - 1], ".17g")])
    return xpath
