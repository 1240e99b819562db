"""Dense real vector helpers and small least-squares projections.

Vectors are plain 1-D float64 numpy arrays. Projections onto the span of a
handful of atoms go through the Gram matrix and a hand-rolled Cholesky
factorization so that breakdown is reported with the offending pivot.
"""

import numpy as np


class ProjectionError(np.linalg.LinAlgError):
    """Gram matrix is not numerically positive definite."""

    def __init__(self, n_atoms, pivot_index, pivot):
        self.n_atoms = n_atoms
        self.pivot_index = pivot_index
        self.pivot = pivot
        super().__init__(
            f"Gram matrix of {n_atoms} atoms is not positive definite: "
            f"pivot {pivot_index} is {pivot:.3e}"
        )


def as_vector(v, dim=None, name="vector"):
    """Validate ``v`` as a finite 1-D float64 array, optionally of length ``dim``."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def inner(u, v):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(np.dot(u, v))


def gram_matrix(atoms):
    """Pairwise inner products of the rows of ``atoms`` (shape ``(n, dim)``)."""
    atoms = np.atleast_2d(np.asarray(atoms, dtype=np.float64))
    g = atoms @ atoms.T
    # exact symmetry; BLAS may differ in the last bit across the diagonal
    return 0.5 * (g + g.T)


def cholesky(g):
    """Lower Cholesky factor of a symmetric positive definite matrix.

    Raises
    ------
    ProjectionError
        If a pivot is not strictly positive.
    """
    g = np.asarray(g, dtype=np.float64)
    n = g.shape[0]
    if g.shape != (n, n):
        raise ValueError(f"Gram matrix must be square, got {g.shape}")
    low = np.zeros_like(g)
    for j in range(n):
        pivot = g[j, j] - np.dot(low[j, :j], low[j, :j])
        if not pivot > 0.0:
            raise ProjectionError(n, j, pivot)
        low[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            low[j + 1:, j] = (g[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    return low


def _forward(low, b):
    y = np.empty_like(b)
    for i in range(len(b)):
        y[i] = (b[i] - np.dot(low[i, :i], y[:i])) / low[i, i]
    return y


def _backward(low, y):
    n = len(y)
    x = np.empty_like(y)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - np.dot(low[i + 1:, i], x[i + 1:])) / low[i, i]
    return x


def solve_spd(g, rhs):
    """Solve ``g @ c = rhs`` for symmetric positive definite ``g``."""
    rhs = np.asarray(rhs, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] != rhs.shape[0]:
        raise ValueError(f"shape mismatch: Gram {g.shape}, rhs {rhs.shape}")
    low = cholesky(g)
    return _backward(low, _forward(low, rhs))


def project_onto_span(atoms, v):
    """Orthogonal projection of ``v`` onto the span of the rows of ``atoms``.

    Parameters
    ----------
    atoms : array-like of shape (n, dim) or sequence of vectors
        Linearly independent spanning vectors. ``n`` may be zero.
    v : array-like of shape (dim,)

    Returns
    -------
    projection, residual : ndarray of shape (dim,)
    coeffs : ndarray of shape (n,)
        ``projection == coeffs @ atoms``.
    """
    v = np.asarray(v, dtype=np.float64)
    if len(atoms) == 0:
        return np.zeros_like(v), v.copy(), np.empty(0)
    atoms = np.asarray(atoms, dtype=np.float64)
    if atoms.ndim != 2 or atoms.shape[1] != v.shape[0]:
        raise ValueError(f"atoms of shape {atoms.shape} do not match vector of dimension {v.shape[0]}")
    if atoms.shape[0] == 0:
        return np.zeros_like(v), v.copy(), np.empty(0)
    coeffs = solve_spd(gram_matrix(atoms), atoms @ v)
    projection = coeffs @ atoms
    return projection, v - projection, coeffs
