"""Independent reference implementations used only by the tests.

None of these share code with the package: elimination is textbook partial
pivoting, enumeration is nested loops over index tuples, and the OGA
reference recomputes every projection with ``numpy.linalg.lstsq``.
"""

import numpy as np


def gauss_solve(a, b):
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    n = len(b)
    for col in range(n):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        a[[col, piv]] = a[[piv, col]]
        b[[col, piv]] = b[[piv, col]]
        for r in range(col + 1, n):
            f = a[r, col] / a[col, col]
            a[r, col:] -= f * a[col, col:]
            b[r] -= f * b[col]
    x = np.zeros(n)
    for r in range(n - 1, -1, -1):
        x[r] = (b[r] - a[r, r + 1:] @ x[r + 1:]) / a[r, r]
    return x


def _residual(atoms, f, idx):
    a = atoms[list(idx)]
    c = gauss_solve(a @ a.T, a @ f)
    return float(np.linalg.norm(f - c @ a))


def enumerate_best(atoms, f, m):
    """Nested-loop search; strict improvement keeps the lexicographically first optimum."""
    n = atoms.shape[0]
    best = (np.inf, None)

    def visit(idx):
        nonlocal best
        r = _residual(atoms, f, idx)
        if r < best[0]:
            best = (r, tuple(idx))

    if m == 1:
        for i in range(n):
            visit((i,))
    elif m == 2:
        for i in range(n):
            for j in range(i + 1, n):
                visit((i, j))
    elif m == 3:
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    visit((i, j, k))
    else:
        raise ValueError("reference enumeration covers m <= 3")
    return best


def reference_oga(atoms, f, steps):
    """Plain OGA with lstsq projections; returns (selected, d, residual norms)."""
    selected, ds, norms = [], [], [float(np.linalg.norm(f))]
    r = f.copy()
    for _ in range(steps):
        corr = atoms @ r
        i = int(np.argmax(np.abs(corr)))
        selected.append(i)
        ds.append(float(corr[i]))
        a = atoms[selected].T
        c, *_ = np.linalg.lstsq(a, f, rcond=None)
        r = f - a @ c
        norms.append(float(np.linalg.norm(r)))
    return selected, np.array(ds), np.array(norms)
