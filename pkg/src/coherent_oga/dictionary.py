"""Finite unit-norm dictionaries and their mutual coherence."""

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.linalg import hadamard

from ._rng import make_rng

NORM_TOL = 1e-12
DUPLICATE_TOL = 1e-10
LOAD_NORM_TOL = 1e-6
DEFAULT_MAX_BYTES = 1 << 30


class DictionaryError(ValueError):
    pass


class DictionaryFormatError(DictionaryError):
    """Malformed dictionary file; ``line`` is 1-based."""

    def __init__(self, message, line=None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class CoherenceReport:
    m_coherence: float
    witness_pair: tuple


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Ordered unit-norm atoms stored as the rows of ``atoms``.

    Use :func:`build_dictionary` for untrusted input; the constructor only
    checks shapes and norms, it does not scan for duplicate atoms.
    """

    atoms: np.ndarray
    label: str = ""

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=np.float64, copy=True)
        if atoms.ndim != 2:
            raise DictionaryError(f"atoms must be a 2-D array, got shape {atoms.shape}")
        if atoms.shape[0] < 2:
            raise DictionaryError(f"need at least 2 atoms, got {atoms.shape[0]}")
        if not np.all(np.isfinite(atoms)):
            raise DictionaryError("atoms contain non-finite entries")
        norms = np.linalg.norm(atoms, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > NORM_TOL)
        if bad.size:
            raise DictionaryError(f"atom {bad[0]} has norm {norms[bad[0]]!r}, expected 1")
        atoms.flags.writeable = False
        object.__setattr__(self, "atoms", atoms)

    @property
    def dim(self):
        return self.atoms.shape[1]

    @property
    def count(self):
        return self.atoms.shape[0]

    def __len__(self):
        return self.count

    def __eq__(self, other):
        if not isinstance(other, Dictionary):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.atoms, other.atoms)

    __hash__ = None

    @cached_property
    def coherence_report(self):
        return _scan_coherence(self.atoms)

    @property
    def m_coherence(self):
        return self.coherence_report.m_coherence

    @cached_property
    def full_gram(self):
        g = self.atoms @ self.atoms.T
        g = 0.5 * (g + g.T)
        g.flags.writeable = False
        return g

    def gram(self, indices=None):
        if indices is None:
            return self.full_gram
        sub = self.atoms[np.asarray(indices, dtype=np.intp)]
        g = sub @ sub.T
        return 0.5 * (g + g.T)


def _scan_coherence(atoms, block=1024):
    """Exact max |<phi_i, phi_j>| over i < j, scanning the Gram matrix by row blocks."""
    n = atoms.shape[0]
    best = -1.0
    pair = (0, 1)
    for start in range(0, n, block):
        stop = min(start + block, n)
        g = np.abs(atoms[start:stop] @ atoms[start:].T)
        # keep strictly-upper entries only: column offset j >= row offset i + 1
        rows = np.arange(stop - start)[:, None]
        cols = np.arange(n - start)[None, :]
        g[cols <= rows] = -1.0
        flat = int(np.argmax(g))
        i, j = divmod(flat, g.shape[1])
        if g[i, j] > best:
            best = float(g[i, j])
            pair = (start + i, start + j)
    return CoherenceReport(m_coherence=best, witness_pair=pair)


def coherence(d):
    """Coherence of ``d`` with the lowest-index pair attaining it."""
    return d.coherence_report


def build_dictionary(atoms, label=""):
    """Normalize and validate candidate atoms.

    Nonzero atoms are rescaled to unit length. Duplicate or antipodal pairs
    (``|<phi_i, phi_j>| > 1 - 1e-10``) are rejected.
    """
    arr = np.array(atoms, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DictionaryError(f"atoms must be a nonempty list of equal-length vectors, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DictionaryError("atoms contain non-finite entries")
    norms = np.linalg.norm(arr, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DictionaryError(f"atom {zero[0]} is zero")
    off = np.abs(norms - 1.0) > 1e-13
    arr[off] /= norms[off, None]
    d = Dictionary(arr, label)
    report = d.coherence_report
    if report.m_coherence > 1.0 - DUPLICATE_TOL:
        i, j = report.witness_pair
        raise DictionaryError(f"atoms {i} and {j} are duplicates or antipodal (|<phi_i, phi_j>| = {report.m_coherence!r})")
    return d


def gen_identity_hadamard(k, max_bytes=DEFAULT_MAX_BYTES):
    """Standard basis of R^(2^k) followed by the normalized Sylvester-Hadamard rows."""
    if int(k) != k or k < 1:
        raise DictionaryError(f"k must be a positive integer, got {k}")
    k = int(k)
    dim = 1 << k
    need = 2 * dim * dim * 8
    if need > max_bytes:
        raise DictionaryError(f"k={k} needs {need} bytes for atoms, budget is {max_bytes}")
    atoms = np.empty((2 * dim, dim))
    atoms[:dim] = np.eye(dim)
    atoms[dim:] = hadamard(dim, dtype=np.float64) / np.sqrt(dim)
    return Dictionary(atoms, f"identity-hadamard-k{k}")


def gen_orthonormal(dim, seed=None):
    """Standard basis when ``seed`` is None, otherwise a seeded random orthonormal basis."""
    if seed is None:
        return Dictionary(np.eye(dim), f"identity-{dim}")
    q, r = np.linalg.qr(make_rng(seed).standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    atoms = q.T
    atoms = atoms / np.linalg.norm(atoms, axis=1, keepdims=True)
    return Dictionary(atoms, f"orthonormal-{dim}-s{seed}")


def gen_random_spherical(dim, count, seed, max_coherence=None, max_retries=100):
    """Atoms uniform on the unit sphere of R^dim.

    With ``max_coherence`` set, whole draws are rejected until the coherence
    is at most that value; after ``max_retries`` draws a
    :class:`DictionaryError` reports the best coherence seen.
    """
    if count < 2:
        raise DictionaryError(f"count must be at least 2, got {count}")
    if dim < 1:
        raise DictionaryError(f"dim must be positive, got {dim}")
    rng = make_rng(seed)
    best = np.inf
    for _ in range(max(1, max_retries)):
        raw = rng.standard_normal((count, dim))
        raw /= np.linalg.norm(raw, axis=1, keepdims=True)
        d = Dictionary(raw, f"random-{dim}x{count}-s{seed}")
        mc = d.m_coherence
        if mc > 1.0 - DUPLICATE_TOL:
            best = min(best, mc)
            continue
        if max_coherence is None or mc <= max_coherence:
            return d
        best = min(best, mc)
    raise DictionaryError(
        f"no draw with coherence <= {max_coherence} after {max_retries} tries; best was {best:.6g}"
    )


def subdictionary(d, indices, label=None):
    idx = [int(i) for i in indices]
    if len(set(idx)) != len(idx):
        raise DictionaryError("repeated index in subdictionary")
    bad = [i for i in idx if not 0 <= i < d.count]
    if bad:
        raise DictionaryError(f"index {bad[0]} out of range for {d.count} atoms")
    return Dictionary(d.atoms[idx], d.label if label is None else label)


def union_subset_indices(k, size, seed):
    """Sorted indices of ``size`` atoms of the k-union, half from each basis."""
    dim = 1 << k
    if size > 2 * dim or size < 2:
        raise DictionaryError(f"cannot pick {size} atoms from a union of two bases of size {dim}")
    rng = make_rng(seed, stream=1)
    first = size // 2
    lo = rng.choice(dim, size=first, replace=False)
    hi = dim + rng.choice(dim, size=size - first, replace=False)
    return sorted(int(i) for i in np.concatenate([lo, hi]))


def save_dictionary(d, path):
    if "\n" in d.label or "\r" in d.label:
        raise DictionaryError("label must be a single line")
    lines = [f"dim,{d.dim}", f"count,{d.count}", f"label,{d.label}"]
    lines.extend(",".join(format(x, ".17g") for x in row) for row in d.atoms)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _header(line, key, lineno):
    name, sep, value = line.partition(",")
    if not sep or name != key:
        raise DictionaryFormatError(f"expected '{key},<value>'", lineno)
    return value


def load_dictionary(path):
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if len(lines) < 3:
        raise DictionaryFormatError("truncated header", len(lines) + 1)
    try:
        dim = int(_header(lines[0], "dim", 1))
        count = int(_header(lines[1], "count", 2))
    except ValueError as exc:
        if isinstance(exc, DictionaryFormatError):
            raise
        raise DictionaryFormatError(f"bad integer in header: {exc}") from None
    label = _header(lines[2], "label", 3)
    if dim < 1 or count < 2:
        raise DictionaryFormatError(f"invalid dim={dim} or count={count}")
    body = lines[3:]
    if len(body) < count:
        raise DictionaryFormatError(f"expected {count} atom rows, found {len(body)}", 4 + len(body))
    if any(s.strip() for s in body[count:]):
        raise DictionaryFormatError("trailing data after atom rows", 4 + count)
    atoms = np.empty((count, dim))
    for r in range(count):
        lineno = 4 + r
        fields = body[r].split(",")
        if len(fields) != dim:
            raise DictionaryFormatError(f"expected {dim} values, found {len(fields)}", lineno)
        try:
            atoms[r] = [float(x) for x in fields]
        except ValueError as exc:
            raise DictionaryFormatError(str(exc), lineno) from None
        if not np.all(np.isfinite(atoms[r])):
            raise DictionaryFormatError("non-finite value", lineno)
        norm = np.linalg.norm(atoms[r])
        if abs(norm - 1.0) > LOAD_NORM_TOL:
            raise DictionaryFormatError(f"atom has norm {norm!r}, expected 1", lineno)
        if abs(norm - 1.0) > NORM_TOL:
            atoms[r] /= norm
    d = Dictionary(atoms, label)
    report = d.coherence_report
    if report.m_coherence > 1.0 - DUPLICATE_TOL:
        i, j = report.witness_pair
        raise DictionaryFormatError(f"atoms {i} and {j} are duplicates or antipodal", 4 + j)
    return d
