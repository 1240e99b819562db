import math

import numpy as np
import pytest

from coherent_oga.dictionary import (
    Dictionary,
    DictionaryError,
    DictionaryFormatError,
    build_dictionary,
    coherence,
    gen_identity_hadamard,
    gen_orthonormal,
    gen_random_spherical,
    load_dictionary,
    save_dictionary,
    subdictionary,
    union_subset_indices,
)


def _pairwise_max(atoms):
    best = 0.0
    for i in range(len(atoms)):
        for j in range(i + 1, len(atoms)):
            best = max(best, abs(float(np.dot(atoms[i], atoms[j]))))
    return best


def test_build_standard_basis():
    d = build_dictionary(np.eye(3), "e3")
    assert d.count == 3 and d.dim == 3 and d.label == "e3"


def test_build_rejects_duplicates_and_antipodes():
    with pytest.raises(DictionaryError, match="0 and 1"):
        build_dictionary([[1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(DictionaryError):
        build_dictionary([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])


def test_build_normalizes():
    d = build_dictionary([[2.0, 0.0], [0.0, 3.0]])
    np.testing.assert_array_equal(d.atoms, np.eye(2))


def test_build_rejects_zero_atom():
    with pytest.raises(DictionaryError, match="zero"):
        build_dictionary([[0.0, 0.0], [1.0, 0.0]])


def test_constructor_requires_unit_norm():
    with pytest.raises(DictionaryError):
        Dictionary(np.array([[1.0, 0.0], [0.0, 1.0 + 1e-9]]))


def test_atoms_are_read_only():
    d = gen_orthonormal(3)
    with pytest.raises(ValueError):
        d.atoms[0, 0] = 2.0


def test_coherence_examples():
    assert coherence(gen_orthonormal(5)).m_coherence == 0.0
    d = build_dictionary([[1.0, 0.0], [1.0, 1.0]])
    rep = coherence(d)
    assert rep.m_coherence == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert rep.witness_pair == (0, 1)


@pytest.mark.parametrize("k", range(1, 13))
def test_union_coherence_exact(k):
    d = gen_identity_hadamard(k)
    assert d.count == 2 ** (k + 1) and d.dim == 2 ** k
    assert abs(d.m_coherence - 2 ** (-k / 2)) <= 1e-12
    assert np.max(np.abs(np.linalg.norm(d.atoms, axis=1) - 1)) <= 1e-12


def test_union_k1_atoms():
    d = gen_identity_hadamard(1)
    s = 1 / math.sqrt(2)
    np.testing.assert_allclose(d.atoms, [[1, 0], [0, 1], [s, s], [s, -s]], rtol=0, atol=1e-16)


@pytest.mark.parametrize("k", [2, 4, 5])
def test_union_coherence_matches_pairwise_scan(k):
    d = gen_identity_hadamard(k)
    assert d.m_coherence == pytest.approx(_pairwise_max(d.atoms), abs=1e-15)


def test_union_memory_budget():
    with pytest.raises(DictionaryError, match="bytes"):
        gen_identity_hadamard(12, max_bytes=1 << 20)


def test_coherence_scan_is_blockwise_exact():
    d = gen_random_spherical(5, 40, seed=2)
    from coherent_oga.dictionary import _scan_coherence

    small = _scan_coherence(d.atoms, block=7)
    assert small.m_coherence == d.m_coherence == pytest.approx(_pairwise_max(d.atoms), abs=0)
    assert small.witness_pair == d.coherence_report.witness_pair


def test_random_spherical_determinism_and_coherence():
    a = gen_random_spherical(8000, 64, seed=7)
    b = gen_random_spherical(8000, 64, seed=7)
    assert np.array_equal(a.atoms, b.atoms)
    assert a.m_coherence == coherence(a).m_coherence
    g = np.abs(a.atoms @ a.atoms.T)
    np.fill_diagonal(g, 0)
    assert a.m_coherence == pytest.approx(g.max(), abs=1e-15)
    assert 0.01 < a.m_coherence < 0.07


def test_random_spherical_retry_exhaustion():
    with pytest.raises(DictionaryError, match="best was"):
        gen_random_spherical(2, 2, seed=0, max_coherence=0.01, max_retries=3)


def test_random_spherical_max_coherence_respected():
    d = gen_random_spherical(50, 10, seed=4, max_coherence=0.5)
    assert d.m_coherence <= 0.5


def test_subdictionary():
    d = gen_identity_hadamard(4)
    assert subdictionary(d, range(d.count)) == d
    assert subdictionary(gen_orthonormal(6), [4, 1]).m_coherence == 0.0
    with pytest.raises(DictionaryError):
        subdictionary(d, [0, 0])
    with pytest.raises(DictionaryError):
        subdictionary(d, [d.count])


def test_union_subset_spans_both_bases():
    idx = union_subset_indices(12, 512, seed=0)
    assert len(idx) == 512 == len(set(idx))
    assert sum(i < 4096 for i in idx) == 256
    d = subdictionary(gen_identity_hadamard(12), idx)
    assert d.m_coherence <= 1 / 64 + 1e-15


def test_subdictionary_coherence_never_grows():
    d = gen_random_spherical(6, 20, seed=9)
    rng = np.random.default_rng(0)
    for _ in range(20):
        idx = rng.choice(20, size=int(rng.integers(2, 20)), replace=False)
        assert subdictionary(d, idx).m_coherence <= d.m_coherence


@pytest.mark.parametrize("d", [gen_identity_hadamard(3), gen_random_spherical(7, 11, seed=3), gen_orthonormal(4, seed=1)])
def test_save_load_roundtrip_bit_exact(tmp_path, d):
    p = tmp_path / "d.csv"
    save_dictionary(d, p)
    e = load_dictionary(p)
    assert e == d
    assert np.array_equal(e.atoms, d.atoms)


def test_load_truncated(tmp_path):
    p = tmp_path / "d.csv"
    save_dictionary(gen_identity_hadamard(2), p)
    lines = p.read_text().splitlines()
    p.write_text("\n".join(lines[:-2]) + "\n")
    with pytest.raises(DictionaryFormatError, match="expected 8 atom rows"):
        load_dictionary(p)


def test_load_non_unit_row(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("dim,2\ncount,2\nlabel,x\n1,0\n0,1.5\n")
    with pytest.raises(DictionaryFormatError) as exc:
        load_dictionary(p)
    assert exc.value.line == 5


def test_load_bad_header_and_width(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("dims,2\ncount,2\nlabel,x\n1,0\n0,1\n")
    with pytest.raises(DictionaryFormatError) as exc:
        load_dictionary(p)
    assert exc.value.line == 1
    p.write_text("dim,2\ncount,2\nlabel,x\n1,0,0\n0,1\n")
    with pytest.raises(DictionaryFormatError) as exc:
        load_dictionary(p)
    assert exc.value.line == 4


def test_load_renormalizes_small_drift(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("dim,2\ncount,2\nlabel,x\n1.0000001,0\n0,1\n")
    d = load_dictionary(p)
    assert d.atoms[0, 0] == 1.0
