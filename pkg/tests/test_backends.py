"""The numba and numpy kernel backends must agree bit for bit."""

import numpy as np
import pytest

from ltrank import _rng, backend, gf2

pytestmark = pytest.mark.skipif(
    "numba" not in backend.available_backends(),
    reason="numba backend unavailable")


@pytest.fixture(scope="module")
def both():
    return backend.get("numba"), backend.get("numpy")


DEGREES = np.array([1, 2, 3, 7, 25], dtype=np.int64)
CUM = np.array([0.1, 0.55, 0.8, 0.95, 1.0])


def test_env_flag_selects_backend(monkeypatch):
    monkeypatch.setenv(backend.ENV_VAR, "numpy")
    assert backend.get().IMPL == "numpy"
    monkeypatch.setenv(backend.ENV_VAR, "numba")
    assert backend.get().IMPL == "numba"
    monkeypatch.setenv(backend.ENV_VAR, "nope")
    with pytest.raises(ValueError):
        backend.get()


def test_stream_base_matches_reference(both):
    nb, npk = both
    for seed, salt, stream in [(0, _rng.SALT_SAMPLE, 0),
                               (42, _rng.SALT_DEP, 7),
                               (2 ** 40, _rng.SALT_FAIR, 123456)]:
        ref = _rng.stream_base(seed, salt, stream)
        assert nb.stream_base(seed, salt, stream) == ref
        assert npk.stream_base(seed, salt, stream) == ref


def test_rng_block_matches_reference(both):
    nb, npk = both
    base = _rng.stream_base(5, _rng.SALT_SAMPLE, 3)
    ref = np.array([_rng.draw(base, i) for i in range(257)],
                   dtype=np.uint64)
    assert np.array_equal(nb.rng_block(base, 257), ref)
    assert np.array_equal(npk.rng_block(base, 257), ref)


def test_sample_words_identical(both):
    nb, npk = both
    for stream in range(5):
        base = _rng.stream_base(11, _rng.SALT_SAMPLE, stream)
        a = nb.sample_words(40, 37, DEGREES, CUM, base)
        b = npk.sample_words(40, 37, DEGREES, CUM, base)
        for x, y in zip(a, b):
            assert np.array_equal(x, y)


def test_matrix_kernels_identical(both):
    nb, npk = both
    rng = np.random.default_rng(2)
    for _ in range(150):
        m, n = int(rng.integers(0, 22)), int(rng.integers(1, 22))
        dense = rng.integers(0, 2, size=(m, n), dtype=np.uint8)
        M = gf2.BitMatrix.from_dense(dense)
        indices, indptr = M._supports_flat()
        assert nb.ge_rank(M.words.copy(), n) == \
            npk.ge_rank(M.words.copy(), n)
        Pa, Qa, la = nb.triangulate(indices, indptr, m, n)
        Pb, Qb, lb = npk.triangulate(indices, indptr, m, n)
        assert la == lb
        assert np.array_equal(Pa, Pb) and np.array_equal(Qa, Qb)
        assert np.array_equal(nb.residual_matrix(M.words, Pa, Qa, la, n),
                              npk.residual_matrix(M.words, Pb, Qb, lb, n))
        assert nb.peel_rank(M.words, indices, indptr, m, n) == \
            npk.peel_rank(M.words, indices, indptr, m, n)
        syms = rng.integers(0, 256, size=(m, 2), dtype=np.uint8)
        ra, xa, fa = nb.solve(M.words, Pa, Qa, la, n, syms)
        rb, xb, fb = npk.solve(M.words, Pb, Qb, lb, n, syms)
        assert (ra, fa) == (rb, fb)
        if fa:
            assert np.array_equal(xa, xb)


def test_matvec_identical(both):
    nb, npk = both
    rng = np.random.default_rng(3)
    M = gf2.BitMatrix.from_dense(
        rng.integers(0, 2, size=(30, 70), dtype=np.uint8))
    x = rng.integers(0, 256, size=(70, 4), dtype=np.uint8)
    assert np.array_equal(nb.matvec(M.words, x), npk.matvec(M.words, x))


def test_mc_deficiency_identical(both):
    nb, npk = both
    a = nb.mc_deficiency(30, 33, 64, DEGREES, CUM, 5,
                         _rng.SALT_SPECTRUM, 7 << 32)
    b = npk.mc_deficiency(30, 33, 64, DEGREES, CUM, 5,
                          _rng.SALT_SPECTRUM, 7 << 32)
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])


def test_mc_append_rank_identical(both):
    nb, npk = both
    rng = np.random.default_rng(4)
    base_rows = gf2.BitMatrix.from_dense(
        rng.integers(0, 2, size=(10, 20), dtype=np.uint8)).words
    for bw in (np.zeros((0, 1), dtype=np.uint64), base_rows):
        a = nb.mc_append_rank(bw, 20, 6, 80, 9, _rng.SALT_FAIR, 0)
        b = npk.mc_append_rank(bw, 20, 6, 80, 9, _rng.SALT_FAIR, 0)
        assert np.array_equal(a, b)


def test_public_api_identical_through_env(monkeypatch):
    from ltrank import degree
    results = {}
    for name in ("numba", "numpy"):
        monkeypatch.setenv(backend.ENV_VAR, name)
        d = degree.example_distribution(60)
        M = degree.sample_matrix(d, 60, 66, seed=21)
        results[name] = (M.to_dense(), gf2.rank(M), gf2.peel_rank(M))
    assert np.array_equal(results["numba"][0], results["numpy"][0])
    assert results["numba"][1:] == results["numpy"][1:]
