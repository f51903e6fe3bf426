import numpy as np
import pytest

from ltrank import backend


def naive_rank(array) -> int:
    """Dead-simple GF(2) row reduction, the arbiter for rank tests."""
    a = (np.asarray(array, dtype=np.uint8) & 1).copy()
    m, n = a.shape
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, m):
            if a[i, c]:
                piv = i
                break
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        for i in range(m):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
    return r


@pytest.fixture(params=backend.available_backends())
def kernels(request):
    return backend.get(request.param)
