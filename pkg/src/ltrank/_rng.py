"""Counter-based RNG contract shared by both kernel backends.

Every Monte-Carlo trial owns an independent stream identified by
(seed, salt, stream).  Draw i of a stream is a pure function of the
stream base, so trials can run in any order (or in parallel) and still
reproduce bit-identical results.  The scheme is splitmix64 applied to a
counter; both the numba and the numpy backend must implement exactly
these formulas.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB

# Domain-separation salts: different consumers of the same user seed get
# unrelated streams.
SALT_SAMPLE = 0x53414D504C45AA01  # single-matrix sampling
SALT_SPECTRUM = 0x5350454354520102  # deficiency-spectrum estimation
SALT_DEP = 0x44455053494D0103  # decoding-error simulation
SALT_FAIR = 0x464149525F524B04  # fair-coin rank oracles
SALT_ROUNDTRIP = 0x524F554E44545205  # encode/decode round trips


def mix64(z: int) -> int:
    """splitmix64 finalizer on 64-bit integers (reference implementation)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * MIX_B) & MASK64
    return z ^ (z >> 31)


def stream_base(seed: int, salt: int, stream: int) -> int:
    """Base value of stream `stream` for a given user seed and domain salt."""
    return mix64((mix64((seed ^ salt) & MASK64) + stream * GOLDEN) & MASK64)


def draw(base: int, i: int) -> int:
    """The i-th 64-bit draw of a stream (i = 0, 1, 2, ...)."""
    return mix64((base + (i + 1) * GOLDEN) & MASK64)
