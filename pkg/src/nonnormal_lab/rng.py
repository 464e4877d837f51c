"""Deterministic, platform-independent randomness.

All randomness in the package flows through SplitMix64 streams consumed by
a Box-Muller transform (see the kernel modules).  Streams are addressed by
(base seed, *keys) so every rollout, experiment and bootstrap owns an
independent substream whose content does not depend on scheduling, worker
count or backend.
"""

from ._backend import kernels
from ._pykernels import mix64

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _hash_key(key):
    if isinstance(key, str):
        h = _FNV_OFFSET
        for byte in key.encode("utf-8"):
            h = ((h ^ byte) * _FNV_PRIME) & _MASK
        return h
    if isinstance(key, (int, bool)):
        return int(key) & _MASK
    raise TypeError(f"stream keys must be str or int, got {type(key).__name__}")


def derive_seed(base_seed, *keys):
    """Fold a sequence of keys into a 64-bit substream seed."""
    s = int(base_seed) & _MASK
    for key in keys:
        s = mix64(((s ^ _hash_key(key)) + _GOLDEN) & _MASK)
    return s


class RandomStream:
    """A named, value-addressed random stream.

    Each bulk draw derives a fresh block seed from (seed, call index), so
    the sequence of draws is fully determined by the construction seed,
    regardless of block sizes requested.
    """

    __slots__ = ("seed", "_calls")

    def __init__(self, seed):
        self.seed = int(seed) & _MASK
        self._calls = 0

    @classmethod
    def from_keys(cls, base_seed, *keys):
        return cls(derive_seed(base_seed, *keys))

    def spawn(self, *keys):
        """Derive an independent child stream."""
        return RandomStream(derive_seed(self.seed, *keys))

    def gaussians(self, count):
        """Draw ``count`` standard normal deviates."""
        block_seed = derive_seed(self.seed, "gauss", self._calls)
        self._calls += 1
        return kernels.gaussian_fill(block_seed, count)

    def uniforms(self, count):
        """Draw ``count`` uniform [0, 1) deviates."""
        block_seed = derive_seed(self.seed, "unif", self._calls)
        self._calls += 1
        return kernels.uniform_fill(block_seed, count)
