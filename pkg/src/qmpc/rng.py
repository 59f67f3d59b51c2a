"""Seeded, splittable random stream.

Every random choice in a protocol run draws from a ``SeededRng``. Child
streams are derived with :meth:`SeededRng.split`, which hashes the parent
seed together with a tuple of labels (BLAKE2b, 8-byte digest). The derivation
does not consume parent state, so streams for (trial, point, party) can be
built in any order and give the same result.
"""

import hashlib
import random


def derive_seed(seed: int, *labels) -> int:
    h = hashlib.blake2b(digest_size=8)
    h.update(str(seed).encode())
    for label in labels:
        h.update(b"\x1f")
        h.update(str(label).encode())
    return int.from_bytes(h.digest(), "big")


class SeededRng:
    def __init__(self, seed: int):
        if not 0 <= seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        self.seed = seed
        self._r = random.Random(seed)

    def split(self, *labels) -> "SeededRng":
        return SeededRng(derive_seed(self.seed, *labels))

    def random(self) -> float:
        return self._r.random()

    def randrange(self, n: int) -> int:
        return self._r.randrange(n)

    def bit(self) -> int:
        return self._r.getrandbits(1)

    def bits(self, k: int) -> list[int]:
        if k == 0:
            return []
        v = self._r.getrandbits(k)
        return [(v >> (k - 1 - i)) & 1 for i in range(k)]

    def sample(self, population, k: int) -> list:
        return self._r.sample(population, k)

    def __repr__(self):
        return f"SeededRng({self.seed})"
