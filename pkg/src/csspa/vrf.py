"""Ideal-VRF emulation keyed by opaque seed identities.

A seed is identified by the chain of leaders that produced it, never by a
numeric credential.  ``evaluate`` hashes ``(secret, seed, index)`` with keyed
BLAKE2b, so the same query always returns the same uniform and a strategy that
pre-computes a credential for a hypothetical seed sees exactly what the engine
later sees if that seed materialises.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Hashable

import numpy as np

_DIGEST = 16
_TWO52 = float(1 << 52)


def _step_bytes(round_index: int, account: Hashable) -> bytes:
    return f"{round_index}|{account}".encode()


@dataclass(frozen=True)
class SeedId:
    """A seed as ``(root, path)``; ``path`` lists ``(round, leader)`` pairs."""

    root: int
    path: tuple[tuple[int, Hashable], ...] = ()
    _parent_digest: bytes | None = field(default=None, compare=False, repr=False)

    @classmethod
    def bootstrap(cls, root: int) -> "SeedId":
        return cls(int(root))

    def extend(self, round_index: int, leader: Hashable) -> "SeedId":
        """The seed produced when ``leader`` wins round ``round_index`` from this seed."""
        return SeedId(self.root, self.path + ((round_index, leader),), self.digest)

    @property
    def depth(self) -> int:
        return len(self.path)

    @property
    def parent(self) -> "SeedId | None":
        if not self.path:
            return None
        return SeedId(self.root, self.path[:-1])

    def is_prefix_of(self, other: "SeedId") -> bool:
        return self.root == other.root and other.path[: len(self.path)] == self.path

    @property
    def digest(self) -> bytes:
        cached = self.__dict__.get("_digest")
        if cached is not None:
            return cached
        if not self.path:
            d = hashlib.blake2b(b"root|%d" % self.root, digest_size=_DIGEST).digest()
        else:
            parent = self._parent_digest
            if parent is None:
                parent = SeedId(self.root, self.path[:-1]).digest
            d = hashlib.blake2b(parent + _step_bytes(*self.path[-1]), digest_size=_DIGEST).digest()
        object.__setattr__(self, "_digest", d)
        return d


@dataclass(frozen=True)
class AccountSecret:
    key_material: bytes

    def __post_init__(self) -> None:
        if not 1 <= len(self.key_material) <= 64:
            raise ValueError("key material must be 1..64 bytes")

    @classmethod
    def generate(cls, rng: np.random.Generator, width: int = 16) -> "AccountSecret":
        return cls(rng.bytes(width))


def evaluate(secret: AccountSecret, seed: SeedId, index: int = 0) -> float:
    """Deterministic pseudo-uniform in the open interval (0, 1).

    ``index`` distinguishes the synthetic wallets of a split stake under one
    seed.  The output is ``(k + 1/2) / 2**52`` for a 52-bit hash value ``k``,
    so the endpoints 0 and 1 cannot occur and no resampling is needed.
    """
    h = hashlib.blake2b(
        seed.digest + index.to_bytes(8, "little"), key=secret.key_material, digest_size=8
    ).digest()
    k = int.from_bytes(h, "little") >> 12
    return (k + 0.5) / _TWO52


def verify(secret: AccountSecret, seed: SeedId, value: float, index: int = 0) -> bool:
    """Verification by recomputation."""
    return evaluate(secret, seed, index) == value
