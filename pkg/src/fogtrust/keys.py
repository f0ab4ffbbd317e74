"""Keys, addresses and Diffie-Hellman shared secrets.

An identity is a secret scalar k and the public point P = k * G. The
on-ledger address is the last 20 bytes of the hash of the 64-byte public
point encoding, rendered as 0x-prefixed lowercase hex.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field

from .constants import digest
from .curve import CURVE_ORDER, GENERATOR, Point, scalar_mult
from .errors import InvalidScalar

ADDRESS_BYTES = 20


def derive_public(secret: int) -> Point:
    """P = k * G."""
    if not isinstance(secret, int) or not (1 <= secret < CURVE_ORDER):
        raise InvalidScalar("secret must be in [1, order-1]")
    return scalar_mult(secret, GENERATOR)


def address_of(public: Point) -> str:
    """Last 20 bytes of H(x || y), 0x-prefixed."""
    return "0x" + digest(public.to_bytes())[-ADDRESS_BYTES:].hex()


def shared_secret(secret: int, peer_public: Point) -> bytes:
    """H(k_A * P_B); symmetric because k_A * (k_B G) = k_B * (k_A G)."""
    if not (1 <= secret < CURVE_ORDER):
        raise InvalidScalar("secret must be in [1, order-1]")
    shared_point = scalar_mult(secret, peer_public)
    return digest(shared_point.to_bytes())


@dataclass(frozen=True)
class KeyPair:
    secret: int
    public: Point = field(compare=False)

    @classmethod
    def generate(cls, rng=None) -> "KeyPair":
        if rng is None:
            secret = 1 + secrets.randbelow(CURVE_ORDER - 1)
        else:
            secret = rng.randrange(1, CURVE_ORDER)
        return cls(secret=secret, public=derive_public(secret))

    @property
    def address(self) -> str:
        return address_of(self.public)


# ---------------------------------------------------------------- encodings


def secret_to_hex(secret: int) -> str:
    return "0x" + secret.to_bytes(32, "big").hex()


def secret_from_hex(text: str) -> int:
    raw = bytes.fromhex(text.removeprefix("0x"))
    if len(raw) != 32:
        raise InvalidScalar(f"expected 32 bytes of secret, got {len(raw)}")
    value = int.from_bytes(raw, "big")
    if not (1 <= value < CURVE_ORDER):
        raise InvalidScalar("secret must be in [1, order-1]")
    return value


def public_to_hex(public: Point) -> str:
    return "0x" + public.to_bytes().hex()


def public_from_hex(text: str) -> Point:
    return Point.from_bytes(bytes.fromhex(text.removeprefix("0x")))
