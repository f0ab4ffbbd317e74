"""Ring signatures over secp256k1.

A ring signature proves that one of n listed public keys signed the message
without revealing which. Construction: the signer at position j picks a
random q and sets T_j = q * G, then walks the ring cyclically from j+1,
deriving each challenge from the previous commitment's x-coordinate,

    c_i = H(message || x_{i-1})  (mod order)
    T_i = sigma_i * G + c_i * P_i      with random sigma_i

and finally closes the loop at the signer's own slot:

    sigma_j = q - c_j * k_j  (mod order)

which makes T_j = sigma_j * G + c_j * P_j = q * G hold for the verifier.
The published signature is (c_0, sigma_0..sigma_{n-1}, P_0..P_{n-1}); the
verifier rebuilds the whole commitment chain and accepts iff it closes back
to the published first challenge.
"""

from __future__ import annotations

import json
import secrets
from dataclasses import dataclass
from typing import Sequence

from .constants import digest
from .curve import CURVE_ORDER, GENERATOR, Point, point_add, scalar_mult
from .errors import MalformedRingSignature, RingTooSmall, SignerMismatch
from .keys import derive_public, public_from_hex, public_to_hex

MIN_RING = 2


@dataclass(frozen=True)
class RingSignature:
    challenge: int                 # c_0, the chain seed the verifier closes on
    responses: tuple               # sigma_i, one per ring slot
    ring: tuple                    # public points, order matters

    def to_json(self) -> str:
        return json.dumps({
            "challenge": hex(self.challenge),
            "responses": [hex(s) for s in self.responses],
            "ring": [public_to_hex(p) for p in self.ring],
        })

    @classmethod
    def from_json(cls, text: str) -> "RingSignature":
        try:
            data = json.loads(text)
            return cls(
                challenge=int(data["challenge"], 16),
                responses=tuple(int(s, 16) for s in data["responses"]),
                ring=tuple(public_from_hex(p) for p in data["ring"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRingSignature(str(exc)) from exc


def _chain_challenge(message: bytes, commitment_x: int) -> int:
    payload = message + commitment_x.to_bytes(32, "big")
    return int.from_bytes(digest(payload), "big") % CURVE_ORDER


def _check_ring(ring: Sequence[Point]) -> None:
    if len(ring) < MIN_RING:
        raise RingTooSmall(f"need at least {MIN_RING} members, got {len(ring)}")
    seen = set()
    for p in ring:
        if not isinstance(p, Point):
            raise MalformedRingSignature("ring members must be curve points")
        if (p.x, p.y) in seen:
            raise MalformedRingSignature("duplicate ring member")
        seen.add((p.x, p.y))


def ring_sign(message: bytes, ring: Sequence[Point], signer_index: int,
              secret: int, rng=None) -> RingSignature:
    _check_ring(ring)
    n = len(ring)
    if not (0 <= signer_index < n):
        raise SignerMismatch(f"signer index {signer_index} outside ring of {n}")
    if derive_public(secret) != ring[signer_index]:
        raise SignerMismatch("secret key does not match the ring slot")

    def rand_scalar():
        if rng is None:
            return 1 + secrets.randbelow(CURVE_ORDER - 1)
        return rng.randrange(1, CURVE_ORDER)

    j = signer_index
    commitments = [None] * n
    responses = [0] * n
    challenges = [0] * n

    q = rand_scalar()
    commitments[j] = scalar_mult(q, GENERATOR)

    # walk j+1, j+2, ..., wrapping, until the slot before j
    for step in range(1, n):
        i = (j + step) % n
        prev = (i - 1) % n
        challenges[i] = _chain_challenge(message, commitments[prev].x)
        while True:
            responses[i] = rand_scalar()
            commitment = point_add(scalar_mult(responses[i], GENERATOR),
                                   scalar_mult(challenges[i], ring[i]))
            if commitment is not None:
                break
        commitments[i] = commitment

    challenges[j] = _chain_challenge(message, commitments[(j - 1) % n].x)
    responses[j] = (q - challenges[j] * secret) % CURVE_ORDER

    return RingSignature(challenge=challenges[0],
                         responses=tuple(responses),
                         ring=tuple(ring))


def ring_verify(message: bytes, signature: RingSignature) -> bool:
    ring = signature.ring
    _check_ring(ring)
    responses = signature.responses
    if len(responses) != len(ring):
        raise MalformedRingSignature("one response required per ring member")
    if not (0 <= signature.challenge < CURVE_ORDER):
        raise MalformedRingSignature("challenge out of range")
    for s in responses:
        if not isinstance(s, int) or not (0 <= s < CURVE_ORDER):
            raise MalformedRingSignature("response out of range")

    challenge = signature.challenge
    commitment = point_add(scalar_mult(responses[0], GENERATOR),
                           scalar_mult(challenge, ring[0]))
    if commitment is None:
        return False
    for i in range(1, len(ring)):
        c_i = _chain_challenge(message, commitment.x)
        commitment = point_add(scalar_mult(responses[i], GENERATOR),
                               scalar_mult(c_i, ring[i]))
        if commitment is None:
            return False
    return _chain_challenge(message, commitment.x) == signature.challenge
