"""ECDSA sign/recover behaviour."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fogtrust import keys, signing
from fogtrust.curve import CURVE_ORDER
from fogtrust.errors import InvalidScalar, InvalidSignature, RecoveryFailed

messages = st.binary(min_size=0, max_size=256)


def test_recover_returns_signer_public_point():
    rng = random.Random(1)
    for _ in range(25):
        secret = rng.randrange(1, CURVE_ORDER)
        message = rng.randbytes(rng.randrange(1, 64))
        sig = signing.sign(message, secret, rng)
        assert signing.recover(message, sig) == keys.derive_public(secret)


@settings(max_examples=15, deadline=None)
@given(messages, st.integers(min_value=1, max_value=CURVE_ORDER - 1))
def test_recover_roundtrip_property(message, secret):
    sig = signing.sign(message, secret, random.Random(0))
    assert signing.recover(message, sig) == keys.derive_public(secret)


def test_signing_is_deterministic_given_rng():
    sig1 = signing.sign(b"payload", 777, random.Random(9))
    sig2 = signing.sign(b"payload", 777, random.Random(9))
    assert sig1 == sig2


def test_recovery_over_wrong_message_yields_other_identity():
    rng = random.Random(2)
    secret = rng.randrange(1, CURVE_ORDER)
    sig = signing.sign(b"original", secret, rng)
    genuine = keys.address_of(keys.derive_public(secret))
    try:
        other = signing.recover(b"tampered", sig)
    except RecoveryFailed:
        return
    assert keys.address_of(other) != genuine


def test_sign_rejects_bad_secret():
    for bad in (0, CURVE_ORDER):
        with pytest.raises(InvalidScalar):
            signing.sign(b"x", bad)


def test_recover_rejects_out_of_range_fields():
    rng = random.Random(3)
    sig = signing.sign(b"x", 555, rng)
    for broken in (
        signing.Signature(0, sig.s, sig.recovery_hint),
        signing.Signature(sig.r, 0, sig.recovery_hint),
        signing.Signature(CURVE_ORDER, sig.s, sig.recovery_hint),
        signing.Signature(sig.r, CURVE_ORDER, sig.recovery_hint),
        signing.Signature(sig.r, sig.s, 4),
    ):
        with pytest.raises(InvalidSignature):
            signing.recover(b"x", broken)


def test_signature_bytes_roundtrip():
    sig = signing.sign(b"frame", 31337, random.Random(4))
    raw = sig.to_bytes()
    assert len(raw) == 65
    assert signing.Signature.from_bytes(raw) == sig
    with pytest.raises(InvalidSignature):
        signing.Signature.from_bytes(raw[:64])
