"""Authenticated encryption wrapper."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fogtrust import aead
from fogtrust.errors import DecryptionFailed

KEY = bytes(range(32))
OTHER_KEY = bytes(range(1, 33))


def test_roundtrip():
    blob = aead.encrypt(KEY, b"service result")
    assert aead.decrypt(KEY, blob) == b"service result"


def test_empty_plaintext_roundtrip():
    blob = aead.encrypt(KEY, b"")
    assert aead.decrypt(KEY, blob) == b""
    assert len(blob) == aead.NONCE_BYTES + aead.TAG_BYTES


def test_wrong_key_fails():
    blob = aead.encrypt(KEY, b"secret")
    with pytest.raises(DecryptionFailed):
        aead.decrypt(OTHER_KEY, blob)


def test_truncated_blob_fails():
    with pytest.raises(DecryptionFailed):
        aead.decrypt(KEY, b"\x00" * (aead.NONCE_BYTES + aead.TAG_BYTES - 1))


@settings(max_examples=40)
@given(st.binary(min_size=1, max_size=128), st.data())
def test_any_single_bit_flip_is_rejected(plaintext, data):
    blob = aead.encrypt(KEY, plaintext, random.Random(0))
    position = data.draw(st.integers(min_value=0, max_value=len(blob) * 8 - 1))
    byte_index, bit = divmod(position, 8)
    tampered = bytearray(blob)
    tampered[byte_index] ^= 1 << bit
    with pytest.raises(DecryptionFailed):
        aead.decrypt(KEY, bytes(tampered))


def test_nonces_differ_between_encryptions():
    one = aead.encrypt(KEY, b"x")
    two = aead.encrypt(KEY, b"x")
    assert one[:aead.NONCE_BYTES] != two[:aead.NONCE_BYTES]


def test_deterministic_with_injected_rng():
    one = aead.encrypt(KEY, b"x", random.Random(6))
    two = aead.encrypt(KEY, b"x", random.Random(6))
    assert one == two


def test_key_length_enforced():
    with pytest.raises(ValueError):
        aead.encrypt(b"short", b"x")
    with pytest.raises(ValueError):
        aead.decrypt(b"short", b"\x00" * 28)
