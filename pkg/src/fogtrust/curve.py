"""secp256k1 arithmetic.

Affine points at the API surface, Jacobian coordinates internally. Scalar
multiplication uses a 4-bit windowed ladder; points that get multiplied
repeatedly (the generator, ring members under test harnesses, long-lived
agent keys) transparently switch to a precomputed per-window table, which
is roughly five times faster per multiplication on this interpreter.

Infinity is represented as None at the public API; it never appears as a
stored key or signature component.
"""

from __future__ import annotations

from .errors import InvalidPoint

try:
    # gmpy2 halves the cost of the 256-bit modular arithmetic below;
    # everything still works on plain ints if it is unavailable
    from gmpy2 import mpz as _bignum
except ImportError:  # pragma: no cover
    _bignum = int

FIELD_PRIME = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F
CURVE_ORDER = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
CURVE_B = 7

_PRIME = _bignum(FIELD_PRIME)
_ONE = _bignum(1)

_WINDOW_BITS = 5
_WINDOW_COUNT = 52  # ceil(256 / 5)
_WINDOW_MASK = 31
_TABLE_AFTER_USES = 3


class Point:
    """A point on secp256k1 (never infinity)."""

    __slots__ = ("x", "y", "_table", "_uses")

    def __init__(self, x: int, y: int):
        if not isinstance(x, int) or not isinstance(y, int):
            raise InvalidPoint("coordinates must be integers")
        if not (0 <= x < FIELD_PRIME and 0 <= y < FIELD_PRIME):
            raise InvalidPoint("coordinate out of field range")
        if (y * y - (x * x * x + CURVE_B)) % FIELD_PRIME:
            raise InvalidPoint("point not on curve")
        self.x = x
        self.y = y
        self._table = None
        self._uses = 0

    def __eq__(self, other):
        return isinstance(other, Point) and self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __repr__(self):
        return f"Point(x={self.x:#x}, y={self.y:#x})"

    def to_bytes(self) -> bytes:
        """64-byte big-endian x || y."""
        return self.x.to_bytes(32, "big") + self.y.to_bytes(32, "big")

    @classmethod
    def from_bytes(cls, raw: bytes) -> "Point":
        if len(raw) != 64:
            raise InvalidPoint(f"expected 64 bytes, got {len(raw)}")
        return cls(int.from_bytes(raw[:32], "big"), int.from_bytes(raw[32:], "big"))


# ------------------------------------------------------------------
# Jacobian helpers. A Jacobian point is a tuple (X, Y, Z) with Z != 0;
# infinity is None. secp256k1 has odd order, so no finite point has
# y == 0 and doubling a finite point never yields infinity.
# ------------------------------------------------------------------


def _j_double(pt):
    if pt is None:
        return None
    X1, Y1, Z1 = pt
    p = _PRIME
    YY = Y1 * Y1 % p
    S = 4 * X1 * YY % p
    M = 3 * X1 * X1 % p
    X3 = (M * M - 2 * S) % p
    Y3 = (M * (S - X3) - 8 * YY * YY) % p
    Z3 = 2 * Y1 * Z1 % p
    return (X3, Y3, Z3)


def _j_add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    p = _PRIME
    X1, Y1, Z1 = a
    X2, Y2, Z2 = b
    Z1Z1 = Z1 * Z1 % p
    Z2Z2 = Z2 * Z2 % p
    U1 = X1 * Z2Z2 % p
    U2 = X2 * Z1Z1 % p
    S1 = Y1 * Z2 * Z2Z2 % p
    S2 = Y2 * Z1 * Z1Z1 % p
    if U1 == U2:
        if S1 != S2:
            return None
        return _j_double(a)
    H = (U2 - U1) % p
    I = 4 * H * H % p
    J = H * I % p
    r = 2 * (S2 - S1) % p
    V = U1 * I % p
    X3 = (r * r - J - 2 * V) % p
    Y3 = (r * (V - X3) - 2 * S1 * J) % p
    Z3 = ((Z1 + Z2) * (Z1 + Z2) - Z1Z1 - Z2Z2) % p * H % p
    return (X3, Y3, Z3)


def _j_to_affine(pt):
    if pt is None:
        return None
    X, Y, Z = pt
    p = _PRIME
    zinv = pow(Z, -1, p)
    zinv2 = zinv * zinv % p
    return (int(X * zinv2 % p), int(Y * zinv2 % p * zinv % p))


def _batch_to_affine(points):
    """Normalize many Jacobian points with a single field inversion."""
    zs = [pt[2] for pt in points]
    prefix = [_bignum(1)] * (len(zs) + 1)
    p = _PRIME
    for i, z in enumerate(zs):
        prefix[i + 1] = prefix[i] * z % p
    inv = pow(prefix[-1], -1, p)
    out = [None] * len(points)
    for i in range(len(points) - 1, -1, -1):
        zinv = inv * prefix[i] % p
        inv = inv * zs[i] % p
        X, Y, _ = points[i]
        zinv2 = zinv * zinv % p
        out[i] = (X * zinv2 % p, Y * zinv2 % p * zinv % p)
    return out


def _build_window_table(x, y):
    """Per-window multiples d * 32^w * P as affine pairs, d in 1..31."""
    per_row = _WINDOW_MASK  # nonzero digits per window
    flat = []
    base = (_bignum(x), _bignum(y), _bignum(1))
    for _ in range(_WINDOW_COUNT):
        entry = base
        flat.append(entry)
        for _ in range(per_row - 1):
            entry = _j_add(entry, base)
            flat.append(entry)
        for _ in range(_WINDOW_BITS):
            base = _j_double(base)
    affine = _batch_to_affine(flat)
    # index d within a row maps to d * 32^w * P; slot 0 stays unused
    return [[None] + affine[w * per_row:(w + 1) * per_row]
            for w in range(_WINDOW_COUNT)]


def _table_mult(k, table):
    # the _madd body is inlined here: this loop dominates every warm
    # signature/verification path and the call overhead is measurable
    p = _PRIME
    acc = None
    w = 0
    while k:
        digit = k & _WINDOW_MASK
        if digit:
            ax, ay = table[w][digit]
            if acc is None:
                acc = (ax, ay, _ONE)
            else:
                X1, Y1, Z1 = acc
                ZZ = Z1 * Z1 % p
                U2 = ax * ZZ % p
                S2 = ay * Z1 * ZZ % p
                if U2 == X1:
                    acc = None if S2 != Y1 else _j_double(acc)
                else:
                    H = (U2 - X1) % p
                    HH = H * H % p
                    I = 4 * HH % p
                    J = H * I % p
                    r = 2 * (S2 - Y1) % p
                    V = X1 * I % p
                    X3 = (r * r - J - 2 * V) % p
                    Y3 = (r * (V - X3) - 2 * Y1 * J) % p
                    Z3 = ((Z1 + H) * (Z1 + H) - ZZ - HH) % p
                    acc = (X3, Y3, Z3)
        k >>= _WINDOW_BITS
        w += 1
    return acc


def _ladder_mult(k, x, y):
    """4-bit windowed ladder for points without a cached table."""
    base = (_bignum(x), _bignum(y), _bignum(1))
    multiples = [None, base]
    entry = base
    for _ in range(14):
        entry = _j_add(entry, base)
        multiples.append(entry)

    p = _PRIME
    nwindows = (k.bit_length() + 3) // 4
    acc = None
    for w in range(nwindows - 1, -1, -1):
        if acc is not None:
            for _ in range(4):
                X1, Y1, Z1 = acc
                YY = Y1 * Y1 % p
                S = 4 * X1 * YY % p
                M = 3 * X1 * X1 % p
                X3 = (M * M - 2 * S) % p
                Y3 = (M * (S - X3) - 8 * YY * YY) % p
                acc = (X3, Y3, 2 * Y1 * Z1 % p)
        digit = (k >> (4 * w)) & 15
        if digit:
            acc = _j_add(acc, multiples[digit])
    return acc


def scalar_mult(k: int, point: Point):
    """k * point, or None when k is a multiple of the group order."""
    k %= CURVE_ORDER
    if k == 0:
        return None
    if point._table is None:
        point._uses += 1
        if point._uses >= _TABLE_AFTER_USES:
            point._table = _build_window_table(point.x, point.y)
    if point._table is not None:
        raw = _table_mult(k, point._table)
    else:
        raw = _ladder_mult(k, point.x, point.y)
    affine = _j_to_affine(raw)
    if affine is None:
        return None
    return Point(affine[0], affine[1])


def point_add(a, b):
    """Affine addition; None is the identity."""
    if a is None:
        return b
    if b is None:
        return a
    p = FIELD_PRIME
    if a.x == b.x and (a.y + b.y) % p == 0:
        return None
    if a.x == b.x:
        lam = 3 * a.x * a.x * pow(2 * a.y, -1, p) % p
    else:
        lam = (b.y - a.y) * pow(b.x - a.x, -1, p) % p
    x3 = (lam * lam - a.x - b.x) % p
    y3 = (lam * (a.x - x3) - a.y) % p
    return Point(x3, y3)


def point_neg(point):
    if point is None:
        return None
    return Point(point.x, (-point.y) % FIELD_PRIME)


GENERATOR = Point(
    0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798,
    0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8,
)
# the generator is multiplied constantly; build its table eagerly
GENERATOR._table = _build_window_table(GENERATOR.x, GENERATOR.y)
