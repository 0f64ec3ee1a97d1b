"""Arithmetic over GF(2) and GF(256), plus an incremental Gaussian-elimination solver.

GF(256) uses the primitive polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11D) with
generator 2, so coefficient streams are reproducible bit-exactly.
"""

from dataclasses import dataclass, field

from ._gftables import EXP, LOG, PRIMITIVE_POLY
from .errors import CorruptStreamError, UsageError
from .kernels import GF256RowReducer

__all__ = [
    "PRIMITIVE_POLY",
    "gf256_mul",
    "gf256_inv",
    "BitVector",
    "GF2Row",
    "gf2_xor_into",
    "GF2Eliminator",
    "GESolution",
    "ge_solve",
]


def gf256_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return EXP[LOG[a] + LOG[b]]


def gf256_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(256)")
    return EXP[255 - LOG[a]]


@dataclass(frozen=True)
class BitVector:
    """Fixed-length GF(2) vector packed into a Python int (bit i = position i)."""

    length: int
    bits: int = 0

    def __post_init__(self):
        if self.length < 0 or self.bits < 0 or self.bits >> self.length:
            raise UsageError("bits do not fit the declared length")

    @classmethod
    def from_indices(cls, length, indices):
        bits = 0
        for i in indices:
            if not 0 <= i < length:
                raise UsageError(f"index {i} outside [0, {length})")
            bits |= 1 << i
        return cls(length, bits)

    def indices(self):
        out, b, i = [], self.bits, 0
        while b:
            if b & 1:
                out.append(i)
            b >>= 1
            i += 1
        return out

    def weight(self):
        return self.bits.bit_count()

    def __xor__(self, other):
        if not isinstance(other, BitVector):
            return NotImplemented
        if other.length != self.length:
            raise UsageError(f"length mismatch: {self.length} vs {other.length}")
        return BitVector(self.length, self.bits ^ other.bits)

    def __getitem__(self, i):
        return (self.bits >> i) & 1


@dataclass(frozen=True)
class GF2Row:
    vector: BitVector
    payload: bytes = b""


def _xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise UsageError(f"payload length mismatch: {len(a)} vs {len(b)}")
    return (int.from_bytes(a, "little") ^ int.from_bytes(b, "little")).to_bytes(len(a), "little")


def gf2_xor_into(dst: GF2Row, src: GF2Row) -> GF2Row:
    """Componentwise xor of coding vectors and payloads; returns the updated row."""
    return GF2Row(dst.vector ^ src.vector, _xor_bytes(dst.payload, src.payload))


class GF2Eliminator:
    """Incremental RREF over GF(2) on packed int rows, keyed by pivot bit."""

    def __init__(self, width, payload_bytes=0):
        self.width = width
        self.payload_bytes = payload_bytes
        self.rank = 0
        self._rows = {}  # pivot -> [bits, payload int]

    def add_row(self, bits, payload=b""):
        if bits >> self.width:
            raise UsageError("row wider than the system")
        value = int.from_bytes(payload, "little") if payload else 0
        for p, (rb, rv) in self._rows.items():
            if (bits >> p) & 1:
                bits ^= rb
                value ^= rv
        if bits == 0:
            if value:
                raise CorruptStreamError("dependent row carries a nonzero payload")
            return False
        p = (bits & -bits).bit_length() - 1
        for row in self._rows.values():
            if (row[0] >> p) & 1:
                row[0] ^= bits
                row[1] ^= value
        self._rows[p] = [bits, value]
        self.rank += 1
        return True

    def is_decodable(self, j):
        row = self._rows.get(j)
        return row is not None and row[0] == 1 << j

    def payload(self, j):
        if not self.is_decodable(j):
            raise UsageError(f"unknown {j} not decodable")
        return self._rows[j][1].to_bytes(self.payload_bytes, "little")


@dataclass
class GESolution:
    rank: int
    decodable: list = field(default_factory=list)
    payloads: dict = field(default_factory=dict)

    def decodable_set(self):
        return {j for j, ok in enumerate(self.decodable) if ok}


def _as_bits(coeffs, width):
    if isinstance(coeffs, BitVector):
        if coeffs.length != width:
            raise UsageError(f"row width {coeffs.length} != {width}")
        return coeffs.bits
    if isinstance(coeffs, int):
        return coeffs
    if len(coeffs) != width:
        raise UsageError(f"row width {len(coeffs)} != {width}")
    bits = 0
    for i, c in enumerate(coeffs):
        if c & 1:
            bits |= 1 << i
    return bits


def _width_of(coeffs):
    if isinstance(coeffs, BitVector):
        return coeffs.length
    return len(coeffs)


def ge_solve(rows, field=2, width=None):
    """Gaussian elimination on ``rows`` of ``(coefficients, payload)``.

    Unknown ``j`` is flagged decodable iff the unit vector ``e_j`` lies in the
    row space; payloads are returned for exactly those unknowns.
    """
    rows = list(rows)
    if not rows:
        w = width or 0
        return GESolution(0, [False] * w, {})
    if width is None:
        first = rows[0][0]
        if isinstance(first, int):
            raise UsageError("width is required for int-packed rows")
        width = _width_of(first)
    pb = len(rows[0][1]) if len(rows[0]) > 1 else 0
    if field == 2:
        solver = GF2Eliminator(width, pb)
        for coeffs, *payload in rows:
            solver.add_row(_as_bits(coeffs, width), payload[0] if payload else b"")
    elif field == 256:
        solver = GF256RowReducer(width, pb)
        for coeffs, *payload in rows:
            solver.add_row(bytes(coeffs), payload[0] if payload else b"")
    else:
        raise UsageError(f"unsupported field size {field}")
    flags = [solver.is_decodable(j) for j in range(width)]
    return GESolution(solver.rank, flags, {j: solver.payload(j) for j in range(width) if flags[j]})
