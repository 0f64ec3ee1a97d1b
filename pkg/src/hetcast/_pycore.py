"""Pure-Python kernels.

Mirrors the compiled ``_ccore`` extension function for function, so either can
back :mod:`hetcast.kernels`. Stream definitions (bit-exact across backends):

* ``splitmix64(x)``: add 0x9E3779B97F4A7C15, then xor-shift-multiply by
  0xBF58476D1CE4E5B9 (shift 30) and 0x94D049BB133111EB (shift 27), final
  xor-shift 31, all modulo 2**64.
* ``mix(a, b) = splitmix64(a ^ splitmix64(b))``.
* ``Xorshift64Star(seed)``: state ``splitmix64(seed)`` (0 replaced by
  0x9E3779B97F4A7C15); step ``x ^= x >> 12; x ^= x << 25; x ^= x >> 27``,
  output ``x * 0x2545F4914F6CDD1D``. ``random()`` is ``(out >> 11) / 2**53``;
  ``below(n)`` rejects outputs under ``2**64 mod n`` and returns ``out % n``.
* ``expand_indices(seed, d, n)``: generator ``Xorshift64Star(mix(seed, d))``;
  Floyd sampling when ``2d <= n``, else a partial Fisher-Yates shuffle of
  ``0..n-1``; result sorted ascending.
"""

from collections import deque

import numpy as np

from ._gftables import INV_TABLE, MUL_TABLE
from .errors import CorruptStreamError, UsageError

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x):
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix(a, b):
    return splitmix64((a & MASK64) ^ splitmix64(b & MASK64))


class Xorshift64Star:
    __slots__ = ("state",)

    def __init__(self, seed):
        s = splitmix64(seed & MASK64)
        self.state = s if s else GOLDEN

    def next_u64(self):
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def random(self):
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def below(self, n):
        if n <= 0:
            raise UsageError("below() needs n >= 1")
        threshold = (1 << 64) % n
        while True:
            r = self.next_u64()
            if r >= threshold:
                return r % n

    def fill_bytes(self, count):
        out = bytearray()
        while len(out) < count:
            out += self.next_u64().to_bytes(8, "little")
        return bytes(out[:count])


def expand_indices(seed, degree, n):
    if not 1 <= degree <= n:
        raise UsageError(f"degree {degree} outside [1, {n}]")
    if degree == n:
        return list(range(n))
    rng = Xorshift64Star(mix(seed, degree))
    if 2 * degree <= n:
        chosen = set()
        for j in range(n - degree, n):
            t = rng.below(j + 1)
            chosen.add(j if t in chosen else t)
        return sorted(chosen)
    perm = list(range(n))
    for i in range(degree):
        j = i + rng.below(n - i)
        perm[i], perm[j] = perm[j], perm[i]
    return sorted(perm[:degree])


class PeelingDecoder:
    """Belief-propagation (peeling) decoder over GF(2) with a FIFO ripple.

    Payloads are held as little-endian Python ints so xor is one operation.
    """

    def __init__(self, n, payload_bytes):
        self.n = n
        self.payload_bytes = payload_bytes
        self.decoded_count = 0
        self._decoded = bytearray(n)
        self._known = [0] * n
        self._eqs = {}
        self._adj = [[] for _ in range(n)]
        self._next_id = 0
        self._ripple = deque()

    def ingest(self, indices, payload=b""):
        if len(payload) != self.payload_bytes:
            raise UsageError(f"payload has {len(payload)} bytes, expected {self.payload_bytes}")
        value = int.from_bytes(payload, "little") if payload else 0
        decoded = self._decoded
        known = self._known
        rest = []
        for i in indices:
            if not 0 <= i < self.n:
                raise UsageError(f"index {i} outside [0, {self.n})")
            if decoded[i]:
                value ^= known[i]
            else:
                rest.append(i)
        if not rest:
            if value:
                raise CorruptStreamError("redundant packet disagrees with decoded data")
            return 0
        if len(rest) == 1:
            self._ripple.append((rest[0], value))
        else:
            eid = self._next_id
            self._next_id += 1
            self._eqs[eid] = [set(rest), value]
            for i in rest:
                self._adj[i].append(eid)
            return 0
        return self._peel()

    def _peel(self):
        decoded = self._decoded
        known = self._known
        eqs = self._eqs
        adj = self._adj
        ripple = self._ripple
        new = 0
        while ripple:
            i, value = ripple.popleft()
            if decoded[i]:
                if value != known[i]:
                    raise CorruptStreamError(f"conflicting values for packet {i}")
                continue
            decoded[i] = 1
            known[i] = value
            new += 1
            for eid in adj[i]:
                eq = eqs.get(eid)
                if eq is None:
                    continue
                idx = eq[0]
                idx.discard(i)
                eq[1] ^= value
                if len(idx) == 1:
                    del eqs[eid]
                    ripple.append((idx.pop(), eq[1]))
            adj[i] = []
        self.decoded_count += new
        return new

    def is_decoded(self, i):
        return bool(self._decoded[i])

    def decoded_mask(self):
        return bytes(self._decoded)

    def payload(self, i):
        if not self._decoded[i]:
            raise UsageError(f"packet {i} not decoded")
        return self._known[i].to_bytes(self.payload_bytes, "little")

    @property
    def pending_count(self):
        return len(self._eqs)

    def pending_equations(self):
        return [sorted(eq[0]) for eq in self._eqs.values()]


class GF256RowReducer:
    """Incremental reduced row-echelon store over GF(256), rows keyed by pivot."""

    def __init__(self, width, payload_bytes):
        self.width = width
        self.payload_bytes = payload_bytes
        self.rank = 0
        self._rows = np.zeros((width, width + payload_bytes), dtype=np.uint8)
        self._has = np.zeros(width, dtype=bool)

    def add_row(self, coeffs, payload=b""):
        w = self.width
        if len(coeffs) != w:
            raise UsageError(f"row width {len(coeffs)} != {w}")
        if len(payload) != self.payload_bytes:
            raise UsageError(f"payload has {len(payload)} bytes, expected {self.payload_bytes}")
        v = np.empty(w + self.payload_bytes, dtype=np.uint8)
        v[:w] = np.frombuffer(bytes(coeffs), dtype=np.uint8)
        v[w:] = np.frombuffer(bytes(payload), dtype=np.uint8) if self.payload_bytes else 0
        rows = self._rows
        # pivot columns of an RREF store are untouched by reductions on other pivots
        hit = np.flatnonzero(self._has & (v[:w] != 0))
        if hit.size:
            v ^= np.bitwise_xor.reduce(MUL_TABLE[v[hit][:, None], rows[hit]], axis=0)
        nz = np.flatnonzero(v[:w])
        if nz.size == 0:
            if v[w:].any():
                raise CorruptStreamError("dependent row carries a nonzero payload")
            return False
        p = int(nz[0])
        v = MUL_TABLE[INV_TABLE[v[p]]][v]
        others = np.flatnonzero(self._has & (rows[:, p] != 0))
        if others.size:
            rows[others] ^= MUL_TABLE[rows[others, p][:, None], v[None, :]]
        rows[p] = v
        self._has[p] = True
        self.rank += 1
        return True

    def is_decodable(self, j):
        return bool(self._has[j]) and np.count_nonzero(self._rows[j, : self.width]) == 1

    def payload(self, j):
        if not self.is_decodable(j):
            raise UsageError(f"unknown {j} not decodable")
        return self._rows[j, self.width:].tobytes()
