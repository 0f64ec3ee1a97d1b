# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled kernels; same API and streams as ``hetcast._pycore``."""

from libc.stdint cimport uint8_t, uint64_t, int64_t
from libc.stdlib cimport malloc, calloc, free
from libc.string cimport memcpy, memset
from libcpp.vector cimport vector

from .errors import CorruptStreamError, UsageError

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint8_t EXP[512]
cdef uint8_t LOG[256]
cdef uint8_t INV[256]


cdef void _tables():
    cdef int i, x = 1
    for i in range(255):
        EXP[i] = <uint8_t>x
        LOG[x] = <uint8_t>i
        x <<= 1
        if x & 0x100:
            x ^= 0x11D
    for i in range(255, 512):
        EXP[i] = EXP[i - 255]
    INV[0] = 0
    for i in range(1, 256):
        INV[i] = EXP[255 - LOG[i]]

_tables()


cdef inline uint8_t gmul(uint8_t a, uint8_t b) nogil:
    if a == 0 or b == 0:
        return 0
    return EXP[<int>LOG[a] + <int>LOG[b]]


cdef inline uint64_t _sm64(uint64_t x) nogil:
    cdef uint64_t z = x + GOLDEN
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _mix(uint64_t a, uint64_t b) nogil:
    return _sm64(a ^ _sm64(b))


def splitmix64(x):
    return _sm64(<uint64_t>(x & 0xFFFFFFFFFFFFFFFF))


def mix(a, b):
    return _mix(<uint64_t>(a & 0xFFFFFFFFFFFFFFFF), <uint64_t>(b & 0xFFFFFFFFFFFFFFFF))


cdef inline uint64_t _xs_next(uint64_t *s) nogil:
    cdef uint64_t x = s[0]
    x ^= x >> 12
    x ^= x << 25
    x ^= x >> 27
    s[0] = x
    return x * 0x2545F4914F6CDD1DULL


cdef inline uint64_t _xs_below(uint64_t *s, uint64_t n) nogil:
    cdef uint64_t threshold = (<uint64_t>0 - n) % n
    cdef uint64_t r
    while True:
        r = _xs_next(s)
        if r >= threshold:
            return r % n


cdef class Xorshift64Star:
    cdef public uint64_t state

    def __init__(self, seed):
        cdef uint64_t s = _sm64(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF))
        self.state = s if s != 0 else GOLDEN

    cpdef uint64_t next_u64(self):
        return _xs_next(&self.state)

    cpdef double random(self):
        return (_xs_next(&self.state) >> 11) * (1.0 / 9007199254740992.0)

    cpdef uint64_t below(self, uint64_t n) except? 0:
        if n == 0:
            raise UsageError("below() needs n >= 1")
        return _xs_below(&self.state, n)

    def fill_bytes(self, Py_ssize_t count):
        cdef bytearray out = bytearray(((count + 7) // 8) * 8)
        cdef unsigned char *p = out
        cdef uint64_t v
        cdef Py_ssize_t i
        cdef int k
        for i in range(0, len(out), 8):
            v = _xs_next(&self.state)
            for k in range(8):
                p[i + k] = <unsigned char>((v >> (8 * k)) & 0xFF)
        return bytes(out[:count])


def expand_indices(seed, int degree, int n):
    if degree < 1 or degree > n:
        raise UsageError(f"degree {degree} outside [1, {n}]")
    if degree == n:
        return list(range(n))
    cdef uint64_t s = _sm64(_mix(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF), <uint64_t>degree))
    if s == 0:
        s = GOLDEN
    cdef uint8_t *mark = <uint8_t *>calloc(n, 1)
    cdef int *perm
    cdef int i, j, t, tmp
    try:
        if 2 * degree <= n:
            for j in range(n - degree, n):
                t = <int>_xs_below(&s, <uint64_t>(j + 1))
                if mark[t]:
                    mark[j] = 1
                else:
                    mark[t] = 1
        else:
            perm = <int *>malloc(n * sizeof(int))
            for i in range(n):
                perm[i] = i
            for i in range(degree):
                j = i + <int>_xs_below(&s, <uint64_t>(n - i))
                tmp = perm[i]
                perm[i] = perm[j]
                perm[j] = tmp
            for i in range(degree):
                mark[perm[i]] = 1
            free(perm)
        return [i for i in range(n) if mark[i]]
    finally:
        free(mark)


cdef class PeelingDecoder:
    """Peeling decoder; equations tracked by (remaining count, xor of remaining indices)."""

    cdef public int n
    cdef public int payload_bytes
    cdef public int decoded_count
    cdef vector[uint8_t] _decoded
    cdef vector[uint8_t] _known
    cdef vector[int] _eq_count
    cdef vector[int] _eq_xor
    cdef vector[uint8_t] _eq_payload
    cdef vector[vector[int]] _adj
    cdef vector[int] _rq_index
    cdef vector[uint8_t] _rq_payload
    cdef size_t _rq_head
    cdef int _pending

    def __init__(self, int n, int payload_bytes):
        self.n = n
        self.payload_bytes = payload_bytes
        self.decoded_count = 0
        self._decoded.assign(n, 0)
        self._known.assign(<size_t>n * payload_bytes, 0)
        self._adj.resize(n)
        self._rq_head = 0
        self._pending = 0

    def ingest(self, indices, payload=b""):
        cdef int b = self.payload_bytes
        cdef vector[uint8_t] value
        value.assign(b, 0)
        cdef const unsigned char[:] pv
        cdef int k, i, cnt = 0, xr = 0, last = -1
        if len(payload) != b:
            raise UsageError(f"payload has {len(payload)} bytes, expected {b}")
        for i in indices:
            if i < 0 or i >= self.n:
                raise UsageError(f"index {i} outside [0, {self.n})")
        if b:
            pv = payload
            for k in range(b):
                value[k] = pv[k]
        for i in indices:
            if self._decoded[i]:
                for k in range(b):
                    value[k] ^= self._known[<size_t>i * b + k]
            else:
                cnt += 1
                xr ^= i
                last = i
        if cnt == 0:
            for k in range(b):
                if value[k]:
                    raise CorruptStreamError("redundant packet disagrees with decoded data")
            return 0
        if cnt == 1:
            self._push_ripple(last, value.data())
            return self._peel()
        cdef int eid = <int>self._eq_count.size()
        self._eq_count.push_back(cnt)
        self._eq_xor.push_back(xr)
        for k in range(b):
            self._eq_payload.push_back(value[k])
        for i in indices:
            if not self._decoded[i]:
                self._adj[i].push_back(eid)
        self._pending += 1
        return 0

    cdef void _push_ripple(self, int i, const uint8_t *val):
        cdef int k
        self._rq_index.push_back(i)
        for k in range(self.payload_bytes):
            self._rq_payload.push_back(val[k])

    cdef int _peel(self) except -1:
        cdef int b = self.payload_bytes
        cdef int new = 0, i, k, eid, j
        cdef size_t h, off, eoff, a
        cdef vector[uint8_t] val
        val.assign(b, 0)
        while self._rq_head < self._rq_index.size():
            h = self._rq_head
            self._rq_head += 1
            i = self._rq_index[h]
            off = h * b
            for k in range(b):
                val[k] = self._rq_payload[off + k]
            if self._decoded[i]:
                for k in range(b):
                    if val[k] != self._known[<size_t>i * b + k]:
                        raise CorruptStreamError(f"conflicting values for packet {i}")
                continue
            self._decoded[i] = 1
            for k in range(b):
                self._known[<size_t>i * b + k] = val[k]
            new += 1
            for a in range(self._adj[i].size()):
                eid = self._adj[i][a]
                if self._eq_count[eid] <= 0:
                    continue
                self._eq_count[eid] -= 1
                self._eq_xor[eid] ^= i
                eoff = <size_t>eid * b
                for k in range(b):
                    self._eq_payload[eoff + k] ^= val[k]
                if self._eq_count[eid] == 1:
                    j = self._eq_xor[eid]
                    self._eq_count[eid] = 0
                    self._pending -= 1
                    self._push_ripple(j, &self._eq_payload[eoff] if b else NULL)
            self._adj[i].clear()
        if self._rq_head == self._rq_index.size():
            self._rq_index.clear()
            self._rq_payload.clear()
            self._rq_head = 0
        self.decoded_count += new
        return new

    def is_decoded(self, int i):
        return bool(self._decoded[i])

    def decoded_mask(self):
        return bytes([self._decoded[i] for i in range(self.n)])

    def payload(self, int i):
        if not self._decoded[i]:
            raise UsageError(f"packet {i} not decoded")
        cdef int b = self.payload_bytes
        return bytes([self._known[<size_t>i * b + k] for k in range(b)])

    @property
    def pending_count(self):
        return self._pending

    def pending_equations(self):
        # index sets are not stored; rebuild from adjacency
        cdef dict eqs = {}
        cdef int i
        cdef size_t a
        for i in range(self.n):
            for a in range(self._adj[i].size()):
                eid = self._adj[i][a]
                if self._eq_count[eid] > 0:
                    eqs.setdefault(eid, []).append(i)
        return [sorted(v) for v in eqs.values()]


cdef class GF256RowReducer:
    """Incremental RREF store over GF(256), rows keyed by pivot column."""

    cdef public int width
    cdef public int payload_bytes
    cdef public int rank
    cdef int stride
    cdef vector[uint8_t] _rows
    cdef vector[uint8_t] _has
    cdef vector[uint8_t] _tmp

    def __init__(self, int width, int payload_bytes):
        self.width = width
        self.payload_bytes = payload_bytes
        self.rank = 0
        self.stride = width + payload_bytes
        self._rows.assign(<size_t>width * self.stride, 0)
        self._has.assign(width, 0)
        self._tmp.assign(self.stride, 0)

    def add_row(self, coeffs, payload=b""):
        cdef int w = self.width
        if len(coeffs) != w:
            raise UsageError(f"row width {len(coeffs)} != {w}")
        cdef const unsigned char[:] cv = bytes(coeffs)
        cdef const unsigned char[:] pv
        cdef int k
        if len(payload) != self.payload_bytes:
            raise UsageError(f"payload has {len(payload)} bytes, expected {self.payload_bytes}")
        for k in range(w):
            self._tmp[k] = cv[k]
        if self.payload_bytes:
            pv = bytes(payload)
            for k in range(self.payload_bytes):
                self._tmp[w + k] = pv[k]
        return self._reduce()

    cdef bint _reduce(self) except -1:
        cdef int w = self.width, st = self.stride
        cdef uint8_t *v = self._tmp.data()
        cdef uint8_t *rows = self._rows.data()
        cdef uint8_t c, inv
        cdef uint8_t *r
        cdef int col, k, p = -1, other
        cdef int lc
        for col in range(w):
            c = v[col]
            if c == 0:
                continue
            if self._has[col]:
                r = rows + <size_t>col * st
                lc = LOG[c]
                for k in range(col, st):
                    if r[k]:
                        v[k] ^= EXP[lc + LOG[r[k]]]
            elif p < 0:
                p = col
        if p < 0:
            for k in range(w, st):
                if v[k]:
                    raise CorruptStreamError("dependent row carries a nonzero payload")
            return False
        inv = INV[v[p]]
        lc = LOG[inv]
        for k in range(p, st):
            if v[k]:
                v[k] = EXP[lc + LOG[v[k]]]
        for other in range(w):
            if not self._has[other]:
                continue
            r = rows + <size_t>other * st
            c = r[p]
            if c == 0:
                continue
            lc = LOG[c]
            for k in range(p, st):
                if v[k]:
                    r[k] ^= EXP[lc + LOG[v[k]]]
        memcpy(rows + <size_t>p * st, v, st)
        self._has[p] = 1
        self.rank += 1
        return True

    def is_decodable(self, int j):
        if not self._has[j]:
            return False
        cdef uint8_t *r = self._rows.data() + <size_t>j * self.stride
        cdef int k
        for k in range(self.width):
            if k != j and r[k]:
                return False
        return True

    def payload(self, int j):
        if not self.is_decodable(j):
            raise UsageError(f"unknown {j} not decodable")
        cdef size_t off = <size_t>j * self.stride + self.width
        return bytes([self._rows[off + k] for k in range(self.payload_bytes)])
