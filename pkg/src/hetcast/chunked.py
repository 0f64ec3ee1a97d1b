"""Chunked random linear coding over GF(256).

The ``N`` packets form ``n`` chunks of ``h``. Each transmission picks a chunk
uniformly and a uniform coefficient row for it; a chunk decodes once its
received rows reach rank ``h``.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._gftables import MUL_TABLE
from .degree_model import AnalysisResult
from .errors import CorruptStreamError, UsageError
from .galois import GF2Eliminator
from .kernels import GF256RowReducer, Xorshift64Star, mix
from .lt_codec import CHUNKED, CodedPacket
from .special import adaptive_simpson, gamma_pq

DEFAULT_QUAD_TOL = 1e-8


@dataclass(frozen=True)
class ChunkConfig:
    n: int
    h: int
    q: int = 256

    def __post_init__(self):
        if self.n < 1 or self.h < 1:
            raise UsageError("chunk count and chunk size must be >= 1")
        if self.q not in (2, 256):
            raise UsageError("field size must be 2 or 256")

    @property
    def N(self):
        return self.n * self.h

    @classmethod
    def for_packets(cls, N, h, q=256):
        if N % h:
            raise UsageError(f"chunk size {h} does not divide N = {N}")
        return cls(N // h, h, q)


class ChunkEncoder:
    def __init__(self, config, payloads):
        if len(payloads) != config.N:
            raise UsageError(f"expected {config.N} payloads, got {len(payloads)}")
        self.config = config
        self.payload_bytes = len(payloads[0]) if payloads else 0
        flat = np.frombuffer(b"".join(bytes(p) for p in payloads), dtype=np.uint8)
        self._data = flat.reshape(config.n, config.h, self.payload_bytes)

    def draw(self, rng):
        """Chunk id and coefficient row, consuming ``rng``."""
        cfg = self.config
        chunk = int(rng.below(cfg.n))
        coeffs = rng.fill_bytes(cfg.h)
        if cfg.q == 2:
            coeffs = bytes(c & 1 for c in coeffs)
        return chunk, coeffs

    def combine(self, chunk, coeffs):
        if not self.payload_bytes:
            return b""
        c = np.frombuffer(coeffs, dtype=np.uint8)
        return np.bitwise_xor.reduce(MUL_TABLE[c[:, None], self._data[chunk]], axis=0).tobytes()

    def next(self, rng):
        chunk, coeffs = self.draw(rng)
        return CodedPacket(CHUNKED, self.combine(chunk, coeffs), chunk_id=chunk, coeffs=coeffs)

    def packet(self, master_seed, t):
        return self.next(Xorshift64Star(mix(master_seed, t)))


def chunk_encode_next(config, payloads, rng):
    return ChunkEncoder(config, payloads).next(rng)


class _GF2Rows:
    """GF(2) chunk store with the GF256RowReducer interface (coefficients as bytes)."""

    def __init__(self, width, payload_bytes):
        self._e = GF2Eliminator(width, payload_bytes)
        self.width = width

    @property
    def rank(self):
        return self._e.rank

    def add_row(self, coeffs, payload=b""):
        bits = 0
        for i, c in enumerate(coeffs):
            if c & 1:
                bits |= 1 << i
        return self._e.add_row(bits, payload)

    def is_decodable(self, j):
        return self._e.is_decodable(j)

    def payload(self, j):
        return self._e.payload(j)


class ChunkDecoderState:
    def __init__(self, config, payload_bytes=0):
        self.config = config
        self.payload_bytes = payload_bytes
        make = GF256RowReducer if config.q == 256 else _GF2Rows
        self._chunks = [make(config.h, payload_bytes) for _ in range(config.n)]
        self.decoded = [False] * config.n
        self.decoded_chunks = 0

    @property
    def decoded_count(self):
        return self.decoded_chunks * self.config.h

    def rank(self, chunk):
        return self._chunks[chunk].rank

    def ingest(self, packet):
        cid = packet.chunk_id
        if not 0 <= cid < self.config.n:
            raise UsageError(f"chunk id {cid} outside [0, {self.config.n})")
        if len(packet.coeffs) != self.config.h:
            raise UsageError("coefficient row width differs from the chunk size")
        store = self._chunks[cid]
        if self.decoded[cid]:
            # full rank: any row is dependent; still check consistency
            store.add_row(packet.coeffs, packet.payload)
            return []
        store.add_row(packet.coeffs, packet.payload)
        if store.rank == self.config.h:
            self.decoded[cid] = True
            self.decoded_chunks += 1
            return [cid]
        return []

    def chunk_payloads(self, chunk):
        if not self.decoded[chunk]:
            raise UsageError(f"chunk {chunk} not decoded")
        store = self._chunks[chunk]
        return [store.payload(j) for j in range(self.config.h)]


def chunk_ingest(state, packet):
    return state.ingest(packet)


def not_done_probability(x, n, k, h):
    """P(fewer than ``k`` of ``n`` chunks complete) at Poissonized time ``x``.

    A chunk is incomplete with probability ``g = Q(h, x)``; the sum over
    ``j < k`` complete chunks is evaluated term by term in log space.
    """
    p, g = gamma_pq(h, x)
    if p <= 0.0:
        return 1.0
    if g <= 0.0:
        return 0.0
    j = np.arange(k)
    log_c = _log_comb(n)[:k]
    terms = np.exp(log_c + (n - j) * math.log(g) + j * math.log(p))
    return float(min(1.0, terms.sum()))


@lru_cache(maxsize=64)
def _log_comb(n):
    j = np.arange(n + 1)
    from math import lgamma

    return np.array([lgamma(n + 1) - lgamma(i + 1) - lgamma(n - i + 1) for i in j])


@lru_cache(maxsize=8192)
def _lossless_expectation(n, k, h, quad_tol):
    f = lambda x: not_done_probability(x, n, k, h)  # noqa: E731
    x_max = h + 12.0 * math.sqrt(h) + 30.0 * math.log(n)
    # stretch until the neglected tail is far below the tolerance
    while n * f(x_max) * (x_max + 1.0) > 1e-3 * quad_tol:
        x_max *= 1.25
    return n * adaptive_simpson(f, 0.0, x_max, quad_tol / n)


def expected_delivery_chunked(n, k, h, eps, quad_tol=DEFAULT_QUAD_TOL):
    """Expected transmissions until ``k`` of ``n`` chunks of size ``h`` are decodable."""
    if not 1 <= k <= n:
        raise UsageError(f"k={k} outside [1, n={n}]")
    if not 0 <= eps < 1:
        raise UsageError(f"eps={eps} outside [0, 1)")
    return _lossless_expectation(n, k, h, quad_tol) / (1.0 - eps)


def chunks_needed(z, n):
    return min(n, max(1, math.ceil(z * n - 1e-9)))


def chunked_analysis(scenario, config, quad_tol=DEFAULT_QUAD_TOL):
    if config.N != scenario.N:
        raise UsageError(f"chunk layout covers {config.N} packets, scenario has {scenario.N}")
    t = tuple(
        expected_delivery_chunked(config.n, chunks_needed(u.z, config.n), config.h, u.eps, quad_tol) / scenario.N
        for u in scenario.users
    )
    return AnalysisResult(t, "chunked")


def chunk_size_candidates(N):
    if N & (N - 1) == 0:
        return [1 << i for i in range(N.bit_length())]
    return [d for d in range(1, N + 1) if N % d == 0]


def best_chunk_size(scenario, quad_tol=DEFAULT_QUAD_TOL):
    """Minimize the analytic server time over chunk sizes; returns ``(h, t0, table)``."""
    table = []
    for h in chunk_size_candidates(scenario.N):
        res = chunked_analysis(scenario, ChunkConfig.for_packets(scenario.N, h), quad_tol)
        table.append((h, res.t0, res.t))
    h, t0, _ = min(table, key=lambda row: (row[1], row[0]))
    return h, t0, table
