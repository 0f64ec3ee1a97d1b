"""LT encoding (seeded coding vectors, optional uncoded round) and peeling decoding.

Packet ``t`` of a stream with master seed ``s`` uses seed ``mix(s, t)``: the
degree is the first inverse-CDF draw of ``Xorshift64Star(mix(s, t))`` and the
neighbour set is ``expand_indices(mix(s, t), degree, N)``. Only ``(seed, degree)``
travels with the payload.

Wire layout (little-endian), followed by the payload bytes:

====  =======================================================
tag   body
====  =======================================================
0     systematic: u64 index, u16 degree (=1)
1     LT: u64 seed, u16 degree
2     chunked: u32 chunk id, u16 h, h coefficient bytes
====  =======================================================
"""

import bisect
import struct
from dataclasses import dataclass, field

from .degree_model import DegreeDistribution
from .errors import CorruptStreamError, UsageError
from .kernels import PeelingDecoder, Xorshift64Star, expand_indices, mix

SYSTEMATIC, LT, CHUNKED = "systematic", "lt", "chunked"
_TAGS = {SYSTEMATIC: 0, LT: 1, CHUNKED: 2}
_HEAD_Q = struct.Struct("<BQH")
_HEAD_C = struct.Struct("<BIH")


@dataclass(frozen=True)
class CodedPacket:
    kind: str
    payload: bytes = b""
    index: int = 0
    seed: int = 0
    degree: int = 1
    chunk_id: int = 0
    coeffs: bytes = b""
    # neighbour set cached by the simulator; not part of the wire form
    indices: tuple = field(default=None, compare=False, repr=False)

    def neighbours(self, n):
        if self.kind == SYSTEMATIC:
            return [self.index]
        if self.kind == LT:
            if self.indices is not None:
                return list(self.indices)
            return expand_indices(self.seed, self.degree, n)
        raise UsageError("chunked packets have no GF(2) neighbour set")

    def to_bytes(self):
        if self.kind == CHUNKED:
            return _HEAD_C.pack(2, self.chunk_id, len(self.coeffs)) + bytes(self.coeffs) + self.payload
        key = self.index if self.kind == SYSTEMATIC else self.seed
        return _HEAD_Q.pack(_TAGS[self.kind], key, self.degree) + self.payload

    @classmethod
    def from_bytes(cls, data):
        if not data:
            raise CorruptStreamError("empty packet")
        tag = data[0]
        if tag == 2:
            _, cid, h = _HEAD_C.unpack_from(data)
            off = _HEAD_C.size
            return cls(CHUNKED, bytes(data[off + h:]), chunk_id=cid, coeffs=bytes(data[off:off + h]))
        if tag in (0, 1):
            _, key, deg = _HEAD_Q.unpack_from(data)
            body = bytes(data[_HEAD_Q.size:])
            if tag == 0:
                return cls(SYSTEMATIC, body, index=key, degree=1)
            return cls(LT, body, seed=key, degree=deg)
        raise CorruptStreamError(f"unknown packet tag {tag}")


@dataclass(frozen=True)
class EncoderConfig:
    N: int
    dist: DegreeDistribution
    master_seed: int = 0
    systematic: bool = False

    def __post_init__(self):
        if self.dist.dmax > self.N:
            raise UsageError(f"dmax {self.dist.dmax} exceeds N = {self.N}")


def expand_coding_vector(seed, degree, N):
    """Sorted set of ``degree`` distinct indices in ``[0, N)`` determined by ``seed``."""
    return expand_indices(seed, degree, N)


def sample_degree(dist, rng):
    """Inverse-CDF degree draw; consumes one ``random()`` from ``rng``."""
    cdf = dist.cdf()
    return min(bisect.bisect_right(cdf, rng.random()) + 1, dist.dmax)


def xor_payloads(payloads, indices, size):
    acc = 0
    for i in indices:
        acc ^= int.from_bytes(payloads[i], "little")
    return acc.to_bytes(size, "little")


def lt_packet(master_seed, t, degree, N, payloads, payload_bytes):
    seed = mix(master_seed, t)
    idx = expand_indices(seed, degree, N)
    return CodedPacket(LT, xor_payloads(payloads, idx, payload_bytes), seed=seed, degree=degree, indices=tuple(idx))


def lt_encode_next(config: EncoderConfig, payloads, t):
    if len(payloads) != config.N:
        raise UsageError(f"expected {config.N} payloads, got {len(payloads)}")
    size = len(payloads[0]) if payloads else 0
    if config.systematic and t < config.N:
        return CodedPacket(SYSTEMATIC, bytes(payloads[t]), index=t)
    seed = mix(config.master_seed, t)
    degree = sample_degree(config.dist, Xorshift64Star(seed))
    return lt_packet(config.master_seed, t, degree, config.N, payloads, size)


class BpDecoderState:
    """Peeling decoder for one user; wraps the selected kernel backend."""

    def __init__(self, N, payload_bytes=0):
        self.N = N
        self.payload_bytes = payload_bytes
        self._core = PeelingDecoder(N, payload_bytes)

    @property
    def decoded_count(self):
        return self._core.decoded_count

    def ingest(self, packet: CodedPacket):
        idx = packet.neighbours(self.N)
        if idx and (idx[-1] >= self.N or idx[0] < 0):
            raise UsageError("packet index outside [0, N)")
        return self._core.ingest(idx, packet.payload)

    def ingest_indices(self, indices, payload=b""):
        return self._core.ingest(indices, payload)

    def decoded_set(self):
        mask = self._core.decoded_mask()
        return {i for i in range(self.N) if mask[i]}

    def payload(self, i):
        return self._core.payload(i)

    @property
    def pending_count(self):
        return self._core.pending_count


def bp_ingest(state: BpDecoderState, packet: CodedPacket):
    return state.ingest(packet)
