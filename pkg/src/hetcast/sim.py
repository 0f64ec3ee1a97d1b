"""Monte-Carlo broadcast: one coded stream, independent memoryless erasures per user.

Seeds for run ``r`` under master seed ``s``: ``run = mix(s, r)``; content from
``Xorshift64Star(mix(run, 1))``; packet stream master seed ``mix(run, 2)``;
erasures of user ``i`` from ``Xorshift64Star(mix(mix(run, 3), i))``, one draw
per transmission (so adding a user never changes another user's losses).
"""

import bisect
import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chunked import ChunkConfig, ChunkDecoderState, ChunkEncoder
from .degree_model import DegreeDistribution, Scenario
from .errors import CorruptStreamError, UsageError
from .growth import GrowthSchedule
from .kernels import PeelingDecoder, Xorshift64Star, expand_indices, mix

SCHEMES = ("lt", "lt-sys", "growth", "chunked")
DEFAULT_CAP_MULTIPLIER = 50.0


@dataclass(frozen=True)
class SchemeParams:
    dist: DegreeDistribution = None
    schedule: GrowthSchedule = None
    chunks: ChunkConfig = None

    def validate(self, scheme, scenario):
        if scheme not in SCHEMES:
            raise UsageError(f"unknown scheme {scheme!r}; expected one of {', '.join(SCHEMES)}")
        if scheme in ("lt", "lt-sys"):
            if self.dist is None:
                raise UsageError(f"scheme {scheme} needs a degree distribution")
            if self.dist.dmax > scenario.N:
                raise UsageError("distribution dmax exceeds N")
        elif scheme == "growth":
            if self.schedule is None:
                raise UsageError("scheme growth needs a schedule")
            if self.schedule.N != scenario.N:
                raise UsageError("growth schedule built for a different N")
        elif self.chunks is None:
            raise UsageError("scheme chunked needs a chunk configuration")
        elif self.chunks.N != scenario.N:
            raise UsageError("chunk layout does not cover N packets")


@dataclass
class SimTrace:
    decoded: list  # per user: np.ndarray, decoded count after each transmission
    delivery: list  # per user: T_i (packets sent) or None when capped
    transmissions_sent: int
    need: list
    complete: bool

    @property
    def server_delivery(self):
        return max(self.delivery) if self.complete else None

    def fractions(self, N):
        return [d / N for d in self.decoded]

    def to_csv(self, N):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["transmission_index"] + [f"user{i}" for i in range(len(self.decoded))])
        for t in range(self.transmissions_sent):
            w.writerow([t + 1] + [f"{d[t] / N:.6f}" for d in self.decoded])
        return buf.getvalue()


class _ChannelModel:
    def __init__(self, run_seed, eps_list):
        base = mix(run_seed, 3)
        self.eps = list(eps_list)
        self.rngs = [Xorshift64Star(mix(base, i)) for i in range(len(eps_list))]

    def arrivals(self):
        return [rng.random() >= e for rng, e in zip(self.rngs, self.eps)]


def _content(run_seed, N, b):
    rng = Xorshift64Star(mix(run_seed, 1))
    return [rng.fill_bytes(b) for _ in range(N)]


def _xor(ints, idx, b):
    acc = 0
    for i in idx:
        acc ^= ints[i]
    return acc.to_bytes(b, "little") if b else b""


def _gf2_stream(scheme, params, N, stream_seed, content, b):
    """Yield ``(indices, payload)`` per transmission for LT / systematic LT / growth."""
    ints = [int.from_bytes(p, "little") for p in content]
    if scheme == "growth":
        sched = params.schedule
        end = sched.scheduled_length
        fb = sched.fallback_dist
        fb_cdf, fb_max = fb.cdf(), fb.dmax
        t = 0
        while True:
            seed = mix(stream_seed, t)
            if t < end:
                d = bisect.bisect_right(sched.ends, t) + 1
            else:
                d = min(bisect.bisect_right(fb_cdf, Xorshift64Star(seed).random()) + 1, fb_max)
            idx = expand_indices(seed, d, N)
            yield idx, _xor(ints, idx, b)
            t += 1
    dist = params.dist
    cdf, dmax = dist.cdf(), dist.dmax
    t = 0
    if scheme == "lt-sys":
        for t in range(N):
            yield [t], content[t]
        t = N
    while True:
        seed = mix(stream_seed, t)
        d = min(bisect.bisect_right(cdf, Xorshift64Star(seed).random()) + 1, dmax)
        idx = expand_indices(seed, d, N)
        yield idx, _xor(ints, idx, b)
        t += 1


def simulate(scheme, scenario: Scenario, params: SchemeParams, master_seed=0,
             cap_multiplier=DEFAULT_CAP_MULTIPLIER, verify=True):
    """One broadcast run; stops once every user holds its demand or at the cap."""
    params.validate(scheme, scenario)
    N, b = scenario.N, scenario.payload_bytes
    users = scenario.users
    cap = max(1, int(math.ceil(cap_multiplier * N)))
    need = [scenario.demand_count(i) for i in range(len(users))]
    content = _content(master_seed, N, b)
    stream_seed = mix(master_seed, 2)
    channel = _ChannelModel(master_seed, [u.eps for u in users])
    counts = np.zeros((len(users), cap), dtype=np.int32)
    delivery = [None] * len(users)
    remaining = len(users)

    if scheme == "chunked":
        cfg = params.chunks
        encoder = ChunkEncoder(cfg, content)
        decoders = [ChunkDecoderState(cfg, b) for _ in users]
        packets = (encoder.packet(stream_seed, t) for t in range(cap))
        ingest = [d.ingest for d in decoders]
        progress = [lambda d=d: d.decoded_count for d in decoders]
    else:
        decoders = [PeelingDecoder(N, b) for _ in users]
        packets = _gf2_stream(scheme, params, N, stream_seed, content, b)
        ingest = [(lambda pkt, d=d: d.ingest(pkt[0], pkt[1])) for d in decoders]
        progress = [lambda d=d: d.decoded_count for d in decoders]

    sent = 0
    for t in range(cap):
        pkt = next(packets)
        sent = t + 1
        for i, ok in enumerate(channel.arrivals()):
            if ok:
                ingest[i](pkt)
            c = progress[i]()
            counts[i, t] = c
            if delivery[i] is None and c >= need[i]:
                delivery[i] = sent
                remaining -= 1
        if remaining == 0:
            break

    if verify:
        _verify(scheme, decoders, content, params)
    return SimTrace([counts[i, :sent].copy() for i in range(len(users))], delivery, sent, need, remaining == 0)


def _verify(scheme, decoders, content, params):
    if scheme == "chunked":
        h = params.chunks.h
        for d in decoders:
            for c, done in enumerate(d.decoded):
                if done and d.chunk_payloads(c) != content[c * h:(c + 1) * h]:
                    raise CorruptStreamError(f"chunk {c} decoded to wrong content")
        return
    for d in decoders:
        mask = d.decoded_mask()
        for i, m in enumerate(mask):
            if m and d.payload(i) != content[i]:
                raise CorruptStreamError(f"packet {i} decoded to wrong content")


@dataclass
class RunSummary:
    N: int
    runs: int
    incomplete_runs: int
    # per user, over completed runs, of T_i / N
    user_mean: list
    user_std: list
    # E[max_i T_i] / N over completed runs
    server_mean: float
    server_std: float
    per_run: list = field(default_factory=list)  # (run index, [T_i] or None)
    trajectory_mean: list = field(default_factory=list)  # per user: mean decoded fraction per transmission


def _one_run(args):
    scheme, scenario, params, seed, cap_multiplier, r = args
    tr = simulate(scheme, scenario, params, mix(seed, r), cap_multiplier)
    return r, tr


def average_runs(scheme, scenario, params, runs, master_seed=0, cap_multiplier=DEFAULT_CAP_MULTIPLIER,
                 jobs=1, keep_trajectories=True):
    if runs < 1:
        raise UsageError("runs must be >= 1")
    params.validate(scheme, scenario)
    tasks = [(scheme, scenario, params, master_seed, cap_multiplier, r) for r in range(runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(_one_run, tasks))
    else:
        results = dict(map(_one_run, tasks))
    traces = [results[r] for r in range(runs)]
    N = scenario.N
    done = [tr for tr in traces if tr.complete]
    L = len(scenario.users)
    if done:
        T = np.array([tr.delivery for tr in done], dtype=float) / N
        user_mean = T.mean(axis=0).tolist()
        user_std = T.std(axis=0).tolist()
        server = T.max(axis=1)
        server_mean, server_std = float(server.mean()), float(server.std())
    else:
        user_mean = user_std = [math.nan] * L
        server_mean = server_std = math.nan
    traj = []
    if keep_trajectories:
        length = max(tr.transmissions_sent for tr in traces)
        for i in range(L):
            acc = np.zeros(length)
            for tr in traces:
                d = tr.decoded[i]
                acc[: d.size] += d
                acc[d.size:] += d[-1] if d.size else 0
            traj.append(acc / (len(traces) * N))
    per_run = [(r, traces[r].delivery if traces[r].complete else None) for r in range(runs)]
    return RunSummary(N, runs, runs - len(done), user_mean, user_std, server_mean, server_std, per_run, traj)


def mean_time_to_fraction(trajectory, z):
    """First normalized time where a mean decoded-fraction trajectory reaches ``z``."""
    hit = np.flatnonzero(np.asarray(trajectory) >= z - 1e-12)
    return None if hit.size == 0 else (hit[0] + 1)
