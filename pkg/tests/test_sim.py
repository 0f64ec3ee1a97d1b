import math

import numpy as np
import pytest

from hetcast.chunked import ChunkConfig
from hetcast.degree_model import DegreeDistribution, Scenario, User
from hetcast.errors import UsageError
from hetcast.growth import growth_schedule
from hetcast.optimizer import optimize_scenario
from hetcast.sim import SchemeParams, average_runs, simulate

from .conftest import REF_LT, two_user_scenario


def test_params_validation():
    s = Scenario(16, ((0.5, 0.1),))
    with pytest.raises(UsageError):
        simulate("lt", s, SchemeParams())
    with pytest.raises(UsageError):
        simulate("growth", s, SchemeParams(schedule=growth_schedule(32, 1.0, 0.5)))
    with pytest.raises(UsageError):
        simulate("chunked", s, SchemeParams(chunks=ChunkConfig(3, 3)))
    with pytest.raises(UsageError):
        simulate("raptor", s, SchemeParams(dist=REF_LT))
    with pytest.raises(UsageError):
        average_runs("lt", s, SchemeParams(dist=REF_LT), 0)


def test_lossless_systematic_exact():
    for z in (0.1, 0.5, 0.77):
        s = Scenario(100, ((z, 0.0),), 8)
        tr = simulate("lt-sys", s, SchemeParams(dist=REF_LT), 3)
        assert tr.delivery == [math.ceil(z * 100 - 1e-9)]


def test_dead_channel_hits_cap():
    # the model refuses eps = 1, so drive the channel through a tiny cap instead
    s = Scenario(64, ((0.9, 0.99),), 4)
    tr = simulate("lt", s, SchemeParams(dist=REF_LT), 0, cap_multiplier=1.0)
    assert not tr.complete and tr.delivery == [None] and tr.transmissions_sent == 64
    with pytest.raises(UsageError):
        User(0.5, 1.0)


@pytest.mark.parametrize("scheme", ["lt", "lt-sys", "growth", "chunked"])
def test_trace_invariants_and_determinism(scheme):
    s = Scenario(64, ((0.75, 0.2), (0.5, 0.4)), 4)
    params = SchemeParams(dist=REF_LT, schedule=growth_schedule(64, 1.25, 0.75), chunks=ChunkConfig(8, 8))
    a = simulate(scheme, s, params, 12)
    b = simulate(scheme, s, params, 12)
    assert a.delivery == b.delivery and all(np.array_equal(x, y) for x, y in zip(a.decoded, b.decoded))
    for i, d in enumerate(a.decoded):
        assert np.all(np.diff(d) >= 0)
        if a.delivery[i] is not None:
            assert a.delivery[i] <= a.transmissions_sent
            assert d[a.delivery[i] - 1] >= a.need[i] > d[a.delivery[i] - 2]
    assert a.server_delivery == max(a.delivery)
    lines = a.to_csv(64).splitlines()
    assert lines[0] == "transmission_index,user0,user1" and len(lines) == a.transmissions_sent + 1


def test_adding_user_keeps_other_losses():
    one = Scenario(64, ((0.75, 0.3),), 4)
    two = Scenario(64, ((0.75, 0.3), (0.2, 0.6)), 4)
    p = SchemeParams(dist=REF_LT)
    a = simulate("lt", one, p, 5, cap_multiplier=2)
    b = simulate("lt", two, p, 5, cap_multiplier=2)
    k = min(a.transmissions_sent, b.transmissions_sent)
    assert np.array_equal(a.decoded[0][:k], b.decoded[0][:k])


def test_runs_one_equals_simulate_and_prefix_stability():
    from hetcast.kernels import mix
    s = Scenario(64, ((0.75, 0.2),), 4)
    p = SchemeParams(dist=REF_LT)
    one = average_runs("lt", s, p, 1, 9)
    tr = simulate("lt", s, p, mix(9, 0))
    assert one.user_mean[0] == tr.delivery[0] / 64
    r10 = average_runs("lt", s, p, 10, 9, keep_trajectories=False)
    r20 = average_runs("lt", s, p, 20, 9, keep_trajectories=False)
    assert r20.per_run[:10] == r10.per_run


def test_incomplete_runs_excluded():
    s = Scenario(32, ((0.9, 0.6),), 0)
    r = average_runs("lt", s, SchemeParams(dist=REF_LT), 10, 0, cap_multiplier=1.5)
    assert r.incomplete_runs > 0
    assert sum(1 for _, T in r.per_run if T is None) == r.incomplete_runs


def test_coupon_collection_statistics():
    s = Scenario(256, ((0.5, 0.0),), 0)
    r = average_runs("lt", s, SchemeParams(dist=DegreeDistribution.point_mass(1)), 200, 4, keep_trajectories=False)
    # exact finite-N expectation of the time to collect half the coupons
    exact = sum(256 / (256 - k) for k in range(128)) / 256
    se = r.user_std[0] / math.sqrt(200)
    assert abs(r.user_mean[0] - exact) < 3 * se
    assert abs(exact - math.log(2)) < 0.01


def test_parallel_runs_identical():
    s = Scenario(64, ((0.75, 0.2), (0.5, 0.4)), 4)
    p = SchemeParams(dist=REF_LT)
    a = average_runs("lt", s, p, 6, 3, jobs=1)
    b = average_runs("lt", s, p, 6, 3, jobs=2)
    assert a.per_run == b.per_run and a.user_mean == b.user_mean


@pytest.mark.slow
def test_trajectories_track_analysis():
    from hetcast.chunked import chunked_analysis
    from hetcast.degree_model import lt_analysis
    from hetcast.growth import growth_delivery_time
    s = two_user_scenario(payload_bytes=0)
    cases = {
        "lt": SchemeParams(dist=optimize_scenario(s).dist),
        "lt-sys": SchemeParams(dist=optimize_scenario(s, True).dist),
        "growth": SchemeParams(schedule=growth_schedule(1024, 1 / 0.9, s.z_max)),
        "chunked": SchemeParams(chunks=ChunkConfig(16, 64)),
    }
    for scheme, p in cases.items():
        r = average_runs(scheme, s, p, 30, 1, keep_trajectories=False)
        if scheme.startswith("lt"):
            ana = lt_analysis(p.dist, s, scheme == "lt-sys").t
        elif scheme == "growth":
            ana = [growth_delivery_time(p.schedule, u.z, u.eps) for u in s.users]
        else:
            ana = chunked_analysis(s, p.chunks).t
        for i in range(2):
            assert r.user_mean[i] == pytest.approx(ana[i], rel=0.05), (scheme, i)
