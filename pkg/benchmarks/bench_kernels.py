"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Kernel timings call each backend module directly; the end-to-end rows run one
LT simulation in a subprocess with and without HETCAST_PURE_PYTHON.
"""

import argparse
import os
import random
import subprocess
import sys
import time

from hetcast.kernels import backends


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def bench_expand(mod):
    for s in range(20_000):
        mod.expand_indices(s, 3, 1024)


def bench_rng(mod):
    rng = mod.Xorshift64Star(1)
    for _ in range(20_000):
        rng.below(1000)
        rng.fill_bytes(64)


def make_peeling(mod):
    rng = random.Random(0)
    n = 2048
    pkts = []
    for t in range(int(1.3 * n)):
        d = 1 if rng.random() < 0.05 else rng.choice((2, 2, 3, 4))
        pkts.append((sorted(rng.sample(range(n), d)), bytes(16)))

    def run():
        dec = mod.PeelingDecoder(n, 16)
        for idx, pay in pkts:
            dec.ingest(idx, pay)
    return run


def make_gf256(mod):
    rng = random.Random(1)
    rows = [bytes(rng.randrange(256) for _ in range(64)) for _ in range(80)]

    def run():
        for _ in range(5):
            red = mod.GF256RowReducer(64, 32)
            for r in rows:
                red.add_row(r, bytes(32))
    return run


def end_to_end(pure, runs):
    env = dict(os.environ)
    env.pop("HETCAST_PURE_PYTHON", None)
    if pure:
        env["HETCAST_PURE_PYTHON"] = "1"
    code = ("import time\nfrom hetcast.degree_model import Scenario\nfrom hetcast.optimizer import optimize_scenario\n"
            "from hetcast.sim import SchemeParams, average_runs\nfrom hetcast.kernels import BACKEND\n"
            "s = Scenario(1024, ((15/16, 0.1), (9/16, 0.5)), 32)\np = SchemeParams(dist=optimize_scenario(s).dist)\n"
            f"t = time.perf_counter(); average_runs('lt', s, p, {runs}, 0, keep_trajectories=False)\n"
            "print(BACKEND, time.perf_counter() - t)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    name, secs = out.stdout.split()
    return name, float(secs)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--runs", type=int, default=10, help="simulation runs for the end-to-end rows")
    args = ap.parse_args()
    mods = backends()
    cases = [
        ("expand_indices x20000", lambda m: lambda: bench_expand(m)),
        ("rng below+fill_bytes x20000", lambda m: lambda: bench_rng(m)),
        ("peeling N=2048, 1.3N packets", make_peeling),
        ("gf256 RREF 64 wide, 5x80 rows", make_gf256),
    ]
    names = sorted(mods)
    print(f"{'kernel':34s}" + "".join(f"{n:>12s}" for n in names) + f"{'speedup':>10s}")
    for label, make in cases:
        t = {n: best_of(make(mods[n]), args.repeat) for n in names}
        speed = t["python"] / t["compiled"] if "compiled" in t else float("nan")
        print(f"{label:34s}" + "".join(f"{t[n]:11.4f}s" for n in names) + f"{speed:9.1f}x")
    rows = dict(end_to_end(pure, args.runs) for pure in (True, False))
    if "compiled" in rows:
        print(f"{'LT simulate, ' + str(args.runs) + ' runs N=1024':34s}{rows['compiled']:11.4f}s{rows['python']:11.4f}s"
              f"{rows['python'] / rows['compiled']:9.1f}x")
    else:
        print("compiled backend not built; end-to-end comparison skipped")


if __name__ == "__main__":
    main()
