"""Compare solver wall time with numba kernels against the pure-Python fallback.

Each mode runs in its own interpreter because the switch is read at import:

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _measure(repeat):
    from urllc_alloc import USING_NUMBA, Scenario, SweepConfig, solve_cnoma, solve_noma, solve_oma, solve_relay
    from urllc_alloc.harness import scenario_from

    cases = {
        "oma S0": (solve_oma, scenario_from(SweepConfig())),
        "noma S0": (solve_noma, scenario_from(SweepConfig())),
        "relay S0": (solve_relay, scenario_from(SweepConfig())),
        "cnoma T0": (solve_cnoma, Scenario(32, 40, 30.0, 1e-3, 50.0, 5.0, 20.0)),
    }
    out = {"numba": USING_NUMBA}
    for name, (solve, s) in cases.items():
        solve(s)  # compile / warm caches
        best = float("inf")
        for _ in range(repeat):
            t = time.perf_counter()
            res = solve(s)
            best = min(best, time.perf_counter() - t)
        out[name] = (best, res.eps_target.log_value)
    return out


def _child(no_jit, repeat):
    env = dict(os.environ)
    env.pop("URLLC_ALLOC_NO_JIT", None)
    if no_jit:
        env["URLLC_ALLOC_NO_JIT"] = "1"
    cmd = [sys.executable, __file__, "--child", "--repeat", str(repeat)]
    res = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        print(json.dumps(_measure(args.repeat)))
        return

    jit, py = _child(False, args.repeat), _child(True, args.repeat)
    if not jit.pop("numba"):
        print("warning: numba not importable, both columns use the fallback")
    py.pop("numba")
    print(f"{'case':<10} {'numba s':>10} {'python s':>10} {'speedup':>8}  ln eps (numba / python)")
    for name, (tj, lj) in jit.items():
        tp, lp = py[name]
        print(f"{name:<10} {tj:>10.4f} {tp:>10.4f} {tp / tj:>7.1f}x  {lj:.10g} / {lp:.10g}")


if __name__ == "__main__":
    main()
