"""Time the numeric kernels with and without numba.

Each mode runs in its own interpreter because the JIT switch is read at import
time. Usage::

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
import time

CHILD = r"""
import json, sys, time
import numpy as np
from cyborgnav._accel import NUMBA_ENABLED
from cyborgnav.metrics import moving_average
from cyborgnav.plant import BeetleParams
from cyborgnav.trial import TrialConfig, run_open_loop, run_trial

repeat = int(sys.argv[1])


def best(fn):
    fn()  # warm-up, includes JIT compilation
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


t = np.arange(20_000) * 0.01
v = np.sin(t) + 0.1 * np.random.default_rng(0).standard_normal(t.size)
schedule = [("left_antenna", 28.5)] * 2_000
print(json.dumps({
    "numba": NUMBA_ENABLED,
    "closed-loop trial": best(lambda: run_trial(TrialConfig(seed=3))),
    "open loop, 2000 stimuli": best(lambda: run_open_loop(BeetleParams(), schedule, seed=1)),
    "moving average, 20000 samples": best(lambda: moving_average(t, v)),
}))
"""


def run_mode(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env["CYBORGNAV_DISABLE_NUMBA"] = "1" if disable else "0"
    out = subprocess.run([sys.executable, "-c", CHILD, str(repeat)], env=env, check=True,
                         capture_output=True, text=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    start = time.perf_counter()
    jit = run_mode(False, args.repeat)
    py = run_mode(True, args.repeat)
    print(f"{'kernel':32s} {'numba (s)':>10s} {'python (s)':>11s} {'speed-up':>9s}")
    for name in (k for k in jit if k != "numba"):
        print(f"{name:32s} {jit[name]:10.4f} {py[name]:11.4f} {py[name] / jit[name]:8.1f}x")
    if not jit["numba"]:
        print("numba is not installed; both columns ran the Python path")
    print(f"total wall time {time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
