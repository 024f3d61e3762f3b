"""Timing comparison of the numba and numpy integrator backends.

Each case runs in a fresh subprocess so GAUGESIM_BACKEND is honored at
import time.  The first call of every workload is a warmup (JIT
compilation for numba) and is not timed.

    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --workloads two_site eom
"""

import argparse
import json
import math
import os
import subprocess
import sys
import time

TWO_PI = 2.0 * math.pi


def wl_two_site():
    import numpy as np
    from gaugesim import (ModelSpec, Tone, build_lattice,
                          evolve_schrodinger, tone_phase_for_target)
    det = TWO_PI * 155.0
    tone = Tone(site=1, amp=0.94 * det, freq=det,
                phase=tone_phase_for_target(0.0, det), bonds=((1, 2),))
    m = ModelSpec("H1", build_lattice(1, 2), onsite=np.array([0.0, -det]),
                  rates={(1, 2): TWO_PI * 5.9}, tones=[tone])
    evolve_schrodinger(m, 1, np.linspace(0.0, 0.45, 181), tol=1e-10)


def wl_device():
    import numpy as np
    from gaugesim import ModelSpec, device_tone_set, evolve_schrodinger
    from gaugesim import device as dev
    lat = dev.device_lattice()
    m = ModelSpec("H1", lat, onsite=dev.onsite_frequencies(),
                  rates=dev.bare_rates(None, lat),
                  tones=list(device_tone_set(math.pi / 4.0)))
    evolve_schrodinger(m, 6, np.linspace(0.0, 0.6, 61), tol=1e-10)


def wl_lindblad():
    import numpy as np
    from gaugesim import (ModelSpec, NoiseSpec, build_lattice,
                          chain_tone_layout, evolve_lindblad)
    lat = build_lattice(1, 6)
    onsite, tones = chain_tone_layout(lat, list(lat.sites))
    rates = {b.key: TWO_PI * 5.9 for b in lat.bonds}
    m = ModelSpec("H1", lat, onsite=onsite, rates=rates, tones=list(tones))
    noise = NoiseSpec(t1=16.7, tphi=10.0)
    evolve_lindblad(m, 3, np.linspace(0.0, 0.8, 41), noise, tol=1e-9)


def wl_eom():
    import numpy as np
    from gaugesim import integrate_eom, obc_modes
    rate = TWO_PI * 2.0
    modes = obc_modes(20, 20, rate)
    times = np.linspace(0.0, 2.0 / rate, 41)
    integrate_eom(modes.kx, modes.ky, (0.1 * rate, 0.1 * rate), 0.02,
                  rate, times)


WORKLOADS = {
    "two_site": wl_two_site,
    "device": wl_device,
    "lindblad": wl_lindblad,
    "eom": wl_eom,
}


def run_child(name):
    import gaugesim
    fn = WORKLOADS[name]
    fn()
    t0 = time.perf_counter()
    fn()
    dt = time.perf_counter() - t0
    print(json.dumps({"backend": gaugesim.BACKEND, "seconds": dt}))


def run_case(name, backend):
    env = dict(os.environ, GAUGESIM_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--child", name],
        env=env, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError("%s/%s failed:\n%s" % (name, backend,
                                                  proc.stderr))
    payload = json.loads(proc.stdout.strip().splitlines()[-1])
    if payload["backend"] != backend:
        raise RuntimeError("backend override did not take effect")
    return payload["seconds"]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--child", help=argparse.SUPPRESS)
    ap.add_argument("--workloads", nargs="*", default=sorted(WORKLOADS))
    args = ap.parse_args(argv)
    if args.child:
        run_child(args.child)
        return 0

    print("%-10s %12s %12s %9s" % ("workload", "numba (s)", "numpy (s)",
                                   "speedup"))
    for name in args.workloads:
        tb = run_case(name, "numba")
        tp = run_case(name, "numpy")
        print("%-10s %12.4f %12.4f %8.1fx" % (name, tb, tp, tp / tb))
    return 0


if __name__ == "__main__":
    sys.exit(main())
