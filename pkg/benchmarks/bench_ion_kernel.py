"""Time the compiled RK4 ion kernel against the numpy fallback.

    python3 benchmarks/bench_ion_kernel.py [--cutoffs 10 20 30] [--steps 200] [--repeat 3]
"""

import argparse
import timeit

import numpy as np

from tmss import _kernels
from tmss.fock import FockSpace
from tmss.ion import IonParams, TwoColourHamiltonian, initial_state


def bench(cutoff: int, steps: int, repeat: int) -> dict:
    p = IonParams()
    spaces = (FockSpace(cutoff), FockSpace(cutoff))
    ham = TwoColourHamiltonian(p, spaces)
    d = cutoff + 1
    psi = initial_state("g", spaces).amplitudes.reshape(2, d, d)
    dt = 0.02
    out = {}
    results = {}
    impls = {"python": _kernels.fallback}
    if _kernels.compiled is not None:
        impls["compiled"] = _kernels.compiled
    for name, mod in impls.items():
        def call(mod=mod):
            return mod.rk4_two_colour(psi, ham.ra, ham.rb, *ham._args, 0.0, dt, steps)
        results[name] = call()
        best = min(timeit.repeat(call, number=1, repeat=repeat))
        out[name] = best / steps * 1e6
    if len(results) == 2:
        out["max_diff"] = float(np.abs(results["python"] - results["compiled"]).max())
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cutoffs", type=int, nargs="+", default=[10, 20, 30])
    parser.add_argument("--steps", type=int, default=200)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    print(f"{'cutoff':>6} {'python us/step':>15} {'compiled us/step':>17} {'speedup':>8} {'max diff':>9}")
    for n in args.cutoffs:
        r = bench(n, args.steps, args.repeat)
        comp = r.get("compiled", float("nan"))
        diff = r.get("max_diff", float("nan"))
        print(f"{n:>6} {r['python']:>15.1f} {comp:>17.1f} {r['python'] / comp:>8.2f} {diff:>9.1e}")


if __name__ == "__main__":
    main()
