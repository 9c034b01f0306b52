#!/usr/bin/env python3
"""Strong-limit probes behind the stability conditions.

Two families of limit operators drive the analysis of a truncation
sequence: translations dragged to +-infinity (the W images) and
dilation/modulation zooms at a point (the H images).  Both are strong
limits, so they can be watched numerically: conjugate the truncated
operator, apply it to a fixed test function, and compare with the claimed
limit operator.

The truncation masks converge exactly once the window swallows the test
function; convolution symbols converge at a 1/tau rate governed by how
fast the symbol settles near the zoom point.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from finsec import Conv, PCSOSymbol, ProjSeq, StepFunction, so_with_limit
from finsec.numerics import Grid, homomorphism_probe

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

taus = [5.0, 10.0, 20.0, 40.0, 80.0]

base = Grid(tau=8.0, n=512)
shift_devs = homomorphism_probe(ProjSeq(), "w", -1, taus, base)
print("translation probe of (P_tau), image chi_+:")
for tau, dev in shift_devs:
    print(f"  tau = {tau:6.1f}   deviation = {dev:.2e}")

ratl = so_with_limit("ratl", lambda t: t / (1.0 + t * t), 0.0)
sym = (PCSOSymbol.from_step(StepFunction((0.0,), (2.0, 3.0)))
       + PCSOSymbol.from_generator(ratl))
base = Grid(tau=20.0, n=512)
zoom_devs = homomorphism_probe(Conv(sym), "h", 0.0, taus, base)
print("dilation probe of a convolution with a jump at 0:")
for tau, dev in zoom_devs:
    print(f"  tau = {tau:6.1f}   deviation = {dev:.2e}")

fig, ax = plt.subplots(figsize=(6, 4))
ax.loglog([t for t, _ in zoom_devs], [d for _, d in zoom_devs], "o-",
          label="dilation probe (jump symbol)")
ax.loglog(taus, [3.0 / t for t in taus], "k--", lw=0.8, label="~ 1/tau")
ax.set_xlabel("tau")
ax.set_ylabel("deviation from the limit operator")
ax.grid(alpha=0.3, which="both")
ax.legend()
fig.savefig(OUT / "strong_limits.svg")
print(f"wrote {OUT / 'strong_limits.svg'}")
