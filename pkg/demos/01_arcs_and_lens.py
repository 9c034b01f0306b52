#!/usr/bin/env python3
"""Circular arcs and the lentiform spectral region.

The building block of every invertibility criterion in this package is the
circular arc A_s(z1, z2): the set of points from which the segment between
z1 and z2 subtends the angle 2*pi/s.  At s = 2 the arc degenerates to the
segment; as s moves away from 2 it bows to one side or the other.  Sweeping
s between an exponent p and its conjugate q = p/(p-1) fills the lens-shaped
region anchored at 0 and 1 that acts as the spectrum of the half-line
Cauchy projections on L^p.

This script draws a family of arcs, shades the lens for a few exponents,
and prints membership checks for a handful of points.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from finsec import CircularArc, lens_contains
from finsec.geometry import arc_points, lens_boundary

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

mus = np.linspace(0.0, 1.0, 400)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))

# one endpoint pair, a fan of arc parameters
for s in (1.3, 1.6, 2.0, 3.0, 4.0, 8.0):
    pts = arc_points(CircularArc(0.0, 1.0, s), mus)
    ax1.plot(pts.real, pts.imag, label=f"s = {s:g}")
ax1.plot([0, 1], [0, 0], "ko", ms=5)
ax1.set_title("arcs through 0 and 1")
ax1.set_aspect("equal")
ax1.legend(fontsize=8)
ax1.grid(alpha=0.3)

# lens regions for growing p: fatter as p moves away from 2
for p, color in ((2.2, "C0"), (3.0, "C1"), (5.0, "C2"), (10.0, "C3")):
    for arc in lens_boundary(p).arcs:
        pts = arc_points(arc, mus)
        ax2.plot(pts.real, pts.imag, color=color, label=f"p = {p:g}")
ax2.plot([0, 1], [0, 0], "ko", ms=5)
handles, labels = ax2.get_legend_handles_labels()
ax2.legend(handles[::2], labels[::2], fontsize=8)
ax2.set_title("lens regions (boundaries)")
ax2.set_aspect("equal")
ax2.grid(alpha=0.3)

fig.savefig(OUT / "arcs_and_lens.svg")
print(f"wrote {OUT / 'arcs_and_lens.svg'}")

for p, z in [(2.0, 0.5), (2.0, 0.5 + 0.1j), (4.0, 0.5 - 0.5j), (4.0, 0.5 - 0.7j)]:
    inside = lens_contains(p, z)
    print(f"  p={p:g}: {z} {'inside' if inside else 'outside'} the lens")
