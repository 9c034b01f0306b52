#!/usr/bin/env python3
"""Invertibility regions of resolvent families: the lens, drawn twice.

For the half-line Cauchy projection the resolvent P - lambda is the
two-coefficient singular operator with c = 1 - lambda, d = -lambda.  Its
one-sided invertibility criterion (arc conditions plus a winding number)
carves the lambda plane into the invertible exterior and the lens-shaped
spectrum.  The same lens comes out of the closed-form membership test, so
plotting both is a visual cross-check of two very different computations:
one walks arc curves and counts windings, the other evaluates a single
argument inequality.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from finsec import gk_one_sided, lens_contains
from finsec.geometry import arc_points, lens_boundary
from finsec.symbols import constant_step

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

fig, axes = plt.subplots(1, 2, figsize=(11, 4.2))
for ax, p in zip(axes, (2.0, 4.0)):
    xs = np.linspace(-0.4, 1.4, 90)
    ys = np.linspace(-0.8, 0.8, 80)
    verdicts = np.zeros((len(ys), len(xs)))
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            lam = complex(x, y)
            verdict, _ = gk_one_sided(p, constant_step(1 - lam),
                                      constant_step(-lam), 0.0, 1.0)
            verdicts[i, j] = {"invertible": 0, "left_only": 1,
                              "right_only": 1, "not_one_sided": 2}[verdict]
    ax.pcolormesh(xs, ys, verdicts, shading="auto", cmap="YlOrRd")
    mus = np.linspace(0, 1, 300)
    for arc in lens_boundary(p).arcs:
        pts = arc_points(arc, mus)
        ax.plot(pts.real, pts.imag, "k-", lw=1.5)
    ax.set_title(f"p = {p:g}: verdict map vs closed-form boundary")
    ax.set_aspect("equal")
fig.savefig(OUT / "invertibility_regions.svg")
print(f"wrote {OUT / 'invertibility_regions.svg'}")

# spot check agreement along a ray through the region
for lam in (0.25 + 0.1j, 0.5 - 0.3j, 1.2 + 0.4j, -0.2):
    verdict, _ = gk_one_sided(4.0, constant_step(1 - lam), constant_step(-lam),
                              0.0, 1.0)
    print(f"  lambda = {lam}: {verdict:14s} lens membership: "
          f"{lens_contains(4.0, lam)}")
