"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest

from finsec.geometry import CircularArc, arc_points


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def polygon_winding(pts: np.ndarray) -> int:
    """Winding about 0 of a closed polygon, by ray-crossing counting.

    Independent of the package's unwrapping implementation: walks the
    closed polyline and counts signed crossings of the positive real axis.
    """
    x, y = pts.real, pts.imag
    x = np.concatenate([x, x[:1]])
    y = np.concatenate([y, y[:1]])
    wind = 0
    for i in range(1, len(x)):
        if (y[i] >= 0) != (y[i - 1] >= 0):
            # segment crosses the real axis; find the crossing abscissa
            tcross = y[i - 1] / (y[i - 1] - y[i])
            xc = x[i - 1] + tcross * (x[i] - x[i - 1])
            if xc > 0:
                wind += 1 if y[i] >= 0 else -1
    return wind


def curve_polygon(curve, samples_per_arc: int = 4096) -> np.ndarray:
    """Dense polygonal sampling of an arc curve."""
    mus = np.linspace(0.0, 1.0, samples_per_arc, endpoint=False)
    return np.concatenate([arc_points(a, mus) for a in curve.arcs])


def lens_cloud(p: float, n_s: int = 400, n_mu: int = 600) -> np.ndarray:
    """Brute-force sampling of the lentiform region along its arcs."""
    q = p / (p - 1.0)
    smin, smax = min(p, q), max(p, q)
    pts = []
    for s in np.linspace(smin, smax, n_s):
        arc = CircularArc(0.0, 1.0, max(s, 1.0 + 1e-12))
        pts.append(arc_points(arc, np.linspace(0.0, 1.0, n_mu)))
    return np.concatenate(pts)
