"""Grid discretizations, truncation sweeps, solves, spectra, and probes.

Operators act on the window [-tau, tau] sampled at the n cell midpoints
x_j = -tau + (j + 1/2) h, h = 2 tau / n.  Multiplications become diagonal
matrices, convolutions become Toeplitz restrictions of a circulant built on
a zero-padded grid: the multiplier is sampled at the dual nodes of the
padded grid (evaluated at the negated frequency, matching the transform
convention in which conv(b) acts on exp(i w x) by b(-w)) and inverse
transformed into the kernel column.

Everything downstream of a discretization is a finite section in frequency
as well as in space, so the checks here are trend based: ratios of
condition numbers and smallest singular values across growing windows,
never absolute comparisons with the continuum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.linalg

from .expr import Conv, Ident, Mult, OperatorExpr, Prod, ProjSeq, Scale, Sum
from .symbols import PCSOSymbol, PointCluster, chi_interval, sample_fibers
from .analyzer import h_eta_image, w_image

__all__ = [
    "Grid",
    "DenseOperator",
    "SweepResult",
    "KernelNotRepresentable",
    "instantiate",
    "modulate",
    "discretize",
    "convolution_oracle",
    "finite_section_matrix",
    "shift_matrix",
    "modulation_matrix",
    "dilation_factor",
    "dilation_matrix",
    "cond_sweep",
    "solve_fsm",
    "empirical_spectrum",
    "homomorphism_probe",
    "smallest_singular_value",
    "p_norm_estimate",
    "discrete_norm",
]


class KernelNotRepresentable(ValueError):
    """The oracle cannot assemble a quadrature kernel for this symbol."""


@dataclass(frozen=True)
class Grid:
    """Uniform midpoint grid on [-tau, tau] with a convolution pad factor."""

    tau: float
    n: int
    padding: int = 4

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ValueError("grid size must be even and at least 8")
        if not self.tau > 0:
            raise ValueError("truncation radius must be positive")
        if self.padding < 2:
            raise ValueError("pad factor must be at least 2")

    @property
    def h(self) -> float:
        return 2.0 * self.tau / self.n

    @property
    def points(self) -> np.ndarray:
        return -self.tau + (np.arange(self.n) + 0.5) * self.h

    def dual_nodes(self, padded: bool = True) -> np.ndarray:
        n = self.padding * self.n if padded else self.n
        return 2.0 * np.pi * np.fft.fftfreq(n, d=self.h)


@dataclass(frozen=True)
class DenseOperator:
    matrix: np.ndarray
    grid: Grid
    label: str = ""

    def __post_init__(self):
        m = self.matrix
        if m.shape != (self.grid.n, self.grid.n):
            raise ValueError("matrix does not match its grid")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix has non-finite entries")


def instantiate(expr: OperatorExpr, tau: float) -> OperatorExpr:
    """Replace the truncation sequence by the concrete window mask at tau."""
    if isinstance(expr, ProjSeq):
        return Mult(chi_interval(-tau, tau))
    if isinstance(expr, Scale):
        return Scale(expr.factor, instantiate(expr.child, tau))
    if isinstance(expr, Sum):
        return Sum(tuple(instantiate(c, tau) for c in expr.children))
    if isinstance(expr, Prod):
        return Prod(tuple(instantiate(c, tau) for c in expr.children))
    return expr


def modulate(expr: OperatorExpr, eta: float) -> OperatorExpr:
    """Conjugation by the modulation e^{i eta x}, applied exactly.

    Modulations commute with multiplications and masks and shift every
    convolution multiplier: U_eta conv(b) U_eta^{-1} = conv(b(eta + .)).
    Working at the symbol level avoids the Nyquist-wrap noise a literal
    diagonal conjugation of the restricted matrices would introduce.
    """
    if isinstance(expr, Conv):
        return Conv(expr.symbol.shift(eta))
    if isinstance(expr, Scale):
        return Scale(expr.factor, modulate(expr.child, eta))
    if isinstance(expr, Sum):
        return Sum(tuple(modulate(c, eta) for c in expr.children))
    if isinstance(expr, Prod):
        return Prod(tuple(modulate(c, eta) for c in expr.children))
    return expr


def _conv_matrix(sym: PCSOSymbol, grid: Grid) -> np.ndarray:
    xi = grid.dual_nodes()
    mult = np.asarray(sym(-xi), dtype=complex)
    col = np.fft.ifft(mult)
    n = grid.n
    first_col = col[:n]
    first_row = np.concatenate([col[:1], col[::-1][: n - 1]])
    return scipy.linalg.toeplitz(first_col, first_row)


def discretize(expr: OperatorExpr, grid: Grid) -> DenseOperator:
    """Dense matrix realization of a concrete operator expression."""
    return DenseOperator(_disc(expr, grid), grid, label=type(expr).__name__)


def _disc(expr: OperatorExpr, grid: Grid) -> np.ndarray:
    if isinstance(expr, ProjSeq):
        raise ValueError("instantiate the truncation sequence before discretizing")
    if isinstance(expr, Ident):
        return np.eye(grid.n, dtype=complex)
    if isinstance(expr, Mult):
        return np.diag(np.asarray(expr.coeff(grid.points), dtype=complex))
    if isinstance(expr, Conv):
        return _conv_matrix(expr.symbol, grid)
    if isinstance(expr, Scale):
        return expr.factor * _disc(expr.child, grid)
    if isinstance(expr, Sum):
        return sum(_disc(c, grid) for c in expr.children)
    if isinstance(expr, Prod):
        acc = np.eye(grid.n, dtype=complex)
        for c in expr.children:
            acc = acc @ _disc(c, grid)
        return acc
    raise TypeError(f"not an operator expression: {expr!r}")


# ---------------------------------------------------------------------------
# independent quadrature oracle
# ---------------------------------------------------------------------------

def _pv_staggered(n: int) -> np.ndarray:
    """Midpoint quadrature of the Cauchy kernel on the 2h staggered lattice.

    For evaluation at x_j the nodes are the grid points at odd offsets,
    a sublattice of spacing 2h staggered by h, so the principal value
    singularity is never sampled:

        (S f)(x_j) ~ (1/(pi i)) sum_{l-j odd} 2h f(x_l) / (x_l - x_j).
    """
    d = np.subtract.outer(np.arange(n), np.arange(n))  # j - l
    S = np.zeros((n, n), dtype=complex)
    odd = (d % 2) != 0
    S[odd] = (1.0 / (np.pi * 1j)) * 2.0 / (-d[odd])
    return S


def convolution_oracle(b: PCSOSymbol, grid: Grid) -> DenseOperator:
    """Quadrature-assembled convolution matrix, independent of the FFT path.

    Handles three shapes of symbol: constants (exactly a scaled identity),
    two-piece steps jumping at 0 (assembled from the staggered principal
    value quadrature of the Cauchy kernel), and symbols with a common limit
    L at both infinities whose difference to L has an absolutely integrable
    kernel (assembled by numerical Fourier integration of the kernel plus
    midpoint quadrature).  Anything else raises KernelNotRepresentable.
    """
    c = b.constant_value()
    if c is not None:
        return DenseOperator(c * np.eye(grid.n, dtype=complex), grid, "const oracle")

    if b.is_pure_step():
        step = b.as_step()
        if step.breakpoints == (0.0,):
            minus, plus = step.values
            mean = 0.5 * (minus + plus)
            # conv(chi_- - chi_+) is the Cauchy singular operator
            diff = 0.5 * (minus - plus)
            mat = mean * np.eye(grid.n, dtype=complex) + diff * _pv_staggered(grid.n)
            return DenseOperator(mat, grid, "half-line step oracle")
        raise KernelNotRepresentable(
            "steps with jumps away from 0 have no assembled quadrature kernel"
        )

    # smooth route: every generator must have a point cluster so the symbol
    # has one limit at both infinities
    for gid in b.generator_ids:
        if not isinstance(b.generators[gid].cluster, PointCluster):
            raise KernelNotRepresentable(
                f"generator {gid!r} has no unique limit at infinity"
            )
    lim_lo, lim_hi = b.fiber_values(sample_fibers([b])[0])
    if abs(lim_lo - lim_hi) > 1e-12:
        raise KernelNotRepresentable("different limits at -oo and +oo")
    limit = lim_lo

    # find a frequency range outside which the symbol has settled
    X = 8.0
    while X < 512.0:
        edge = max(abs(b(X) - limit), abs(b(-X) - limit))
        if edge < 1e-13:
            break
        X *= 2.0
    else:
        raise KernelNotRepresentable("multiplier decays too slowly to a limit")

    # kernel K(u) = (1/2pi) int (b(xi)-limit) e^{-i xi u} dxi by Simpson,
    # vectorized over all Toeplitz displacements in memory-bounded chunks
    n, h = grid.n, grid.h
    nodes = np.linspace(-X, X, 24001)
    fvals = np.asarray(b(nodes), dtype=complex) - limit
    offsets = np.arange(-(n - 1), n)
    kcol = np.empty(offsets.size, dtype=complex)
    for start in range(0, offsets.size, 64):
        us = offsets[start:start + 64] * h
        integ = fvals[None, :] * np.exp(-1j * np.outer(us, nodes))
        kcol[start:start + 64] = scipy.integrate.simpson(integ, x=nodes, axis=1)
    kcol /= 2.0 * math.pi
    d = np.subtract.outer(np.arange(n), np.arange(n))
    mat = limit * np.eye(n, dtype=complex) + h * kcol[d + (n - 1)]
    return DenseOperator(mat, grid, "kernel quadrature oracle")


# ---------------------------------------------------------------------------
# finite sections, sweeps, solves
# ---------------------------------------------------------------------------

def _window_mask(grid: Grid, tau_inner: float) -> np.ndarray:
    return (np.abs(grid.points) < tau_inner).astype(complex)


def finite_section_matrix(a_expr: OperatorExpr, tau_inner: float,
                          grid: Grid) -> DenseOperator:
    """Mask * A * Mask + complement mask on the grid window."""
    if not tau_inner < grid.tau:
        raise ValueError("inner truncation must stay inside the grid window")
    mask = _window_mask(grid, tau_inner)
    a = _disc(instantiate(a_expr, tau_inner), grid)
    mat = (mask[:, None] * a) * mask[None, :] + np.diag(1.0 - mask)
    return DenseOperator(mat, grid, f"finite section tau={tau_inner:g}")


def smallest_singular_value(mat: np.ndarray) -> float:
    return float(np.linalg.svd(mat, compute_uv=False)[-1])


def discrete_norm(v: np.ndarray, h: float, p: float) -> float:
    """Weighted l^p norm approximating the continuum L^p norm."""
    if math.isinf(p):
        return float(np.abs(v).max())
    return float((h ** (1.0 / p)) * np.linalg.norm(v, ord=p))


def _dual_vector(v: np.ndarray, r: float) -> np.ndarray:
    a = np.abs(v)
    nz = a > 0
    out = np.zeros_like(v)
    out[nz] = (a[nz] ** (r - 1.0)) * (v[nz] / a[nz])
    return out


def p_norm_estimate(mat: np.ndarray, p: float, rng: np.random.Generator,
                    iters: int = 200, restarts: int = 3, rtol: float = 1e-5) -> float:
    """Lower estimate of the matrix p-norm by a dual power iteration.

    Classical mixed-norm power method: alternate y = A x with the duality
    map of l^p and z = A^H psi(y) with the duality map of the conjugate
    exponent, stopping when the dual certificate ||z||_q <= Re <z, x>
    holds.  Restarted from the flat vector and a couple of random draws;
    the largest estimate wins.  Exact for p = 2 up to iteration tolerance.
    """
    n = mat.shape[0]
    q = p / (p - 1.0)
    starts = [np.ones(n, dtype=complex)]
    for _ in range(restarts - 1):
        starts.append(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    best = 0.0
    for x in starts:
        x = x / np.linalg.norm(x, ord=p)
        est_prev = 0.0
        for _ in range(iters):
            y = mat @ x
            est = np.linalg.norm(y, ord=p)
            if est == 0.0:
                break
            z = mat.conj().T @ _dual_vector(y, p)
            zq = np.linalg.norm(z, ord=q)
            if zq <= np.real(np.vdot(x, z)) * (1 + 1e-12):
                break
            if abs(est - est_prev) <= rtol * est:
                break
            est_prev = est
            w = _dual_vector(z, q)
            x = w / np.linalg.norm(w, ord=p)
        best = max(best, float(np.linalg.norm(mat @ x, ord=p)))
    return best


@dataclass(frozen=True)
class SweepResult:
    """Per-truncation conditioning records of a finite section family."""

    rows: tuple[dict, ...] = field(default_factory=tuple)

    def column(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.rows])

    @property
    def cond_variation(self) -> float:
        c = self.column("cond2")
        return float(c.max() / c.min())

    @property
    def sigma_min_decay(self) -> float:
        s = self.column("sigma_min")
        return float(s[0] / s[-1])

    def to_rows(self) -> list[list]:
        keys = ["tau", "n", "sigma_min", "cond2", "condp"]
        return [[r[k] for k in keys] for r in self.rows]


def cond_sweep(a_expr: OperatorExpr, tau_list: list[float], p: float,
               n: int = 512, tau_factor: float = 2.0, padding: int = 4,
               seed: int = 0, threads: int = 0) -> SweepResult:
    """Conditioning of the finite sections across growing truncations.

    For each tau the section lives on a window of radius tau_factor * tau
    with n points; sigma_min and the 2-norm condition number come from a
    full singular value decomposition, the p-norm condition number from the
    dual power estimator applied to the matrix and to its inverse through
    an LU factorization.  A singular section is recorded with infinite
    condition numbers rather than raised.

    The per-tau jobs are independent; with threads > 1 they run on a
    thread pool (deterministic: each job owns its matrices and a seeded
    generator) and the rows are merged in tau order.
    """
    if any(b <= a for a, b in zip(tau_list, tau_list[1:])):
        raise ValueError("truncation list must be strictly increasing")

    def job(tau: float) -> dict:
        rng = np.random.default_rng(seed)
        grid = Grid(tau=tau_factor * tau, n=n, padding=padding)
        mat = finite_section_matrix(a_expr, tau, grid).matrix
        svals = np.linalg.svd(mat, compute_uv=False)
        smin, smax = float(svals[-1]), float(svals[0])
        row = {"tau": tau, "n": n, "sigma_min": smin, "singular": smin == 0.0}
        if smin == 0.0:
            row.update(cond2=math.inf, condp=math.inf)
        else:
            norm_p = p_norm_estimate(mat, p, rng)
            lu = scipy.linalg.lu_factor(mat)
            inv = scipy.linalg.lu_solve(lu, np.eye(grid.n, dtype=complex))
            inv_norm_p = p_norm_estimate(inv, p, rng)
            row.update(cond2=smax / smin, condp=norm_p * inv_norm_p)
        return row

    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(job, tau_list))
    else:
        rows = [job(tau) for tau in tau_list]
    return SweepResult(tuple(rows))


def solve_fsm(a_expr: OperatorExpr, f, tau_list: list[float], p: float,
              n: int = 1024, tau_factor: float = 2.0, padding: int = 4):
    """Truncated solves with successive-difference and residual diagnostics.

    All sections are assembled on one fixed window sized by the largest
    truncation so that solutions are directly comparable.  Returns a list
    of records {tau, diff_norm, residual}; diff_norm compares consecutive
    solutions in the discrete p-norm (nan for the first), residual is
    ||A phi - f||_p of each solution against the untruncated operator on
    the full window.  Singular sections are flagged, not raised.
    """
    grid = Grid(tau=tau_factor * max(tau_list), n=n, padding=padding)
    x = grid.points
    rhs = np.asarray(f(x), dtype=complex)
    full = _disc(instantiate(a_expr, max(tau_list)), grid)
    out = []
    prev = None
    for tau in tau_list:
        mat = finite_section_matrix(a_expr, tau, grid).matrix
        rec = {"tau": tau, "singular": False}
        try:
            sol = np.linalg.solve(mat, rhs)
        except np.linalg.LinAlgError:
            rec["singular"] = True
            rec["diff_norm"] = math.nan
            rec["residual"] = math.nan
            out.append(rec)
            prev = None
            continue
        rec["diff_norm"] = (math.nan if prev is None
                            else discrete_norm(sol - prev, grid.h, p))
        rec["residual"] = discrete_norm(full @ sol - rhs, grid.h, p)
        out.append(rec)
        prev = sol
    return out


def empirical_spectrum(m: DenseOperator) -> np.ndarray:
    """Eigenvalues of the discretization (2-norm spectrum)."""
    return np.linalg.eigvals(m.matrix)


# ---------------------------------------------------------------------------
# shift / modulation / dilation and strong-limit probes
# ---------------------------------------------------------------------------

def shift_matrix(grid: Grid, tau: float) -> np.ndarray:
    """Translation by tau on the grid, truncated at the window edges.

    tau must be an integer number of cells (the grid is uniform, so f(x -
    tau) is again a grid function exactly).  Output at x_j is the input at
    x_{j-k}, so the matrix has ones on the (-k)-th diagonal.
    """
    m = tau / grid.h
    k = round(m)
    if abs(m - k) > 1e-9 * max(1.0, abs(m)):
        raise ValueError("shift must be an integer number of grid cells")
    return np.eye(grid.n, k=-k, dtype=complex)


def modulation_matrix(grid: Grid, eta: float) -> np.ndarray:
    return np.diag(np.exp(1j * eta * grid.points))


def dilation_factor(tau: float, p: float) -> float:
    """Scale factor of the dilation operator between nested midpoint grids.

    Dilating by tau maps samples on the grid of radius R exactly onto
    samples on the grid of radius tau R with the same point count; the
    matrix in those coordinates is this constant times the identity.
    """
    return tau ** (-1.0 / p)


def dilation_matrix(grid: Grid, tau: float, p: float) -> np.ndarray:
    """Matrix of the dilation from `grid` samples to the tau-scaled grid.

    The target grid is Grid(tau * grid.tau, grid.n): its points are exactly
    tau times the source points, so no interpolation enters.
    """
    return dilation_factor(tau, p) * np.eye(grid.n, dtype=complex)


def homomorphism_probe(expr: OperatorExpr, kind: str, index,
                       taus: list[float], base: Grid, p: float = 2.0,
                       test_funcs=None) -> list[tuple[float, float]]:
    """Strong-limit deviations of the conjugated sequence against its image.

    kind "w": conjugate the instantiated sequence by translations,
        V_tau A_tau V_{-tau} (index -1), A_tau itself (0), or
        V_{-tau} A_tau V_tau (+1), on a window wide enough to hold the
        shifted test functions, and compare with the shift-limit image.
    kind "h": conjugate by modulation and dilation.  The dilation is
        realized exactly by reading the same sample vector on the grid
        scaled by tau, so the deviation at truncation tau is

            || U_eta A_tau U_eta^{-1} (Z_tau v) - Z_tau (H_eta image) v ||_p

        evaluated on the scaled grid.  The modulation index eta must stay
        well below the Nyquist frequency of the scaled grid.

    Returns [(tau, max deviation over test functions)].
    """
    if test_funcs is None:
        test_funcs = [lambda x: np.maximum(1 - (x / 5.0) ** 2, 0.0) ** 2]
    out = []
    if kind == "w":
        i = int(index)
        image = w_image(expr, i)
        for tau in taus:
            R = base.tau + tau
            n = base.n
            h = 2 * R / n
            k = max(1, round(tau / h))
            tau_snap = k * h
            grid = Grid(tau=R, n=n, padding=base.padding)
            a = _disc(instantiate(expr, tau_snap), grid)
            img = _disc(image, grid)
            # W_-1 conjugates by V_{+tau} on the left, W_1 by V_{-tau}
            sgn = 1 if i == -1 else -1
            V = shift_matrix(grid, sgn * tau_snap)
            Vinv = shift_matrix(grid, -sgn * tau_snap)
            conj = a if i == 0 else V @ a @ Vinv
            dev = 0.0
            for fun in test_funcs:
                v = np.asarray(fun(grid.points), dtype=complex)
                nv = discrete_norm(v, grid.h, p)
                dev = max(dev, discrete_norm((conj - img) @ v, grid.h, p) / nv)
            out.append((tau_snap, dev))
        return out
    if kind == "h":
        eta = float(index)
        image = h_eta_image(expr, eta)
        img = _disc(image, base)
        for tau in taus:
            big = Grid(tau=tau * base.tau, n=base.n, padding=base.padding)
            conj = _disc(modulate(instantiate(expr, tau), eta), big)
            zf = dilation_factor(tau, p)
            dev = 0.0
            for fun in test_funcs:
                v = np.asarray(fun(base.points), dtype=complex)
                nv = discrete_norm(v, base.h, p)
                lhs = conj @ (zf * v)
                rhs = zf * (img @ v)
                dev = max(dev, discrete_norm(lhs - rhs, big.h, p) / nv)
            out.append((tau, dev))
        return out
    raise ValueError("probe kind must be 'w' or 'h'")
