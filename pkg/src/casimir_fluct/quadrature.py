"""Integration machinery.

* ``map_semiinfinite`` -- the v = mu t/(1-t) map of (0,1) onto (0, inf).
* ``integrate_2d`` -- nested adaptive Gauss-Kronrod (G7/K15) on the unit
  square, vectorised over panels.  Used for the average potential.
* ``integrate_qmc`` -- randomized Sobol' cubature on the unit cube with
  independent scramblings as replications.  Used for the 7-D and 9-D variance
  integrals.

The QMC result is bitwise reproducible for a fixed (seed, budget,
replications): points are addressed by index, each replication is consumed in
fixed-size chunks, and partial sums are combined by a pairwise tree in index
order.  The worker count only changes which thread handles which replication.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

__all__ = [
    "QuadSpec",
    "IntegralEstimate",
    "NonFiniteSampleError",
    "QuadratureError",
    "map_semiinfinite",
    "inverse_semiinfinite",
    "gauss_legendre_01",
    "adaptive_gk_batch",
    "integrate_2d",
    "integrate_qmc",
    "pairwise_sum",
    "default_workers",
]

CHUNK = 1 << 14


class QuadratureError(RuntimeError):
    pass


class NonFiniteSampleError(QuadratureError):
    """The integrand returned NaN/inf; carries the offending unit-cube point."""

    def __init__(self, point, value, index):
        self.point = np.asarray(point)
        self.value = value
        self.index = index
        super().__init__(
            f"integrand returned {value!r} at sample {index}, u = {np.array2string(self.point, precision=17)}"
        )


@dataclass(frozen=True)
class QuadSpec:
    """Integration request.

    ``budget`` is the number of points per randomization (a power of two),
    ``replications`` the number of independent scramblings used for the error
    bar.  ``abs_tol``/``max_sweeps`` only matter for the deterministic 2-D
    rule; ``transform`` is free-form metadata recorded with the result.
    """

    dim: int
    budget: int = 1 << 16
    replications: int = 16
    seed: int = 20160601
    transform: tuple = ()
    target_rel_error: float = 0.02
    abs_tol: float = 0.0
    max_sweeps: int = 100

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.budget < 1 or self.budget & (self.budget - 1):
            raise ValueError(f"budget must be a power of two, got {self.budget}")
        if self.replications < 2:
            raise ValueError("replications must be >= 2 for an error estimate")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.target_rel_error <= 0 and self.abs_tol <= 0:
            raise ValueError("need a positive relative or absolute tolerance")

    def replace(self, **kw) -> "QuadSpec":
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(kw)
        return QuadSpec(**d)

    def as_dict(self) -> dict:
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d["transform"] = list(self.transform)
        return d


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    std_error: float
    n_total: int
    seed: int | None
    converged: bool
    transform: tuple = ()
    replicate_values: tuple = field(default=(), repr=False)

    @property
    def rel_error(self) -> float:
        return self.std_error / abs(self.value) if self.value != 0 else math.inf

    def scaled(self, factor: float) -> "IntegralEstimate":
        return IntegralEstimate(
            self.value * factor,
            self.std_error * abs(factor),
            self.n_total,
            self.seed,
            self.converged,
            self.transform,
            tuple(v * factor for v in self.replicate_values),
        )


def default_workers() -> int:
    env = os.environ.get("CASIMIR_THREADS")
    if env:
        return max(1, int(env))
    return 1


# ---------------------------------------------------------------- transforms


def map_semiinfinite(t, mu):
    """Map t in (0,1) to v = mu t/(1-t) in (0, inf); returns (v, dv/dt)."""
    t = np.asarray(t, dtype=float)
    if mu <= 0:
        raise ValueError("scale mu must be > 0")
    if np.any((t <= 0) | (t >= 1)):
        raise ValueError("t must lie strictly inside (0, 1)")
    s = 1.0 - t
    v = mu * t / s
    jac = mu / (s * s)
    if v.ndim == 0:
        return float(v), float(jac)
    return v, jac


def inverse_semiinfinite(v, mu):
    v = np.asarray(v, dtype=float)
    t = v / (mu + v)
    return float(t) if t.ndim == 0 else t


def gauss_legendre_01(n: int):
    """n-point Gauss-Legendre nodes and weights on (0, 1)."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


# ------------------------------------------------------- adaptive G7/K15 rule

# QUADPACK qk15 abscissae (non-negative half) and weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
# full 15-node rule on [-1, 1]
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[1:7:2] = _WG[:3]
_WG15[7] = _WG[3]
_WG15[9:15:2] = _WG[2::-1]


def _gk15(func, bidx, a, b):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * _NODES[None, :]
    bi = np.repeat(bidx, 15)
    fx = np.asarray(func(bi, x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        k = np.argwhere(~np.isfinite(fx))[0]
        raise NonFiniteSampleError([x[k[0], k[1]]], fx[k[0], k[1]], int(bi[k[0] * 15 + k[1]]))
    ik = h * (fx @ _WK)
    ig = h * (fx @ _WG15)
    # QUADPACK error calibration
    ah = np.abs(h)
    resabs = ah * (np.abs(fx) @ _WK)
    resasc = ah * (np.abs(fx - (ik / (2 * h))[:, None]) @ _WK)
    err = np.abs(ik - ig)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    err = np.maximum(err, 50 * np.finfo(float).eps * resabs)
    return ik, err


def adaptive_gk_batch(func, n_batch, atol=0.0, rtol=1e-10, max_sweeps=100, lo=0.0, hi=1.0,
                      return_panels=False):
    """Integrate ``n_batch`` 1-D functions over (lo, hi) simultaneously.

    ``func(batch_index, x)`` receives two equal-length arrays.  Each sweep
    bisects, in every unconverged batch, the panels whose error is at least
    half the largest panel error of that batch (a vectorised form of the
    QUADPACK global strategy).

    Returns (values, errors, converged) arrays of length ``n_batch``, plus
    the final panels ``(batch_index, a, b)`` when ``return_panels`` is set.
    """
    bidx = np.arange(n_batch)
    a = np.full(n_batch, float(lo))
    b = np.full(n_batch, float(hi))
    ival, ierr = _gk15(func, bidx, a, b)
    converged = np.zeros(n_batch, dtype=bool)
    for _ in range(max_sweeps):
        tot = np.bincount(bidx, ival, minlength=n_batch)
        err = np.bincount(bidx, ierr, minlength=n_batch)
        tol = np.maximum(atol, rtol * np.abs(tot))
        converged = err <= tol
        if converged.all():
            break
        emax = np.zeros(n_batch)
        np.maximum.at(emax, bidx, ierr)
        split = (~converged[bidx]) & (ierr >= 0.5 * emax[bidx]) & (ierr > 0)
        if not split.any():
            break
        sa, sb, sbi = a[split], b[split], bidx[split]
        mid = 0.5 * (sa + sb)
        na = np.concatenate([sa, mid])
        nb = np.concatenate([mid, sb])
        nbi = np.concatenate([sbi, sbi])
        if np.any(nb - na <= 1e-15 * np.maximum(1.0, np.abs(na))):
            break
        nval, nerr = _gk15(func, nbi, na, nb)
        keep = ~split
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        bidx = np.concatenate([bidx[keep], nbi])
        ival = np.concatenate([ival[keep], nval])
        ierr = np.concatenate([ierr[keep], nerr])
    tot = np.bincount(bidx, ival, minlength=n_batch)
    err = np.bincount(bidx, ierr, minlength=n_batch)
    converged = err <= np.maximum(atol, rtol * np.abs(tot))
    if return_panels:
        return tot, err, converged, (bidx, a, b)
    return tot, err, converged


def integrate_2d(f, spec: QuadSpec | None = None, *, atol=None, rtol=None) -> IntegralEstimate:
    """Integrate ``f(t1, t2)`` over the open unit square.

    Outer adaptive rule in t1; at every outer node the t2 integral is itself
    computed adaptively (all outer nodes of a sweep in one batch).  The error
    combines the outer G7/K15 estimate with the propagated inner errors.
    Hitting the sweep limit returns an estimate flagged ``converged=False``.
    """
    spec = spec or QuadSpec(dim=2, target_rel_error=1e-8)
    atol = spec.abs_tol if atol is None else atol
    rtol = spec.target_rel_error if rtol is None else rtol
    inner_ok = [True]
    inner_err = {}

    def outer(_bi, t1):
        vals, errs, ok = adaptive_gk_batch(
            lambda bi, t2: f(t1[bi], t2),
            len(t1),
            atol=0.1 * atol,
            rtol=0.1 * rtol,
            max_sweeps=spec.max_sweeps,
        )
        inner_ok[0] &= bool(ok.all())
        inner_err.update(zip(t1.tolist(), errs.tolist()))
        return vals

    val, err, ok, (_, pa, pb) = adaptive_gk_batch(
        outer, 1, atol=atol, rtol=rtol, max_sweeps=spec.max_sweeps, return_panels=True
    )
    # inner errors integrated with the outer rule over the accepted panels
    c, h = 0.5 * (pa + pb), 0.5 * (pb - pa)
    nodes = c[:, None] + h[:, None] * _NODES[None, :]
    e_nodes = np.array([inner_err[x] for x in nodes.ravel().tolist()]).reshape(nodes.shape)
    total_err = float(err[0]) + float(np.sum(h * (e_nodes @ _WK)))
    return IntegralEstimate(
        value=float(val[0]),
        std_error=total_err,
        n_total=0,
        seed=None,
        converged=bool(ok[0]) and inner_ok[0],
        transform=tuple(spec.transform),
    )


# ---------------------------------------------------------------- QMC engine


def pairwise_sum(xs) -> float:
    """Sum in a fixed binary tree over the given order."""
    xs = [float(x) for x in xs]
    if not xs:
        return 0.0
    while len(xs) > 1:
        nxt = [xs[i] + xs[i + 1] for i in range(0, len(xs) - 1, 2)]
        if len(xs) % 2:
            nxt.append(xs[-1])
        xs = nxt
    return xs[0]


def _replication_seeds(seed: int, replications: int):
    return np.random.SeedSequence(seed).spawn(replications)


def sobol_points(dim: int, seed_seq, start: int, count: int) -> np.ndarray:
    """Points ``start .. start+count-1`` of one scrambled Sobol' sequence."""
    eng = qmc.Sobol(dim, scramble=True, seed=np.random.default_rng(seed_seq))
    if start:
        eng.fast_forward(start)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return eng.random(count)


def _run_replication(f, dim, seed_seq, budget, chunk):
    eng = qmc.Sobol(dim, scramble=True, seed=np.random.default_rng(seed_seq))
    sums = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        for start in range(0, budget, chunk):
            u = eng.random(chunk)
            v = np.asarray(f(u), dtype=float)
            if v.shape != (chunk,):
                raise QuadratureError(f"integrand returned shape {v.shape}, expected ({chunk},)")
            if not np.all(np.isfinite(v)):
                k = int(np.argmax(~np.isfinite(v)))
                raise NonFiniteSampleError(u[k], v[k], start + k)
            sums.append(np.sum(v))
    return pairwise_sum(sums) / budget


def integrate_qmc(f, spec: QuadSpec, workers: int | None = None) -> IntegralEstimate:
    """Randomized QMC estimate of the integral of ``f`` over [0,1]^dim.

    ``f`` maps an (m, dim) array to m values.  The estimate is the mean over
    ``spec.replications`` independently scrambled Sobol' point sets, and the
    error is their standard deviation divided by sqrt(replications).
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    chunk = min(spec.budget, CHUNK)
    seeds = _replication_seeds(spec.seed, spec.replications)
    if workers == 1:
        reps = [_run_replication(f, spec.dim, s, spec.budget, chunk) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            reps = list(ex.map(lambda s: _run_replication(f, spec.dim, s, spec.budget, chunk), seeds))
    value = pairwise_sum(reps) / len(reps)
    dev = [(r - value) ** 2 for r in reps]
    std_error = math.sqrt(pairwise_sum(dev) / (len(reps) - 1) / len(reps))
    rel = std_error / abs(value) if value != 0 else (0.0 if std_error == 0 else math.inf)
    return IntegralEstimate(
        value=value,
        std_error=std_error,
        n_total=spec.budget * spec.replications,
        seed=spec.seed,
        converged=rel <= spec.target_rel_error,
        transform=tuple(spec.transform),
        replicate_values=tuple(reps),
    )
