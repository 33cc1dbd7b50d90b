"""Total-degree homotopy continuation for the Bethe system.

The homotopy is H(x, t) = gamma (1 - t) g(x) + t f(x) with the start system
g_k = x_k^d - 1, d = N + M - 1.  Both g and f are equivariant under
permutations of the coordinates, so a permuted start point yields the
permuted path.  :func:`solve_all` therefore tracks one start point per
permutation orbit (multisets of root-of-unity exponents) unless asked to
track every path; the unordered solution set is the same either way.

Paths are tracked in batches with numpy: RK4 predictor, Newton corrector,
per-path adaptive step.  Near t = 1 a Cauchy endgame averages the path over
loops around t = 1, which recovers singular endpoints (repeated roots,
exact strings) to near machine precision.  Endpoints are finally polished
by Newton, first on the full system, then on the reduced system obtained
by fixing exact-string members and collapsing repeated clusters.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np

from .bethe import (
    TAU_EQ,
    BetheSystem,
    RootSet,
    jacobian_batch,
    residual_batch,
    scaled_residual_norm,
    string_values,
)
from .errors import AmbiguousCluster, PathCountOverflow

__all__ = [
    "HomotopyConfig",
    "PathOutcome",
    "SolutionRecord",
    "SolveReport",
    "start_system",
    "orbit_start_points",
    "track_path",
    "track_batch",
    "solve_all",
    "canonicalize",
    "cluster_roots",
    "same_rootset",
    "polish",
]

log = logging.getLogger(__name__)


@dataclass
class HomotopyConfig:
    gamma: Optional[complex] = None
    step_init: float = 0.02
    step_min: float = 1e-9
    step_max: float = 0.1
    corrector_tol: float = 1e-9
    corrector_max_iters: int = 3
    divergence_cap: float = 1e8
    refine_tol: float = 1e-11
    seed: int = 0
    path_budget: int = 2_000_000
    endgame_radii: tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
    endgame_samples: int = 32
    endgame_max_loops: int = 12
    snap_tol: float = 1e-2
    snap_tol_min: float = 1e-9
    singular_cond: float = 1e9
    endpoint_cap: float = 1e5
    escape_norm: float = 1e3
    symmetric: bool = True
    batch_size: int = 4096

    def __post_init__(self):
        if not 0 < self.step_min <= self.step_init <= self.step_max < 1:
            raise ValueError("need 0 < step_min <= step_init <= step_max < 1")
        if self.gamma is None:
            rng = np.random.default_rng(self.seed)
            self.gamma = complex(np.exp(2j * np.pi * rng.random()))
        else:
            self.gamma = complex(self.gamma)
            if abs(abs(self.gamma) - 1) > 1e-12:
                raise ValueError("gamma must lie on the unit circle")

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["gamma"] = [self.gamma.real, self.gamma.imag]
        out["endgame_radii"] = list(self.endgame_radii)
        return out


@dataclass
class PathOutcome:
    status: str  # converged | diverged | failed
    endpoint: Optional[RootSet]
    steps: int
    final_residual: float
    path_index: int = -1
    history: list[str] = field(default_factory=list)


@dataclass
class SolutionRecord:
    roots: RootSet
    residual: float
    path_index: int
    n_paths: int = 1
    history: list[str] = field(default_factory=list)
    # filled by classification / verification
    distinct: Optional[bool] = None
    singular: Optional[bool] = None
    singular_physical: Optional[bool] = None
    strange_candidate: Optional[bool] = None
    needs_oracle: bool = False
    oracle_verdict: Optional[str] = None
    energy: Optional[complex] = None
    condition_residuals: dict = field(default_factory=dict)
    oracle_residuals: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return len(self.roots)


@dataclass
class SolveReport:
    n_start: int = 0
    n_tracked: int = 0
    n_converged: int = 0
    n_diverged: int = 0
    n_failed: int = 0
    failures: list[int] = field(default_factory=list)


# ---------------------------------------------------------------------------
# start system


def start_system(sys: BetheSystem, cfg: HomotopyConfig) -> tuple[Iterator[np.ndarray], Callable]:
    """All d^M start points (as a generator) and the start-system residual."""
    if sys.M < 1:
        raise ValueError("start system needs M >= 1")
    d = sys.degree
    n_paths = d**sys.M
    if n_paths > cfg.path_budget:
        raise PathCountOverflow(f"{n_paths} paths exceed budget {cfg.path_budget}")
    roots = np.exp(2j * np.pi * np.arange(d) / d)

    def points():
        for combo in itertools.product(range(d), repeat=sys.M):
            yield roots[list(combo)]

    def g(x):
        return np.asarray(x) ** d - 1

    return points(), g


def orbit_start_points(sys: BetheSystem) -> np.ndarray:
    """One start point per permutation orbit, shape (C(d+M-1, M), M)."""
    d = sys.degree
    roots = np.exp(2j * np.pi * np.arange(d) / d)
    combos = np.array(list(itertools.combinations_with_replacement(range(d), sys.M)), dtype=int)
    return roots[combos]


def _orbit_sizes(sys: BetheSystem) -> np.ndarray:
    combos = itertools.combinations_with_replacement(range(sys.degree), sys.M)
    out = []
    for c in combos:
        size = math.factorial(sys.M)
        for _, grp in itertools.groupby(c):
            size //= math.factorial(len(list(grp)))
        out.append(size)
    return np.array(out)


# ---------------------------------------------------------------------------
# batched tracking


class _Homotopy:
    def __init__(self, sys: BetheSystem, gamma: complex):
        self.s = sys.spin
        self.N = sys.N
        self.d = sys.degree
        self.gamma = gamma

    def value(self, x, t):
        t = t[:, None]
        return self.gamma * (1 - t) * (x**self.d - 1) + t * residual_batch(x, self.s, self.N)

    def jac_x(self, x, t):
        jac = t[:, None, None] * jacobian_batch(x, self.s, self.N)
        idx = np.arange(x.shape[1])
        jac[:, idx, idx] += (self.gamma * (1 - t))[:, None] * self.d * x ** (self.d - 1)
        return jac

    def d_t(self, x, t):
        return residual_batch(x, self.s, self.N) - self.gamma * (x**self.d - 1)


def _solve(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched linear solve; returns (solution, ok-mask)."""
    try:
        return np.linalg.solve(a, b[..., None])[..., 0], np.ones(len(a), dtype=bool)
    except np.linalg.LinAlgError:
        out = np.zeros_like(b)
        ok = np.ones(len(a), dtype=bool)
        for p in range(len(a)):
            try:
                out[p] = np.linalg.solve(a[p], b[p])
            except np.linalg.LinAlgError:
                ok[p] = False
        return out, ok


def _velocity(hom: _Homotopy, x, t):
    v, ok = _solve(hom.jac_x(x, t), -hom.d_t(x, t))
    return v, ok


def _newton(hom: _Homotopy, x, t, iters: int, tol: float):
    """Fixed-t Newton; converged if the last update is below tol*(1+|x|) and contracting."""
    prev = np.full(len(x), np.inf)
    conv = np.zeros(len(x), dtype=bool)
    ok = np.ones(len(x), dtype=bool)
    for _ in range(iters):
        dx, good = _solve(hom.jac_x(x, t), -hom.value(x, t))
        ok &= good & np.all(np.isfinite(dx), axis=1)
        dx = np.where(ok[:, None], dx, 0)
        x = x + dx
        norm = np.linalg.norm(dx, axis=1)
        scale = 1.0 + np.linalg.norm(x, axis=1)
        ok &= norm <= np.maximum(prev * 0.5, tol * scale * 10)
        prev = norm
        conv = ok & (norm <= tol * scale)
        if np.all(conv | ~ok):
            break
    return x, conv & ok


def track_batch(
    hom: _Homotopy,
    x0: np.ndarray,
    t0: np.ndarray,
    t_end: float,
    cfg: HomotopyConfig,
    h0: Optional[np.ndarray] = None,
):
    """Track paths along real t from t0 to t_end.

    Returns (x, t, status, steps, h) where status is 0 = reached t_end,
    1 = diverged, 2 = failed.
    """
    x = x0.astype(complex).copy()
    t = np.asarray(t0, dtype=float).copy()
    P = len(x)
    h = np.full(P, cfg.step_init) if h0 is None else h0.copy()
    status = np.full(P, -1)
    steps = np.zeros(P, dtype=int)
    streak = np.zeros(P, dtype=int)
    status[t >= t_end] = 0
    while True:
        act = np.flatnonzero(status < 0)
        if act.size == 0:
            break
        xa, ta = x[act], t[act]
        ha = np.minimum(h[act], t_end - ta)
        # RK4 predictor in t
        k1, ok1 = _velocity(hom, xa, ta)
        k2, ok2 = _velocity(hom, xa + 0.5 * ha[:, None] * k1, ta + 0.5 * ha)
        k3, ok3 = _velocity(hom, xa + 0.5 * ha[:, None] * k2, ta + 0.5 * ha)
        tn = ta + ha
        k4, ok4 = _velocity(hom, xa + ha[:, None] * k3, tn)
        xp = xa + (ha / 6)[:, None] * (k1 + 2 * k2 + 2 * k3 + k4)
        pred_ok = ok1 & ok2 & ok3 & ok4 & np.all(np.isfinite(xp), axis=1)
        xp = np.where(pred_ok[:, None], xp, xa)
        xc, conv = _newton(hom, xp, tn, cfg.corrector_max_iters, cfg.corrector_tol)
        acc = conv & pred_ok
        steps[act] += 1
        ia = act[acc]
        x[ia] = xc[acc]
        t[ia] = np.where(t_end - tn[acc] < 1e-15, t_end, tn[acc])
        streak[ia] += 1
        grow = ia[streak[ia] >= 3]
        h[grow] = np.minimum(h[grow] * 2, cfg.step_max)
        streak[grow] = 0
        ir = act[~acc]
        h[ir] *= 0.5
        streak[ir] = 0
        status[ia[t[ia] >= t_end]] = 0
        status[ir[h[ir] < cfg.step_min]] = 2
        big = act[np.linalg.norm(x[act], axis=1) > cfg.divergence_cap]
        status[big] = 1
    return x, t, status, steps, h


def _cauchy_loops(hom: _Homotopy, x0: np.ndarray, r: float, cfg: HomotopyConfig):
    """Loop t = 1 - r e^{i theta} until each path closes; return (mean, closed-mask, cycles)."""
    P, M = x0.shape
    K = cfg.endgame_samples
    x = x0.copy()
    acc = np.zeros_like(x0)
    cycles = np.zeros(P, dtype=int)
    done = np.zeros(P, dtype=bool)
    dead = np.zeros(P, dtype=bool)
    result = np.zeros_like(x0)
    for loop in range(cfg.endgame_max_loops):
        act = np.flatnonzero(~done & ~dead)
        if act.size == 0:
            break
        xa = x[act]
        sa = acc[act]
        alive = np.ones(act.size, dtype=bool)
        for j in range(K):
            th0 = 2 * np.pi * j / K
            th1 = 2 * np.pi * (j + 1) / K
            t0 = np.full(act.size, 1 - r * np.exp(1j * th0))
            t1 = np.full(act.size, 1 - r * np.exp(1j * th1))
            sa = sa + xa
            # RK4 along the arc; complex dt is fine since H is holomorphic in t
            dt = (t1 - t0)[:, None]
            v1, ok1 = _velocity(hom, xa, t0)
            v2, ok2 = _velocity(hom, xa + 0.5 * dt * v1, 0.5 * (t0 + t1))
            v3, ok3 = _velocity(hom, xa + 0.5 * dt * v2, 0.5 * (t0 + t1))
            v4, ok4 = _velocity(hom, xa + dt * v3, t1)
            xp = xa + dt / 6 * (v1 + 2 * v2 + 2 * v3 + v4)
            good = ok1 & ok2 & ok3 & ok4 & np.all(np.isfinite(xp), axis=1)
            xp = np.where(good[:, None], xp, xa)
            xc, conv = _newton(hom, xp, t1, 6, cfg.corrector_tol)
            alive &= good & conv
            xa = np.where(alive[:, None], xc, xa)
        x[act] = xa
        acc[act] = sa
        cycles[act] += 1
        closed = np.linalg.norm(xa - x0[act], axis=1) <= 1e-6 * (1 + np.linalg.norm(x0[act], axis=1))
        fin = act[closed & alive]
        result[fin] = acc[fin] / (cycles[fin] * K)[:, None]
        done[fin] = True
        dead[act[~alive]] = True
    return result, done, cycles


# ---------------------------------------------------------------------------
# endpoint refinement


def _newton_full(x: np.ndarray, s: float, N: int, iters: int = 30) -> np.ndarray:
    best = x.copy()
    best_res = scaled_residual_norm(best, s, N)
    cur = x.copy()
    for _ in range(iters):
        try:
            dx = np.linalg.solve(jacobian_batch(cur, s, N), -residual_batch(cur, s, N))
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(dx)):
            break
        cur = cur + dx
        res = scaled_residual_norm(cur, s, N)
        if res < best_res:
            best, best_res = cur.copy(), res
        if np.linalg.norm(dx) <= 1e-15 * (1 + np.linalg.norm(cur)):
            break
    return best


def _structured_newton(x: np.ndarray, s_half, N: int, tol: float):
    """Snap exact-string members, collapse repeated clusters, Newton on the rest.

    Returns the polished root vector, or None when there is no structure at
    this tolerance or the reduced Newton iteration fails.
    """
    s = float(s_half)
    M = len(x)
    clusters = _cluster_indices(x, tol)
    svals = string_values(s_half)
    fixed = np.zeros(M, dtype=bool)
    out = x.copy()
    # a complete string lets every copy of a string value sit exactly on it
    centroids = [np.mean(x[c]) for c in clusters]
    has_string = all(any(abs(cz - v) < tol for cz in centroids) for v in svals)
    free_groups = []
    for c, cz in zip(clusters, centroids):
        hit = [v for v in svals if abs(cz - v) < tol] if has_string else []
        if hit:
            out[c] = hit[0]
            fixed[c] = True
        else:
            free_groups.append(c)
            out[c] = cz
    if not free_groups:
        return out
    if not fixed.any() and len(free_groups) == M:
        return None  # no structure: plain Newton, already tried
    reps = [g[0] for g in free_groups]
    y = np.array([out[g[0]] for g in free_groups])

    def expand(yv):
        z = out.copy()
        for g, val in zip(free_groups, yv):
            z[g] = val
        return z

    for _ in range(40):
        z = expand(y)
        f = residual_batch(z, s, N)[reps]
        jac = jacobian_batch(z, s, N)
        red = np.stack([jac[reps][:, g].sum(axis=1) for g in free_groups], axis=1)
        try:
            dy = np.linalg.solve(red, -f)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(dy)):
            return None
        y = y + dy
        if np.linalg.norm(dy) <= 1e-15 * (1 + np.linalg.norm(y)):
            break
    z = expand(y)
    if np.max(np.abs(z - x)) > 100 * tol:
        return None
    return z


def polish(x: np.ndarray, sys: BetheSystem, cfg: HomotopyConfig) -> tuple[np.ndarray, float, list[str]]:
    """Newton-polish an endpoint estimate; returns (roots, scaled residual, history).

    Nonsingular endpoints are kept as Newton leaves them.  At singular
    endpoints the residual is too flat to locate the point (a translated
    string w + {i, 0, -i} has residual ~ |w|^N), so exact structure is
    snapped in over a ladder of tolerances and the first exact hit wins.
    """
    s, N = sys.spin, sys.N
    hist = []
    r0 = float(scaled_residual_norm(x, s, N))
    hist.append(f"endgame residual {r0:.3e}")
    y = _newton_full(x, s, N)
    r1 = float(scaled_residual_norm(y, s, N))
    best, best_res = (y, r1) if r1 <= r0 else (x, r0)
    cond = _condition(best, s, N)
    hist.append(f"newton residual {best_res:.3e} cond {cond:.1e}")
    if cond < cfg.singular_cond:
        return best, best_res, hist
    # prefer the candidate with the most structure: string members fixed
    # exactly, then fewest clusters, then the smallest tolerance
    svals = string_values(sys.s)
    chosen = None
    tol = cfg.snap_tol_min
    while tol <= cfg.snap_tol * (1 + 1e-9):
        z = _structured_newton(best, sys.s, N, tol)
        if z is not None:
            r2 = float(scaled_residual_norm(z, s, N))
            if r2 <= cfg.refine_tol * 1e-3:
                n_fixed = int(sum(np.any(z == v) for v in svals))
                n_cl = len(_cluster_indices(z, TAU_EQ))
                key = (-n_fixed, n_cl)
                if chosen is None or key < chosen[0]:
                    chosen = (key, z, r2, tol, n_cl)
        tol *= 10
    if chosen is None:
        hist.append("no structured snap")
        return best, best_res, hist
    _, z, r2, tol, n_cl = chosen
    hist.append(f"structured snap tol {tol:.0e}: residual {r2:.3e} ({n_cl} clusters)")
    return z, r2, hist


def _condition(x: np.ndarray, s: float, N: int) -> float:
    if len(x) == 0:
        return 1.0
    jac = jacobian_batch(x, s, N)
    sv = np.linalg.svd(jac, compute_uv=False)
    return float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf


# ---------------------------------------------------------------------------
# clustering and canonical form


def _cluster_indices(x, tau: float) -> list[list[int]]:
    """Single-linkage clusters of the points (index lists)."""
    x = np.asarray(x, dtype=complex)
    n = len(x)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if abs(x[i] - x[j]) <= tau:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def cluster_roots(roots, tau: float = TAU_EQ, check_gap: bool = True) -> list[tuple[complex, int]]:
    """Single-linkage clusters as (centroid, multiplicity), in canonical order.

    Raises AmbiguousCluster when two clusters come closer than 10*tau.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    x = np.asarray(list(roots), dtype=complex)
    groups = _cluster_indices(x, tau)
    cents = [complex(np.mean(x[g])) for g in groups]
    if check_gap:
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                gap = np.min(np.abs(x[groups[a]][:, None] - x[groups[b]][None, :]))
                if gap < 10 * tau:
                    raise AmbiguousCluster(f"clusters {cents[a]} and {cents[b]} only {gap:.2e} apart")
    order = RootSet(cents).canonical(tau).roots
    mult = {c: len(g) for c, g in zip(cents, groups)}
    return [(c, mult[c]) for c in order]


def canonicalize(roots, tol: float = TAU_EQ) -> RootSet:
    """Sorted representative of an unordered root set (idempotent)."""
    if not isinstance(roots, RootSet):
        roots = RootSet(roots)
    return roots.canonical(tol)


def same_rootset(a, b, tau: float = TAU_EQ) -> bool:
    """Multiset equality of two root sets up to tau (greedy nearest matching)."""
    xa = list(np.asarray(list(a), dtype=complex))
    xb = list(np.asarray(list(b), dtype=complex))
    if len(xa) != len(xb):
        return False
    for z in xa:
        if not xb:
            return False
        k = int(np.argmin([abs(z - w) for w in xb]))
        if abs(z - xb[k]) > tau:
            return False
        xb.pop(k)
    return True


# ---------------------------------------------------------------------------
# driver


def _endgame(hom: _Homotopy, x: np.ndarray, h: np.ndarray, cfg: HomotopyConfig):
    """Run Cauchy loops at shrinking radii; return estimates and history per path."""
    P = len(x)
    est = np.full_like(x, np.nan)
    hist: list[list[str]] = [[] for _ in range(P)]
    status = np.zeros(P, dtype=int)
    cur_x = x.copy()
    cur_t = np.full(P, 1 - cfg.endgame_radii[0])
    settled = np.zeros(P, dtype=bool)
    prev_cycles = np.zeros(P, dtype=int)
    for level, r in enumerate(cfg.endgame_radii):
        act = np.flatnonzero(~settled & (status == 0))
        if act.size == 0:
            break
        if level > 0:
            xa, ta, st, _, _ = track_batch(hom, cur_x[act], cur_t[act], 1 - r, cfg)
            cur_x[act], cur_t[act] = xa, ta
            # step-size collapse far out is a path heading to infinity
            st = np.where((st == 2) & (np.max(np.abs(xa), axis=1) > cfg.escape_norm), 1, st)
            status[act[st != 0]] = st[st != 0]
            act = act[st == 0]
        mean, closed, cycles = _cauchy_loops(hom, cur_x[act], r, cfg)
        for p, m, c, cy in zip(act, mean, closed, cycles):
            if c:
                # a loop that encloses branch points of other sheets returns the
                # centroid of several endpoints, which is stable in r but is not
                # a solution; only a near-zero residual settles the path
                res = float(scaled_residual_norm(m, hom.s, hom.N))
                hist[p].append(f"cauchy r={r:g} cycles={cy} residual {res:.1e}")
                # a multi-cycle loop at a large radius can also enclose stray
                # branch points whose centroid happens to be a genuine root, so
                # it has to repeat at the next radius before it is trusted
                agree = (
                    prev_cycles[p] == cy
                    and np.all(np.isfinite(est[p]))
                    and np.max(np.abs(m - est[p])) <= 1e-6 * (1 + np.max(np.abs(m)))
                )
                if res <= cfg.refine_tol and (cy == 1 or agree):
                    settled[p] = True
                elif np.all(np.isfinite(est[p])) and res <= 1e-8:
                    diff = np.max(np.abs(m - est[p]))
                    if diff <= 1e-9 * (1 + np.max(np.abs(m))):
                        settled[p] = True
                est[p] = m
                prev_cycles[p] = cy
            else:
                hist[p].append(f"cauchy r={r:g} did not close")
    # paths whose loops never closed fall back to their last tracked point
    for p in range(P):
        if status[p] == 0 and not np.all(np.isfinite(est[p])):
            est[p] = cur_x[p]
        # a pole at t = 1 still has a finite Cauchy mean (its Laurent constant
        # term), so compare against the tracked point to catch divergence
        if status[p] == 0 and np.max(np.abs(cur_x[p])) > 100 * (1 + np.max(np.abs(est[p]))):
            status[p] = 1
            hist[p].append(
                f"diverging: |x| {np.max(np.abs(cur_x[p])):.3g} vs endgame mean {np.max(np.abs(est[p])):.3g}"
            )
    return est, status, hist


def solve_all(sys: BetheSystem, cfg: Optional[HomotopyConfig] = None, report: Optional[SolveReport] = None):
    """All finite solutions of the polynomial Bethe system, each once.

    Returns a list of SolutionRecord in canonical order (by canonical roots).
    Per-path failures are tallied in ``report`` instead of aborting.
    """
    cfg = cfg or HomotopyConfig()
    report = report if report is not None else SolveReport()
    if sys.M == 0:
        report.n_start = report.n_tracked = report.n_converged = 1
        return [SolutionRecord(RootSet(()), 0.0, 0, history=["empty root set"])]
    total = sys.degree**sys.M
    if total > cfg.path_budget:
        raise PathCountOverflow(f"{total} paths exceed budget {cfg.path_budget}")
    if cfg.symmetric:
        starts = orbit_start_points(sys)
    else:
        starts = np.array(list(start_system(sys, cfg)[0]))
    report.n_start = total
    report.n_tracked = len(starts)
    hom = _Homotopy(sys, cfg.gamma)
    endpoints: list[PathOutcome] = []
    for lo in range(0, len(starts), cfg.batch_size):
        chunk = starts[lo : lo + cfg.batch_size]
        endpoints.extend(_track_chunk(hom, chunk, lo, sys, cfg))
    records: list[SolutionRecord] = []
    for out in endpoints:
        if out.status == "converged":
            report.n_converged += 1
            _merge(records, out, cfg)
        elif out.status == "diverged":
            report.n_diverged += 1
        else:
            report.n_failed += 1
            report.failures.append(out.path_index)
    records.sort(key=_record_key)
    return records


def _record_key(rec: SolutionRecord):
    return tuple((round(z.real, 6), -round(z.imag, 6)) for z in rec.roots.roots)


def _track_chunk(hom: _Homotopy, chunk: np.ndarray, offset: int, sys: BetheSystem, cfg: HomotopyConfig):
    t_stop = 1 - cfg.endgame_radii[0]
    x, t, st, steps, h = track_batch(hom, chunk, np.zeros(len(chunk)), t_stop, cfg)
    st = np.where((st == 2) & (np.max(np.abs(x), axis=1) > cfg.escape_norm), 1, st)
    stop_norm = np.max(np.abs(x), axis=1)
    outcomes: list[Optional[PathOutcome]] = [None] * len(chunk)
    for p in np.flatnonzero(st != 0):
        status = "diverged" if st[p] == 1 else "failed"
        outcomes[p] = PathOutcome(
            status, None, int(steps[p]), math.inf, offset + int(p), [f"tracking stopped at t={t[p]:.6g}, |x|={stop_norm[p]:.3g}"]
        )
    live = np.flatnonzero(st == 0)
    if live.size:
        est, est_status, hist = _endgame(hom, x[live], h[live], cfg)
        for q, p in enumerate(live):
            if est_status[q] != 0:
                status = "diverged" if est_status[q] == 1 else "failed"
                outcomes[p] = PathOutcome(status, None, int(steps[p]), math.inf, offset + int(p), hist[q])
                continue
            y, res, phist = polish(est[q], sys, cfg)
            hq = hist[q] + phist
            if np.max(np.abs(y)) > cfg.endpoint_cap or not np.all(np.isfinite(y)):
                outcomes[p] = PathOutcome("diverged", None, int(steps[p]), res, offset + int(p), hq)
            elif res < cfg.refine_tol:
                outcomes[p] = PathOutcome("converged", RootSet(y), int(steps[p]), res, offset + int(p), hq)
            elif np.linalg.norm(est[q]) > 1e3:
                outcomes[p] = PathOutcome("diverged", None, int(steps[p]), res, offset + int(p), hq)
            else:
                outcomes[p] = PathOutcome("failed", RootSet(y), int(steps[p]), res, offset + int(p), hq)
    return outcomes


def _merge(records: list[SolutionRecord], out: PathOutcome, cfg: HomotopyConfig):
    roots = canonicalize(out.endpoint)
    for rec in records:
        if same_rootset(rec.roots, roots, TAU_EQ * max(1.0, np.max(np.abs(roots.as_array())))):
            rec.n_paths += 1
            if out.final_residual < rec.residual:
                rec.roots, rec.residual = roots, out.final_residual
            return
    records.append(SolutionRecord(roots, out.final_residual, out.path_index, 1, list(out.history)))


def track_path(start, sys: BetheSystem, cfg: Optional[HomotopyConfig] = None) -> PathOutcome:
    """Track a single start point through tracking, endgame and polishing."""
    cfg = cfg or HomotopyConfig()
    x0 = np.asarray(list(start), dtype=complex)[None, :]
    return _track_chunk(_Homotopy(sys, cfg.gamma), x0, 0, sys, cfg)[0]
