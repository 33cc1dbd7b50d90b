"""The spin-s XXX Bethe equations as a square polynomial system.

The solver works with the cleared-denominator form

    f_k = (x_k + is)^N prod_{j != k} (x_k - x_j - i)
        - (x_k - is)^N prod_{j != k} (x_k - x_j + i),

which stays finite on exact strings.  The batch helpers accept arrays of
shape ``(P, M)`` so that many homotopy paths are evaluated at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import NonConvergent, PoleHit, RepeatedRoot, SingularEnergy
from .spin import HalfInt

__all__ = [
    "TAU_EQ",
    "TAU_IM",
    "TAU_EX",
    "BetheSystem",
    "RootSet",
    "RegularizationCoeffs",
    "residual",
    "residual_batch",
    "jacobian",
    "jacobian_batch",
    "scaled_residual_norm",
    "energy",
    "energy_regularized",
    "transfer_eigenvalue",
    "f_coefficient",
    "string_values",
    "string_indices",
]

TAU_EQ = 1e-8
TAU_IM = 1e-8
TAU_EX = 1e-7


@dataclass(frozen=True)
class BetheSystem:
    s: HalfInt
    N: int
    M: int

    def __post_init__(self):
        object.__setattr__(self, "s", HalfInt.from_value(self.s))
        if self.N < 1:
            raise ValueError("need at least one site")
        if self.M < 0 or 2 * self.M > self.s.twice * self.N:
            raise ValueError(f"M={self.M} outside 0..floor(sN) for s={self.s}, N={self.N}")

    @property
    def degree(self) -> int:
        """Total degree of every equation."""
        return self.N + self.M - 1

    @property
    def spin(self) -> float:
        return float(self.s)


def _sort_key_groups(values: Sequence[complex], tol: float) -> list[complex]:
    """Sort by real part, ties (within tol) broken by descending imaginary part."""
    by_real = sorted(values, key=lambda z: (z.real, -z.imag))
    out: list[complex] = []
    group: list[complex] = []
    for z in by_real:
        if group and abs(z.real - group[0].real) > tol:
            out.extend(sorted(group, key=lambda w: -w.imag))
            group = []
        group.append(z)
    out.extend(sorted(group, key=lambda w: -w.imag))
    return out


@dataclass(frozen=True)
class RootSet:
    """An unordered collection of rapidities.

    ``roots`` keeps whatever order it was built with; :meth:`canonical`
    returns the sorted representative used for deduplication and output.
    """

    roots: tuple[complex, ...] = ()

    def __init__(self, roots: Iterable[complex] = ()):
        object.__setattr__(self, "roots", tuple(complex(z) for z in roots))

    def __len__(self) -> int:
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def __getitem__(self, k):
        return self.roots[k]

    def as_array(self) -> np.ndarray:
        return np.array(self.roots, dtype=complex)

    def canonical(self, tol: float = TAU_EQ) -> "RootSet":
        return RootSet(_sort_key_groups(self.roots, tol))

    def clusters(self, tau: float = TAU_EQ, check_gap: bool = True) -> list[tuple[complex, int]]:
        from .homotopy import cluster_roots

        return cluster_roots(self, tau, check_gap=check_gap)

    def is_distinct(self, tau: float = TAU_EQ) -> bool:
        return all(k == 1 for _, k in self.clusters(tau, check_gap=False))

    def conjugate(self) -> "RootSet":
        return RootSet(z.conjugate() for z in self.roots)


@dataclass
class RegularizationCoeffs:
    """Constants c_1..c_{2s+1} of the epsilon-deformation of an exact string.

    The gauge fixes the last constant to zero.  ``consistency_residual``
    measures the mismatch between the chained recursion and its closing
    line; it vanishes for physical singular solutions.
    """

    c: list[complex] = field(default_factory=list)
    consistency_residual: float = 0.0


def _as_roots(roots) -> np.ndarray:
    if isinstance(roots, RootSet):
        return roots.as_array()
    return np.asarray(roots, dtype=complex)


def _leave_one_out_products(e: np.ndarray) -> np.ndarray:
    """out[..., k, j] = prod_{l != j} e[..., k, l]; exact when entries vanish."""
    M = e.shape[-1]
    ones = np.ones(e.shape[:-1] + (1,), dtype=e.dtype)
    prefix = np.concatenate([ones, np.cumprod(e[..., :-1], axis=-1)], axis=-1)
    suffix = np.concatenate([np.cumprod(e[..., :0:-1], axis=-1)[..., ::-1], ones], axis=-1)
    assert prefix.shape[-1] == M and suffix.shape[-1] == M
    return prefix * suffix


def _pieces(x: np.ndarray, s: float, N: int):
    M = x.shape[-1]
    diff = x[..., :, None] - x[..., None, :]
    eye = np.eye(M, dtype=bool)
    em = np.where(eye, 1.0, diff - 1j)
    ep = np.where(eye, 1.0, diff + 1j)
    return em, ep, x + 1j * s, x - 1j * s


def residual_batch(x: np.ndarray, s: float, N: int) -> np.ndarray:
    """Polynomial Bethe residuals for an array of root vectors, shape (..., M)."""
    x = np.asarray(x, dtype=complex)
    em, ep, up, dn = _pieces(x, s, N)
    return up**N * np.prod(em, axis=-1) - dn**N * np.prod(ep, axis=-1)


def jacobian_batch(x: np.ndarray, s: float, N: int) -> np.ndarray:
    """Analytic Jacobian d f_k / d x_j, shape (..., M, M)."""
    x = np.asarray(x, dtype=complex)
    M = x.shape[-1]
    em, ep, up, dn = _pieces(x, s, N)
    pm_loo = _leave_one_out_products(em)
    pp_loo = _leave_one_out_products(ep)
    eye = np.eye(M, dtype=bool)
    a = up**N
    b = dn**N
    pm = np.prod(em, axis=-1)
    pp = np.prod(ep, axis=-1)
    # off-diagonal: x_j enters only through the factor (x_k - x_j -+ i)
    jac = -(a[..., :, None] * pm_loo) + b[..., :, None] * pp_loo
    diag = (
        N * up ** (N - 1) * pm
        + a * np.sum(np.where(eye, 0.0, pm_loo), axis=-1)
        - N * dn ** (N - 1) * pp
        - b * np.sum(np.where(eye, 0.0, pp_loo), axis=-1)
    )
    jac = np.where(eye, 0.0, jac)
    idx = np.arange(M)
    jac[..., idx, idx] = diag
    return jac


def residual_scale(x: np.ndarray, s: float, N: int) -> np.ndarray:
    """Magnitude bound for each residual component; never zero."""
    x = np.asarray(x, dtype=complex)
    ax = np.abs(x)
    M = x.shape[-1]
    pair = ax[..., :, None] + ax[..., None, :] + 1.0
    pair = np.where(np.eye(M, dtype=bool), 1.0, pair)
    return (ax + s) ** N * np.prod(pair, axis=-1)


def scaled_residual_norm(x: np.ndarray, s: float, N: int) -> np.ndarray:
    """Max over k of |f_k| / residual_scale_k."""
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] == 0:
        return np.zeros(x.shape[:-1])
    return np.max(np.abs(residual_batch(x, s, N)) / residual_scale(x, s, N), axis=-1)


def residual(sys: BetheSystem, roots) -> np.ndarray:
    x = _as_roots(roots)
    if x.shape != (sys.M,):
        raise ValueError(f"expected {sys.M} roots, got {x.shape}")
    return residual_batch(x, sys.spin, sys.N)


def jacobian(sys: BetheSystem, roots) -> np.ndarray:
    x = _as_roots(roots)
    if x.shape != (sys.M,):
        raise ValueError(f"expected {sys.M} roots, got {x.shape}")
    return jacobian_batch(x, sys.spin, sys.N)


def energy(s, roots, tol: float = TAU_EQ) -> complex:
    """E = -sum_k s / (lambda_k^2 + s^2) relative to the reference state."""
    sv = float(HalfInt.from_value(s))
    x = _as_roots(roots)
    if np.any(np.abs(x - 1j * sv) < tol) or np.any(np.abs(x + 1j * sv) < tol):
        raise SingularEnergy("root at +-is; use energy_regularized")
    return complex(-np.sum(sv / (x * x + sv * sv)))


def string_values(s) -> list[complex]:
    """The exact string is, i(s-1), ..., -is, top to bottom."""
    s = HalfInt.from_value(s)
    return [1j * (s.twice - 2 * j) / 2 for j in range(s.twice + 1)]


def string_indices(roots, s, tol: float = TAU_EQ) -> Optional[list[int]]:
    """Indices of one copy of each exact-string member, or None if incomplete."""
    x = list(_as_roots(roots))
    used: set[int] = set()
    out = []
    for v in string_values(s):
        best = None
        for k, z in enumerate(x):
            if k in used:
                continue
            d = abs(z - v)
            if d < tol and (best is None or d < abs(x[best] - v)):
                best = k
        if best is None:
            return None
        used.add(best)
        out.append(best)
    return out


def _richardson(seq: Sequence[complex], ratio: float, orders: int) -> list[complex]:
    cur = list(seq)
    for p in range(1, orders + 1):
        f = ratio**p
        cur = [(f * cur[n + 1] - cur[n]) / (f - 1) for n in range(len(cur) - 1)]
    return cur


def energy_regularized(
    s,
    sol,
    coeffs: Optional[RegularizationCoeffs] = None,
    N: Optional[int] = None,
    tol: float = TAU_EQ,
    tau_ex: float = TAU_EX,
) -> complex:
    """Energy of a singular root set, as the epsilon -> 0 limit.

    The string members are moved to i(s+1-j) + eps + c_j eps^N.  The 1/eps
    poles from +-is cancel between the two ends of the string; the finite
    remainder is extrapolated with two Richardson passes over
    eps_n = 10^(-n/2), n = 4..12.
    """
    s = HalfInt.from_value(s)
    sv = float(s)
    x = _as_roots(sol).copy()
    idx = string_indices(x, s, tol)
    if idx is None:
        raise ValueError("root set does not contain the exact string")
    c = list(coeffs.c) if coeffs is not None and coeffs.c else [0.0] * len(idx)
    n_pow = N if N is not None else 1
    centres = x.copy()
    for j, k in enumerate(idx):
        centres[k] = string_values(s)[j]
    on_pole = np.array([k not in idx and (abs(x[k] - 1j * sv) < tol or abs(x[k] + 1j * sv) < tol)
                        for k in range(len(x))], dtype=bool)
    centres[on_pole] = np.round(x[on_pole].imag * 2) / 2 * 1j
    moved = np.zeros(len(x), dtype=bool)
    moved[idx] = True
    moved |= on_pole
    vals = []
    for n in range(4, 13):
        eps = 10.0 ** (-n / 2)
        shift = np.zeros(len(x), dtype=complex)
        for j, k in enumerate(idx):
            shift[k] = eps + c[j] * eps**n_pow
        shift[on_pole] = eps
        # (v + d - is)(v + d + is) with v exact keeps the pole factor exact
        lo = np.where(moved, (centres - 1j * sv) + shift, x - 1j * sv)
        hi = np.where(moved, (centres + 1j * sv) + shift, x + 1j * sv)
        vals.append(-np.sum(sv / (lo * hi)))
    ext = _richardson(vals, 10.0**0.5, 2)
    if abs(ext[-1] - ext[-2]) > tau_ex * max(1.0, abs(ext[-1])):
        raise NonConvergent(f"energy extrapolation did not settle: {ext[-3:]}")
    return complex(ext[-1])


def transfer_eigenvalue(sys: BetheSystem, roots, lam: complex, tol: float = TAU_EQ) -> complex:
    """Transfer-matrix eigenvalue Lambda(lam) for the given (on- or off-shell) roots."""
    x = _as_roots(roots)
    sv = sys.spin
    if abs(lam + 1j * sv) < tol or np.any(np.abs(lam - x) < tol):
        raise PoleHit(f"lambda={lam} hits a pole")
    d = lam - x
    first = np.prod((d - 1j) / d)
    second = ((lam - 1j * sv) / (lam + 1j * sv)) ** sys.N * np.prod((d + 1j) / d)
    return complex(first + second)


def f_coefficient(sys: BetheSystem, roots, k: int, tol: float = TAU_EQ) -> complex:
    """Bracket of the unwanted-term coefficient F_k (without the i/(lam - lam_k) prefactor).

    Vanishes exactly when root k satisfies its Bethe equation.
    """
    x = _as_roots(roots)
    sv = sys.spin
    d = x[k] - np.delete(x, k)
    if np.any(np.abs(d) < tol):
        raise RepeatedRoot(f"root {k} coincides with another root")
    if abs(x[k] + 1j * sv) < tol:
        raise PoleHit("root at -is: bracket diverges, use the singular-string logic")
    ratio = ((x[k] - 1j * sv) / (x[k] + 1j * sv)) ** sys.N
    return complex(np.prod((d - 1j) / d) - ratio * np.prod((d + 1j) / d))
