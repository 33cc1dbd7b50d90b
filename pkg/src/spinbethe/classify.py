"""Physicality taxonomy of Bethe solutions.

A solution is *singular* when it contains the exact string
{is, i(s-1), ..., -is}.  Singular solutions with pairwise distinct roots are
physical iff a single product condition on the remaining roots holds.
Solutions with repeated roots are *strange* candidates when the transfer
matrix eigenvalue stays finite at the repeated root (non-singular case) or
when the catalogued singular pattern's consistency condition holds (s = 1,
{i, 0, -i, 0}).  Everything else with repeated roots is routed to the
exact-diagonalization oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bethe import TAU_EQ, RegularizationCoeffs, RootSet, string_indices, string_values
from .errors import DerivativeOverflow, PoleInProduct, ZeroDenominator
from .spin import HalfInt

__all__ = [
    "TAU_PHYS",
    "Classification",
    "is_singular",
    "split_string",
    "singular_physical",
    "strange_nonsingular_check",
    "strange_singular_spin1_check",
    "regularization_coeffs",
    "remaining_product_identity",
    "spin1_strange_c2c4",
    "spin32_double_string_diagnostics",
    "classify",
]

TAU_PHYS = 1e-6

PATTERN_REGULAR = "regular"
PATTERN_SINGULAR = "singular"
PATTERN_REPEATED = "repeated"  # non-singular with repeated roots
PATTERN_SPIN1_STRANGE = "spin1-i0-i0"  # {i, 0, -i, 0} + distinct rest
PATTERN_SPIN32_DOUBLE = "spin3/2-double-string"  # {+-3i/2, +-i/2, +-i/2} + rest
PATTERN_UNKNOWN = "unknown"


@dataclass
class Classification:
    distinct: bool
    singular: bool
    singular_physical: Optional[bool] = None
    strange_candidate: Optional[bool] = None
    pattern: str = PATTERN_REGULAR
    needs_oracle: bool = False
    condition_residuals: dict[str, float] = field(default_factory=dict)


def _roots(sol) -> np.ndarray:
    if isinstance(sol, RootSet):
        return sol.as_array()
    return np.asarray(list(sol), dtype=complex)


def is_singular(sol, s, tol: float = TAU_EQ) -> bool:
    """True iff every exact-string value occurs among the roots."""
    return string_indices(_roots(sol), s, tol) is not None


def split_string(sol, s, tol: float = TAU_EQ) -> tuple[np.ndarray, np.ndarray]:
    """(string members in top-down order, remaining roots); ValueError if not singular."""
    x = _roots(sol)
    idx = string_indices(x, s, tol)
    if idx is None:
        raise ValueError("solution does not contain the exact string")
    rest = np.delete(x, idx)
    return x[idx], rest


def _check_poles(rest: np.ndarray, poles, tol: float, what: str):
    for p in poles:
        if rest.size and np.min(np.abs(rest - p)) < tol:
            raise PoleInProduct(f"remaining root at {p} in {what}")


def singular_physical(sol, s, N: int, tol: float = TAU_EQ, tau_phys: float = TAU_PHYS) -> tuple[bool, float]:
    """Physicality of a singular distinct-root solution.

    Evaluates [(-1)^{2s} prod_rest (l + is)/(l - is)]^N and compares with 1.
    Returns (physical, |value - 1|).
    """
    s = HalfInt.from_value(s)
    sv = float(s)
    _, rest = split_string(sol, s, tol)
    _check_poles(rest, (1j * sv, -1j * sv), tol, "physicality product")
    base = (-1) ** s.twice * np.prod((rest + 1j * sv) / (rest - 1j * sv))
    resid = abs(complex(base) ** N - 1)
    return resid < tau_phys, float(resid)


def remaining_product_identity(sol, s, N: int, tol: float = TAU_EQ) -> float:
    """|prod_rest ((l+is)/(l-is))^{N-1} (l - i(s+1))/(l + i(s+1)) - 1|.

    Automatically zero on-shell for singular distinct-root solutions; used as
    a sanity check on root refinement.
    """
    sv = float(HalfInt.from_value(s))
    _, rest = split_string(sol, s, tol)
    _check_poles(rest, (1j * sv, -1j * sv, -1j * (sv + 1)), tol, "product identity")
    val = np.prod(((rest + 1j * sv) / (rest - 1j * sv)) ** (N - 1) * (rest - 1j * (sv + 1)) / (rest + 1j * (sv + 1)))
    return float(abs(val - 1))


# ---------------------------------------------------------------------------
# truncated power series in h = lambda - mu


def _ser_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: len(a)]


def _ser_inv(a: np.ndarray) -> np.ndarray:
    n = len(a)
    out = np.zeros(n, dtype=complex)
    out[0] = 1 / a[0]
    for j in range(1, n):
        out[j] = -np.dot(a[1 : j + 1], out[j - 1 :: -1][:j]) / a[0]
    return out


def _ser_pow(a: np.ndarray, p: int) -> np.ndarray:
    out = np.zeros(len(a), dtype=complex)
    out[0] = 1
    base = a.copy()
    while p:
        if p & 1:
            out = _ser_mul(out, base)
        base = _ser_mul(base, base)
        p >>= 1
    return out


def _linear(c0: complex, n: int) -> np.ndarray:
    """Series of (h + c0) truncated to n terms."""
    out = np.zeros(n, dtype=complex)
    out[0] = c0
    if n > 1:
        out[1] = 1
    return out


def _bracket_series(mu: complex, k: int, others: np.ndarray, s: float, N: int, n: int) -> np.ndarray:
    """Taylor coefficients (order < n) at h = 0 of

    (h - i)^k prod_j (lam - l_j - i)/(lam - l_j)
      + (h + i)^k ((lam - is)/(lam + is))^N prod_j (lam - l_j + i)/(lam - l_j)
    with lam = mu + h.
    """
    first = _ser_pow(_linear(-1j, n), k)
    second = _ser_pow(_linear(1j, n), k)
    ratio = _ser_mul(_linear(mu - 1j * s, n), _ser_inv(_linear(mu + 1j * s, n)))
    second = _ser_mul(second, _ser_pow(ratio, N))
    for lj in others:
        inv = _ser_inv(_linear(mu - lj, n))
        first = _ser_mul(first, _ser_mul(_linear(mu - lj - 1j, n), inv))
        second = _ser_mul(second, _ser_mul(_linear(mu - lj + 1j, n), inv))
    return first + second


def strange_nonsingular_check(
    mu: complex, k: int, others, s, N: int, tol: float = TAU_EQ, tau_phys: float = TAU_PHYS
) -> tuple[bool, list[float]]:
    """Finiteness of the transfer-matrix eigenvalue at a k-fold root mu.

    Returns (holds, [|d^l/dlam^l bracket| at mu for l = 0..k-1]).  The
    derivatives come from exact truncated power-series products.
    """
    sv = float(HalfInt.from_value(s))
    others = _roots(others)
    if abs(mu + 1j * sv) < tol:
        raise DerivativeOverflow("mu sits on the pole -is of the vacuum ratio")
    if others.size and np.min(np.abs(others - mu)) < tol:
        raise DerivativeOverflow("another root coincides with mu")
    coef = _bracket_series(complex(mu), k, others, sv, N, k)
    resid = [float(abs(coef[l]) * math.factorial(l)) for l in range(k)]
    if not all(np.isfinite(resid)):
        raise DerivativeOverflow("derivative overflow near a pole")
    return all(r < tau_phys for r in resid), resid


def strange_singular_spin1_check(others, N: int, tol: float = TAU_EQ, tau_phys: float = TAU_PHYS) -> tuple[bool, float]:
    """s = 1 pattern {i, 0, -i, 0}: prod_j (l_j + 2i)/(l_j - 2i) = (-1)^N."""
    rest = _roots(others)
    _check_poles(rest, (2j,), tol, "spin-1 strange condition")
    val = complex(np.prod((rest + 2j) / (rest - 2j)))
    resid = abs(val - (-1) ** N)
    return resid < tau_phys, float(resid)


def spin1_strange_c2c4(others, N: int) -> tuple[complex, complex]:
    """The two expressions for c2*c4 from the k = 1 and k = 3 equations.

    They agree exactly when the spin-1 strange condition holds.
    """
    rest = _roots(others)
    if rest.size and np.min(np.abs(rest)) < TAU_EQ:
        raise PoleInProduct("remaining root at 0")
    a = -12 / (2j) ** N * np.prod((rest - 2j) / rest)
    b = -12 / (-2j) ** N * np.prod((rest + 2j) / rest)
    return complex(a), complex(b)


def spin32_double_string_diagnostics(others, N: int) -> dict[str, complex]:
    """c2*c5 and c3*c6 for the spin-3/2 pattern with both +-i/2 doubled.

    No closing relation between the two is known, so these are diagnostics
    only; the verdict comes from the oracle.
    """
    rest = _roots(others)
    _check_poles(rest, (0.5j, -0.5j), TAU_EQ, "spin-3/2 diagnostics")
    c2c5 = 8 / (3j) ** (N - 2) * np.prod((rest - 2.5j) / (rest - 0.5j))
    c3c6 = 8 / (-3j) ** (N - 2) * np.prod((rest + 2.5j) / (rest + 0.5j))
    return {"c2c5": complex(c2c5), "c3c6": complex(c3c6)}


def regularization_coeffs(sol, s, N: int, tol: float = TAU_EQ) -> RegularizationCoeffs:
    """Constants c_1..c_{2s+1} of lambda_j = i(s+1-j) + eps + c_j eps^N.

    The first 2s difference lines are chained; the closing line is compared
    with the chained value of c_{2s} - c_{2s+1} to give the consistency
    residual (relative).  Gauge: c_{2s+1} = 0.
    """
    s = HalfInt.from_value(s)
    sv = float(s)
    n = s.twice  # 2s
    _, rest = split_string(sol, s, tol)

    def prod(num_shift: complex, den_shift: complex) -> complex:
        den = rest - den_shift
        if den.size and np.min(np.abs(den)) < tol:
            raise ZeroDenominator(f"remaining root at {den_shift}")
        return complex(np.prod((rest - num_shift) / den))

    diffs = [(n + 1) / (2j * sv) ** (N - 1) * prod(1j * (sv + 1), 1j * (sv - 1))]
    for k in range(2, n + 1):
        factor = ((1 - k) / (n + 1 - k)) ** (N - 1) * ((n + 2 - k) / k)
        diffs.append(-diffs[-1] * factor * prod(1j * (sv + 2 - k), 1j * (sv - k)))
    closing = -(n + 1) / (-2j * sv) ** (N - 1) * prod(-1j * (sv + 1), -1j * (sv - 1))
    chained = diffs[-1]
    scale = max(abs(chained), abs(closing), 1e-300)
    resid = abs(chained - closing) / scale
    c = [0j] * (n + 1)
    for k in range(n - 1, -1, -1):
        c[k] = c[k + 1] + diffs[k]
    return RegularizationCoeffs(c=c, consistency_residual=float(resid))


# ---------------------------------------------------------------------------


def _pattern_spin1(clusters, tol) -> bool:
    mult = {}
    for z, m in clusters:
        for v in (1j, 0j, -1j):
            if abs(z - v) < tol:
                mult[v] = m
    others_repeated = any(m > 1 for z, m in clusters if all(abs(z - v) >= tol for v in (1j, 0j, -1j)))
    return mult.get(1j) == 1 and mult.get(-1j) == 1 and mult.get(0j) == 2 and not others_repeated


def _pattern_spin32(clusters, tol) -> bool:
    want = {1.5j: 1, 0.5j: 2, -0.5j: 2, -1.5j: 1}
    got = {}
    for z, m in clusters:
        for v in want:
            if abs(z - v) < tol:
                got[v] = m
    others_repeated = any(m > 1 for z, m in clusters if all(abs(z - v) >= tol for v in want))
    return got == want and not others_repeated


def _remove(x: np.ndarray, values, tol) -> np.ndarray:
    x = list(x)
    for v in values:
        k = int(np.argmin([abs(z - v) for z in x]))
        if abs(x[k] - v) >= tol:
            raise ValueError(f"{v} not present")
        x.pop(k)
    return np.array(x, dtype=complex)


def classify(sol, s, N: int, tol: float = TAU_EQ, tau_phys: float = TAU_PHYS) -> Classification:
    """Fill every taxonomy flag for one solution."""
    s = HalfInt.from_value(s)
    sv = float(s)
    x = _roots(sol)
    clusters = RootSet(x).clusters(tol, check_gap=False)
    distinct = all(m == 1 for _, m in clusters)
    singular = is_singular(x, s, tol)
    out = Classification(distinct=distinct, singular=singular)
    if distinct and not singular:
        return out
    if distinct and singular:
        out.pattern = PATTERN_SINGULAR
        phys, resid = singular_physical(x, s, N, tol, tau_phys)
        out.singular_physical = phys
        out.condition_residuals["physical"] = resid
        try:
            out.condition_residuals["consistency"] = regularization_coeffs(x, s, N, tol).consistency_residual
        except ZeroDenominator:
            out.condition_residuals["consistency"] = math.inf
        return out
    # repeated roots
    if not singular:
        out.pattern = PATTERN_REPEATED
        holds = True
        for mu, k in clusters:
            if k == 1:
                continue
            others = np.array([z for z in x if abs(z - mu) >= tol])
            try:
                ok, res = strange_nonsingular_check(mu, k, others, sv, N, tol, tau_phys)
            except DerivativeOverflow:
                ok, res = False, [math.inf]
            for l, r in enumerate(res):
                out.condition_residuals[f"mu={mu:.6g} l={l}"] = r
            holds &= ok
        out.strange_candidate = holds
        return out
    if s.twice == 2 and _pattern_spin1(clusters, tol):
        out.pattern = PATTERN_SPIN1_STRANGE
        others = _remove(x, (1j, 0j, -1j, 0j), tol)
        ok, resid = strange_singular_spin1_check(others, N, tol, tau_phys)
        out.strange_candidate = ok
        out.condition_residuals["spin1-strange"] = resid
        return out
    if s.twice == 3 and _pattern_spin32(clusters, tol):
        out.pattern = PATTERN_SPIN32_DOUBLE
        others = _remove(x, (1.5j, 0.5j, -0.5j, -1.5j, 0.5j, -0.5j), tol)
        diag = spin32_double_string_diagnostics(others, N)
        out.condition_residuals.update({k: abs(v) for k, v in diag.items()})
        out.strange_candidate = True
        out.needs_oracle = True
        return out
    out.pattern = PATTERN_UNKNOWN
    out.needs_oracle = True
    return out
