"""Exact-diagonalization oracle and algebraic Bethe ansatz on the full space.

Basis convention: site states are ordered m = s, s-1, ..., -s, so the first
basis vector of the chain is the all-up reference state |0>.  Site 1 is the
most significant tensor factor.

Regularized (singular or repeated-root) Bethe states are built as Laurent
series in the regulator: each root is a polynomial lambda0 + a t^p + c t^q in
a formal variable t, every creation operator is expanded exactly, and the
normalized limit t -> 0 is the leading non-vanishing coefficient.  This
avoids the eps^{-N} cancellation that ruins a finite-eps evaluation in
double precision.
"""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bethe import TAU_EQ, RegularizationCoeffs, RootSet, energy, energy_regularized, string_indices
from .classify import (
    PATTERN_REPEATED,
    PATTERN_SINGULAR,
    PATTERN_SPIN1_STRANGE,
    classify,
    regularization_coeffs,
    spin1_strange_c2c4,
)
from .errors import DimensionCap, NormalizationPole, PatternUnknown, ZeroVector
from .spin import HalfInt, q_polynomial

__all__ = [
    "TAU_ORACLE",
    "DIM_CAP",
    "SpinOps",
    "DensePairList",
    "spin_matrices",
    "build_hamiltonian",
    "diagonalize",
    "r_matrix",
    "apply_monodromy",
    "monodromy_entry",
    "apply_transfer",
    "reference_state",
    "bethe_state",
    "eigenstate_residual",
    "highest_weight_residual",
    "total_s_plus",
    "RootDeformation",
    "regularized_bethe_series",
    "regularized_bethe_state",
    "regularized_limit",
    "deformation_for",
    "spin1_strange_state",
    "Verdict",
    "Oracle",
    "verify_solution",
]

TAU_ORACLE = 1e-7
DIM_CAP = 4096


@dataclass(frozen=True)
class SpinOps:
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @property
    def splus(self) -> np.ndarray:
        return self.sx + 1j * self.sy

    @property
    def sminus(self) -> np.ndarray:
        return self.sx - 1j * self.sy


@dataclass
class DensePairList:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    shift: float = 0.0


def spin_matrices(s) -> SpinOps:
    s = HalfInt.from_value(s)
    if s.twice < 1:
        raise ValueError("spin must be >= 1/2")
    sv = float(s)
    m = sv - np.arange(s.twice + 1)
    sz = np.diag(m).astype(complex)
    # <m+1|s+|m> = sqrt(s(s+1) - m(m+1)); index of m+1 is one less than m
    sp = np.zeros((len(m), len(m)), dtype=complex)
    for k in range(1, len(m)):
        sp[k - 1, k] = math.sqrt(sv * (sv + 1) - m[k] * (m[k] + 1))
    sm = sp.conj().T
    return SpinOps(sx=(sp + sm) / 2, sy=(sp - sm) / 2j, sz=sz)


def _check_dim(s: HalfInt, N: int, cap: int) -> int:
    dim = (s.twice + 1) ** N
    if dim > cap:
        raise DimensionCap(f"dimension {dim} exceeds cap {cap}")
    return dim


def _two_site_q(s: HalfInt) -> np.ndarray:
    ops = spin_matrices(s)
    x = sum(np.kron(a, a) for a in (ops.sx, ops.sy, ops.sz))
    w, v = np.linalg.eigh(x)
    q = q_polynomial(s)
    # eigenvalues l(l+1)/2 - s(s+1) are exact quarter-integers
    qw = np.array([float(q(Fraction(round(float(e) * 4), 4))) for e in w])
    return (v * qw) @ v.conj().T


def build_hamiltonian(s, N: int, shifted: bool = True, cap: int = DIM_CAP) -> np.ndarray:
    """H = sum_n Q(s_n . s_{n+1}) with periodic wrap, optionally shifted so H|0> = 0."""
    s = HalfInt.from_value(s)
    if N < 2:
        raise ValueError("need N >= 2")
    dim = _check_dim(s, N, cap)
    d = s.twice + 1
    h2 = _two_site_q(s).reshape(d, d, d, d)
    H = np.zeros((dim, dim), dtype=complex)
    eye = np.eye(dim, dtype=complex).reshape((d,) * N + (dim,))
    for n in range(N):
        m = (n + 1) % N
        # apply the bond operator to every basis column
        t = np.tensordot(h2, eye, axes=([2, 3], [n, m]))  # (d, d, rest..., dim)
        t = np.moveaxis(t, [0, 1], [n, m])
        H += t.reshape(dim, dim)
    H = (H + H.conj().T) / 2
    if shifted:
        H -= H[0, 0].real * np.eye(dim)
    return H


def diagonalize(H: np.ndarray, shift: float = 0.0) -> DensePairList:
    w, v = np.linalg.eigh(H)
    return DensePairList(eigenvalues=w, eigenvectors=v, shift=shift)


def r_matrix(lam: complex, s, tol: float = 1e-14) -> np.ndarray:
    """(lam + i sigma . s)/(lam + is) on aux (2) x site (2s+1), aux index major."""
    s = HalfInt.from_value(s)
    sv = float(s)
    if abs(lam + 1j * sv) < tol:
        raise NormalizationPole(f"lambda = -is = {-1j * sv}")
    return _r_numerator(lam, s) / (lam + 1j * sv)


def _sigma_dot_s(s: HalfInt) -> np.ndarray:
    ops = spin_matrices(s)
    px = np.array([[0, 1], [1, 0]], dtype=complex)
    py = np.array([[0, -1j], [1j, 0]], dtype=complex)
    pz = np.array([[1, 0], [0, -1]], dtype=complex)
    return np.kron(px, ops.sx) + np.kron(py, ops.sy) + np.kron(pz, ops.sz)


def _r_numerator(lam: complex, s: HalfInt) -> np.ndarray:
    d = s.twice + 1
    return lam * np.eye(2 * d) + 1j * _sigma_dot_s(s)


_AUX = {"A": (0, 0), "B": (0, 1), "C": (1, 0), "D": (1, 1)}


def _apply_chain(mats: Sequence[np.ndarray], v: np.ndarray, d: int, N: int, col: int, row: int) -> np.ndarray:
    """<row| R_N ... R_1 |col> (aux indices) applied to v, site by site."""
    psi = np.zeros((2,) + (d,) * N + v.shape[1:], dtype=complex)
    psi[col] = v.reshape((d,) * N + v.shape[1:])
    for n in range(N):
        r = mats[n].reshape(2, d, 2, d)
        psi = np.tensordot(r, psi, axes=([2, 3], [0, n + 1]))  # (aux, site_n, other sites..., extra)
        psi = np.moveaxis(psi, 1, n + 1)
    return psi[row].reshape(v.shape)


def apply_monodromy(lam: complex, v: np.ndarray, s, N: int, which: str) -> np.ndarray:
    """Apply A, B, C or D of the monodromy matrix to a vector (or stack of columns)."""
    s = HalfInt.from_value(s)
    row, col = _AUX[which]
    r = r_matrix(lam, s)
    return _apply_chain([r] * N, np.asarray(v, dtype=complex), s.twice + 1, N, col, row)


def monodromy_entry(lam: complex, s, N: int, which: str, cap: int = DIM_CAP) -> np.ndarray:
    s = HalfInt.from_value(s)
    dim = _check_dim(s, N, cap)
    return apply_monodromy(lam, np.eye(dim, dtype=complex), s, N, which)


def apply_transfer(lam: complex, v: np.ndarray, s, N: int) -> np.ndarray:
    return apply_monodromy(lam, v, s, N, "A") + apply_monodromy(lam, v, s, N, "D")


def reference_state(s, N: int) -> np.ndarray:
    s = HalfInt.from_value(s)
    v = np.zeros((s.twice + 1) ** N, dtype=complex)
    v[0] = 1
    return v


def bethe_state(roots, s, N: int) -> np.ndarray:
    """prod_j B(lambda_j)|0>, unnormalized (the B's commute)."""
    s = HalfInt.from_value(s)
    v = reference_state(s, N)
    for lam in RootSet(roots) if not isinstance(roots, RootSet) else roots:
        v = apply_monodromy(lam, v, s, N, "B")
    return v


def eigenstate_residual(v: np.ndarray, H: np.ndarray) -> float:
    nv = np.linalg.norm(v)
    if nv == 0:
        raise ZeroVector("eigenstate residual of the zero vector")
    hv = H @ v
    rho = np.vdot(v, hv) / np.vdot(v, v)
    return float(np.linalg.norm(hv - rho * v) / nv)


def total_s_plus(s, N: int, v: np.ndarray) -> np.ndarray:
    s = HalfInt.from_value(s)
    d = s.twice + 1
    sp = spin_matrices(s).splus
    psi = np.asarray(v).reshape((d,) * N + np.shape(v)[1:])
    out = np.zeros_like(psi, dtype=complex)
    for n in range(N):
        out += np.moveaxis(np.tensordot(sp, psi, axes=([1], [n])), 0, n)
    return out.reshape(np.shape(v))


def highest_weight_residual(v: np.ndarray, s, N: int) -> float:
    nv = np.linalg.norm(v)
    if nv == 0:
        raise ZeroVector("highest-weight residual of the zero vector")
    return float(np.linalg.norm(total_s_plus(s, N, v)) / nv)


# ---------------------------------------------------------------------------
# regularized states as Laurent series in t


@dataclass
class RootDeformation:
    """lambda_j(t) = base_j + t^p + coef_j t^{q_j}, a polynomial in t."""

    base: list[complex]
    p: int = 1
    q: list[int] = field(default_factory=list)
    coef: list[complex] = field(default_factory=list)

    def poly(self, j: int) -> np.ndarray:
        deg = max(self.p, self.q[j])
        out = np.zeros(deg + 1, dtype=complex)
        out[0] += self.base[j]
        out[self.p] += 1
        out[self.q[j]] += self.coef[j]
        return out


def _laurent_inverse(poly: np.ndarray, n_terms: int) -> tuple[int, np.ndarray]:
    """1/poly(t) as t^{-k} * power series with n_terms coefficients."""
    nz = np.flatnonzero(np.abs(poly) > 0)
    k = int(nz[0])
    a = poly[k:]
    a = np.concatenate([a, np.zeros(max(0, n_terms - len(a)), dtype=complex)])[:n_terms]
    out = np.zeros(n_terms, dtype=complex)
    out[0] = 1 / a[0]
    for j in range(1, n_terms):
        out[j] = -np.dot(a[1 : j + 1], out[j - 1 :: -1][:j]) / a[0]
    return k, out


def regularized_bethe_series(deform: RootDeformation, s, N: int, order: int) -> tuple[int, np.ndarray]:
    """Laurent coefficients of prod_j B(lambda_j(t))|0>.

    Returns (lowest power, array of shape (n, dim)) holding the coefficients
    of t^{low}, ..., t^{order}.
    """
    s = HalfInt.from_value(s)
    sv = float(s)
    d = s.twice + 1
    base_num = 1j * _sigma_dot_s(s)
    eye = np.eye(2 * d)
    # total pole order, so that truncation keeps everything down to t^order
    poles = []
    for j in range(len(deform.base)):
        den = deform.poly(j).copy()
        den[0] += 1j * sv
        poles.append(int(np.flatnonzero(np.abs(den) > 0)[0]) * N)
    budget = order + sum(poles)
    n = budget + 1
    psi = np.zeros((n, (d**N)), dtype=complex)
    psi[0, 0] = 1.0
    low = 0
    for j in range(len(deform.base)):
        lam = deform.poly(j)
        # numerator R(t) = sum_k t^k R_k with R_0 = base + i sigma.s
        num = [lam[k] * eye + (base_num if k == 0 else 0) for k in range(len(lam))]
        # apply the chain of N numerators, one site at a time, as a series
        # state layout: (order, aux, site_1..site_N)
        ser = np.zeros((n, 2) + (d,) * N, dtype=complex)
        ser[:, 1] = psi.reshape((n,) + (d,) * N)
        for site in range(N):
            new = np.zeros_like(ser)
            for k, rk in enumerate(num):
                if not np.any(rk):
                    continue
                r = rk.reshape(2, d, 2, d)
                moved = np.tensordot(r, ser[: n - k], axes=([2, 3], [1, site + 2]))  # (aux, site, order, ...)
                moved = np.moveaxis(moved, [0, 1], [1, site + 2])
                new[k:] += moved
            ser = new
        out = ser[:, 0].reshape(n, d**N)
        # scalar prefactor (lambda + is)^{-N} as a Laurent series
        den = lam.copy()
        den[0] += 1j * sv
        k0, inv = _laurent_inverse(den, n)
        pref = np.zeros(n, dtype=complex)
        pref[0] = 1
        for _ in range(N):
            pref = np.convolve(pref, inv)[:n]
        low -= k0 * N
        # multiply series (shift handled through `low`)
        res = np.zeros_like(out)
        for k in range(n):
            if pref[k] != 0:
                res[k:] += pref[k] * out[: n - k]
        psi = res
    # coefficients of t^low .. t^{low + n - 1}; keep up to t^order
    keep = min(n, order - low + 1)
    return low, psi[:keep]


def regularized_limit(deform: RootDeformation, s, N: int, extra: int = 2, rel_tol: float = 1e-9):
    """Leading non-vanishing Laurent coefficient (the normalized t -> 0 limit).

    Returns (power, vector, coefficient norms).
    """
    sv = float(HalfInt.from_value(s))
    order = extra
    for _ in range(6):
        low, coeffs = regularized_bethe_series(deform, s, N, order)
        norms = np.linalg.norm(coeffs, axis=1)
        scale = max(norms.max(), 1e-300)
        # intermediate terms can be much larger than the surviving ones, so
        # judge vanishing against the largest coefficient magnitude seen
        nz = np.flatnonzero(norms > rel_tol * scale)
        if nz.size and nz[0] + extra < len(norms):
            k = int(nz[0])
            return low + k, coeffs[k], norms
        order += max(2, N)
    raise ZeroVector("regularized state vanishes to the computed order")


def regularized_bethe_state(sol, s, N: int, eps: float, coeffs=None, order: int = 4) -> np.ndarray:
    """Normalized Bethe state on the deformed roots at regulator eps.

    ``sol`` is a root set (the layout comes from :func:`deformation_for`,
    with the string constants replaced by ``coeffs.c`` when given) or a
    ready :class:`RootDeformation`.  Evaluated from the Laurent series
    truncated at t^order, where t = eps^{1/p}.
    """
    if not 0 < eps <= 0.1:
        raise ValueError("eps must lie in (0, 0.1]")
    if isinstance(sol, RootDeformation):
        deform = sol
    else:
        deform = deformation_for(sol, s, N)
        if coeffs is not None:
            c = list(getattr(coeffs, "c", coeffs))
            deform.coef[: len(c)] = c
    tval = eps ** (1.0 / deform.p)
    low, series = regularized_bethe_series(deform, s, N, order)
    powers = tval ** (low + np.arange(len(series)))
    v = powers @ series
    nv = np.linalg.norm(v)
    if nv == 0:
        raise ZeroVector("regularized state vanished")
    return v / nv


def deformation_for(sol, s, N: int, params: Optional[dict] = None) -> RootDeformation:
    """Regularization layout for a singular distinct-root solution or the
    catalogued s = 1 pattern {i, 0, -i, 0}.

    For distinct roots the string members move by eps + c_j eps^N with the
    constants of the recursion (other roots move by eps only: shifting every
    root by the same eps is a symmetry of the equations up to O(eps)
    corrections that the limit does not see).  For the s = 1 pattern the
    doubled zeros move by c eps^{N/2}; ``params`` may fix c1, c2, c3 (c4 then
    follows from c2 c4).
    """
    s = HalfInt.from_value(s)
    x = list(RootSet(sol).as_array())
    cls = classify(x, s, N)
    if cls.pattern == PATTERN_SINGULAR:
        coeffs = regularization_coeffs(x, s, N)
        idx = string_indices(x, s)
        rest = [z for k, z in enumerate(x) if k not in idx]
        base = [x[k] for k in idx] + rest
        # string members: t = eps, order N; others stay put
        n = len(idx)
        q = [N] * n + [0] * len(rest)
        return RootDeformation(base=base, p=1, q=q, coef=list(coeffs.c) + [0j] * len(rest))
    if cls.pattern == PATTERN_SPIN1_STRANGE:
        params = dict(params or {})
        rest = list(x)
        for v in (1j, 0j, -1j, 0j):
            k = int(np.argmin([abs(z - v) for z in rest]))
            rest.pop(k)
        prod_a, _ = spin1_strange_c2c4(rest, N)
        c2 = params.get("c2", 1.0)
        c4 = prod_a / c2
        c1 = params.get("c1", 0.0)
        c3 = params.get("c3", 0.0)
        base = [1j, 0j, -1j, 0j] + rest
        # t = eps^{1/2}: eps = t^2, eps^{N/2} = t^N, eps^N = t^{2N}
        q = [2 * N, N, 2 * N, N] + [0] * len(rest)
        coef = [c1, c2, c3, c4] + [0j] * len(rest)
        return RootDeformation(base=base, p=2, q=q, coef=coef)
    raise PatternUnknown(f"no regularization for pattern {cls.pattern}")


# ---------------------------------------------------------------------------
# verification


@dataclass
class Verdict:
    verdict: str  # physical | unphysical | undetermined
    energy: Optional[float] = None
    eigen_residual: float = math.nan
    hw_residual: float = math.nan
    level_match: Optional[bool] = None
    multiplet_ok: Optional[bool] = None
    note: str = ""


class Oracle:
    """Per-(s, N) cache of the shifted Hamiltonian and its spectrum."""

    def __init__(self, s, N: int, cap: int = DIM_CAP):
        self.s = HalfInt.from_value(s)
        self.N = N
        self.H = build_hamiltonian(self.s, N, shifted=True, cap=cap)
        self.spectrum = diagonalize(self.H)
        self._sz = None

    def total_sz(self) -> np.ndarray:
        if self._sz is None:
            d = self.s.twice + 1
            m = float(self.s) - np.arange(d)
            grid = np.zeros((d,) * self.N)
            for n in range(self.N):
                shape = [1] * self.N
                shape[n] = d
                grid = grid + m.reshape(shape)
            self._sz = grid.ravel()
        return self._sz

    def level_multiplicity(self, E: float, tol: float = 1e-7) -> int:
        return int(np.sum(np.abs(self.spectrum.eigenvalues - E) < tol))

    def verify(self, sol, tau: float = TAU_ORACLE) -> Verdict:
        return verify_solution(sol, self.s, self.N, oracle=self, tau=tau)


def spin1_strange_state(sol, s, N: int) -> tuple[np.ndarray, complex]:
    """Limit state of the s = 1 pattern {i, 0, -i, 0} and the fitted c1 - c3.

    The limit depends on c2, c4 only through their product, which is fixed
    analytically, and is affine in c1 - c3, for which no closed form is
    known.  That constant is chosen by least squares on the highest-weight
    condition (linear in it); the eigenvector test is then independent.
    """
    s = HalfInt.from_value(s)
    x = RootSet(sol).as_array()

    def limit(c1):
        deform = deformation_for(x, s, N, dict(c1=c1, c2=1.0, c3=0.0))
        low, coeffs = regularized_bethe_series(deform, s, N, 0)
        if low > 0:
            raise ZeroVector("limit vanishes")
        return coeffs[-1], coeffs[:-1]

    a, neg_a = limit(0.0)
    b1, neg_b = limit(1.0)
    b = b1 - a
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)
    if np.linalg.norm(neg_a) > 1e-8 * scale or np.linalg.norm(neg_b) > 1e-8 * scale:
        raise PatternUnknown("regularized state has a surviving pole")
    sa, sb = total_s_plus(s, N, a), total_s_plus(s, N, b)
    nb = np.vdot(sb, sb).real
    z = complex(-np.vdot(sb, sa) / nb) if nb > 0 else 0j
    return a + z * b, z


def _state_for(sol, s: HalfInt, N: int) -> tuple[np.ndarray, str, str]:
    x = RootSet(sol).as_array()
    cls = classify(x, s, N)
    if cls.pattern in ("regular", PATTERN_REPEATED):
        return bethe_state(x, s, N), cls.pattern, ""
    if cls.pattern == PATTERN_SPIN1_STRANGE:
        v, z = spin1_strange_state(x, s, N)
        return v, cls.pattern, f"fitted c1 - c3 = {z:.6g}"
    deform = deformation_for(x, s, N)
    _, v, _ = regularized_limit(deform, s, N)
    return v, cls.pattern, ""


def verify_solution(sol, s, N: int, oracle: Optional[Oracle] = None, tau: float = TAU_ORACLE) -> Verdict:
    """Eigenstate, highest-weight, energy-level and multiplet checks for one solution."""
    s = HalfInt.from_value(s)
    oracle = oracle or Oracle(s, N)
    x = RootSet(sol).as_array()
    M = len(x)
    try:
        v, pattern, note = _state_for(x, s, N)
    except PatternUnknown as exc:
        return Verdict("undetermined", note=str(exc))
    except ZeroVector as exc:
        return Verdict("unphysical", note=f"state vanishes: {exc}")
    nv = np.linalg.norm(v)
    if nv == 0:
        return Verdict("unphysical", note="zero Bethe vector")
    v = v / nv
    res = eigenstate_residual(v, oracle.H)
    hw = highest_weight_residual(v, s, N)
    rho = float(np.vdot(v, oracle.H @ v).real)
    out = Verdict("unphysical", energy=rho, eigen_residual=res, hw_residual=hw, note=note)
    if res < tau and hw < tau:
        out.verdict = "physical"
        # S = sN - M: the level must carry a 2S+1 multiplet
        S2 = s.twice * N - 2 * M
        out.level_match = oracle.level_multiplicity(rho) >= S2 + 1
        out.multiplet_ok = out.level_match
        try:
            if pattern == "regular":
                E = energy(s, x)
            elif pattern == PATTERN_SINGULAR:
                E = energy_regularized(s, x, N=N)
            else:
                E = None
            if E is not None:
                out.level_match = out.level_match and abs(E.real - rho) < tau * max(1.0, abs(rho)) * 10
        except Exception as exc:  # energy formula unavailable for this pattern
            out.note = (out.note + f"; energy formula skipped: {exc}").lstrip("; ")
    return out
