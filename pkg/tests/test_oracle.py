import math

import numpy as np
import pytest

from spinbethe.bethe import BetheSystem, f_coefficient, residual, transfer_eigenvalue
from spinbethe.classify import regularization_coeffs
from spinbethe.homotopy import solve_all
from spinbethe.errors import DimensionCap, NormalizationPole, PatternUnknown, ZeroVector
from spinbethe.oracle import (
    Oracle,
    apply_monodromy,
    apply_transfer,
    bethe_state,
    build_hamiltonian,
    deformation_for,
    diagonalize,
    eigenstate_residual,
    highest_weight_residual,
    r_matrix,
    reference_state,
    regularized_bethe_state,
    regularized_limit,
    spin_matrices,
    total_s_plus,
    verify_solution,
)


@pytest.mark.parametrize("s", ["1/2", "1", "3/2", "2"])
def test_spin_matrices(s):
    ops = spin_matrices(s)
    sv = eval(s)
    comm = ops.sx @ ops.sy - ops.sy @ ops.sx
    assert np.allclose(comm, 1j * ops.sz, atol=1e-12)
    cas = ops.sx @ ops.sx + ops.sy @ ops.sy + ops.sz @ ops.sz
    assert np.allclose(cas, sv * (sv + 1) * np.eye(len(cas)), atol=1e-12)
    assert np.allclose(np.diag(ops.sz), sv - np.arange(len(cas)))


def test_spin_matrix_examples():
    assert np.allclose(spin_matrices("1/2").sz, np.diag([0.5, -0.5]))
    sp = spin_matrices(1).splus
    assert np.allclose(np.diag(sp, 1), [math.sqrt(2)] * 2)


def _levels(w):
    vals, counts = np.unique(np.round(w, 8), return_counts=True)
    return dict(zip(vals.tolist(), counts.tolist()))


def test_hamiltonian_spin1_n2():
    w = diagonalize(build_hamiltonian(1, 2)).eigenvalues
    assert _levels(w) == {-3.0: 1, -1.0: 3, 0.0: 5}
    top = np.linalg.eigvalsh(build_hamiltonian(1, 2, shifted=False)).max()
    assert abs(top - 3) < 1e-12


def test_hamiltonian_spin32_n2_degeneracies():
    w = diagonalize(build_hamiltonian("3/2", 2)).eigenvalues
    assert sorted(_levels(w).values()) == [1, 3, 5, 7]


def _translation(d, N):
    dim = d**N
    idx = np.arange(dim).reshape((d,) * N)
    perm = np.moveaxis(idx, 0, -1).ravel()
    return np.eye(dim)[perm]


@pytest.mark.parametrize("s,N", [("1/2", 5), (1, 4), ("3/2", 3)])
def test_hamiltonian_symmetries(s, N):
    H = build_hamiltonian(s, N)
    assert np.allclose(H, H.conj().T, atol=1e-12)
    o = Oracle(s, N)
    Sz = np.diag(o.total_sz())
    assert np.abs(H @ Sz - Sz @ H).max() < 1e-10
    d = round(2 * eval(str(s))) + 1
    T = _translation(d, N)
    assert np.abs(T @ H - H @ T).max() < 1e-9
    assert abs(H[0, 0]) < 1e-12


def test_dimension_cap():
    with pytest.raises(DimensionCap):
        build_hamiltonian(1, 9)
    assert build_hamiltonian(1, 3, cap=27).shape == (27, 27)


def test_r_matrix():
    assert np.allclose(r_matrix(1e9, 1), np.eye(6), atol=1e-8)
    with pytest.raises(NormalizationPole):
        r_matrix(-1j, 1)


@pytest.mark.parametrize("s", ["1/2", "1", "3/2"])
def test_yang_baxter(s):
    rng = np.random.default_rng(1)
    lam, mu = rng.normal(size=2) + 1j * rng.normal(size=2)
    d = r_matrix(0.3, s).shape[0] // 2
    P = np.zeros((4, 4))
    for a in range(2):
        for b in range(2):
            P[2 * a + b, 2 * b + a] = 1
    # ordering (a, b, site)
    Rab = np.kron((lam - mu) * np.eye(4) + 1j * P, np.eye(d))
    I2 = np.eye(2)
    Ra = np.einsum("xiyj,ab->xaiybj", r_matrix(lam, s).reshape(2, d, 2, d), I2).reshape(4 * d, 4 * d)
    Rb = np.einsum("aibj,xy->xaiybj", r_matrix(mu, s).reshape(2, d, 2, d), I2).reshape(4 * d, 4 * d)
    assert np.abs(Rab @ Ra @ Rb - Rb @ Ra @ Rab).max() < 1e-10


@pytest.mark.parametrize("s,N", [(1, 3), ("3/2", 2), ("1/2", 5)])
def test_monodromy_on_reference(s, N):
    lam = 0.4 + 0.3j
    sv = eval(str(s))
    v0 = reference_state(s, N)
    assert np.allclose(apply_monodromy(lam, v0, s, N, "A"), v0)
    assert np.allclose(apply_monodromy(lam, v0, s, N, "D"), ((lam - 1j * sv) / (lam + 1j * sv)) ** N * v0)
    assert np.allclose(apply_monodromy(lam, v0, s, N, "C"), 0)


def test_bethe_state_examples():
    H = build_hamiltonian(1, 2)
    v = bethe_state([0], 1, 2)
    assert eigenstate_residual(v, H) < 1e-9
    assert abs(np.vdot(v, H @ v) / np.vdot(v, v) + 1) < 1e-12
    a = 1 / math.sqrt(3)
    v = bethe_state([1j * a, -1j * a], 1, 2)
    assert eigenstate_residual(v, H) < 1e-9
    assert abs(np.vdot(v, H @ v) / np.vdot(v, v) + 3) < 1e-12


def test_off_shell_unwanted_term():
    s, N, mu, lam = 1, 2, 1.0, 1.3 + 0.2j
    sys = BetheSystem(s, N, 1)
    v = bethe_state([mu], s, N)
    w = apply_transfer(lam, v, s, N) - transfer_eigenvalue(sys, [mu], lam) * v
    coef = 1j / (lam - mu) * f_coefficient(sys, [mu], 0)
    assert np.linalg.norm(w - coef * bethe_state([lam], s, N)) < 1e-9


def test_transfer_eigenvalue_on_shell():
    s, N = 1, 3
    sols = [r for r in solve_all(BetheSystem(s, N, 2)) if r.roots.is_distinct()]
    roots = sols[0].roots.as_array()
    v = bethe_state(roots, s, N)
    rng = np.random.default_rng(5)
    for lam in rng.normal(size=5) + 1j * rng.normal(size=5):
        lv = transfer_eigenvalue(BetheSystem(s, N, 2), roots, lam)
        assert np.linalg.norm(apply_transfer(lam, v, s, N) - lv * v) < 1e-8 * np.linalg.norm(v)


def test_transfer_matrices_commute():
    s, N = 1, 3
    rng = np.random.default_rng(2)
    lam, mu = rng.normal(size=2) + 1j * rng.normal(size=2)
    V = rng.normal(size=(27, 10)) + 1j * rng.normal(size=(27, 10))
    a = apply_transfer(lam, apply_transfer(mu, V, s, N), s, N)
    b = apply_transfer(mu, apply_transfer(lam, V, s, N), s, N)
    assert np.abs(a - b).max() < 1e-9


def test_residual_helpers():
    H = build_hamiltonian(1, 3)
    w, V = np.linalg.eigh(H)
    assert eigenstate_residual(V[:, 4], H) < 1e-10
    rng = np.random.default_rng(0)
    assert eigenstate_residual(rng.normal(size=27) + 0j, H) > 0.1
    with pytest.raises(ZeroVector):
        eigenstate_residual(np.zeros(27), H)
    v0 = reference_state(1, 3)
    assert highest_weight_residual(v0, 1, 3) == 0
    down = np.conj(total_s_plus(1, 3, np.eye(27))).T @ v0  # S- |0>
    assert highest_weight_residual(down, 1, 3) > 0.5


def _dist(a, b):
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    ov = np.vdot(a, b)
    return np.linalg.norm(a * ov / abs(ov) - b)


def test_regularized_convergence_spin1_n3():
    sol = [1j, 0, -1j]
    H = build_hamiltonian(1, 3)
    coeffs = regularization_coeffs(sol, 1, 3)
    _, lim, _ = regularized_limit(deformation_for(sol, 1, 3), 1, 3)
    assert eigenstate_residual(lim, H) < 1e-10
    a = regularized_bethe_state(sol, 1, 3, 1e-2, coeffs)
    b = regularized_bethe_state(sol, 1, 3, 1e-3, coeffs)
    # the common eps shift of the string gives an O(eps) correction
    assert _dist(a, b) < 0.03
    assert 9 < _dist(a, lim) / _dist(b, lim) < 11
    assert eigenstate_residual(b, H) < 0.11 * eigenstate_residual(a, H)
    assert eigenstate_residual(b, H) < 2e-3


def test_unphysical_singular_residual_plateaus():
    sol = [0.5j, -0.5j]  # odd N: the two-string is unphysical
    H = build_hamiltonian("1/2", 5)
    _, lim, _ = regularized_limit(deformation_for(sol, "1/2", 5), "1/2", 5)
    assert eigenstate_residual(lim, H) > 0.01
    r = [eigenstate_residual(regularized_bethe_state(sol, "1/2", 5, e), H) for e in (1e-2, 1e-3)]
    assert abs(r[0] - r[1]) < 0.1 * r[1]


def test_regularization_gauge_independence():
    sol = [1j, 0, -1j]
    base = deformation_for(sol, 1, 3)
    _, v0, _ = regularized_limit(base, 1, 3)
    for shift in (1.0, -2.5 + 0.7j):
        d = deformation_for(sol, 1, 3)
        d.coef[:3] = [c + shift for c in d.coef[:3]]
        _, v1, _ = regularized_limit(d, 1, 3)
        ov = abs(np.vdot(v0, v1)) / (np.linalg.norm(v0) * np.linalg.norm(v1))
        assert abs(ov - 1) < 1e-10


def test_regularized_eps_range():
    with pytest.raises(ValueError):
        regularized_bethe_state([1j, 0, -1j], 1, 3, 0.5)


def test_unknown_pattern():
    with pytest.raises(PatternUnknown):
        deformation_for([1j, 1j, 0, -1j], 1, 4)
    assert verify_solution([1j, 1j, 0, -1j], 1, 4).verdict == "undetermined"


def test_verify_examples():
    v = verify_solution([0, 0], "3/2", 3)
    assert v.verdict == "physical" and v.level_match
    assert abs(v.energy + 4 / 3) < 1e-9
    v = verify_solution([1j, 0, -1j], 1, 3)
    assert v.verdict == "physical" and v.level_match
    # s = 1/2 two-string is physical only for even N
    assert verify_solution([0.5j, -0.5j], "1/2", 4).verdict == "physical"
    assert verify_solution([0.5j, -0.5j], "1/2", 5).verdict == "unphysical"


@pytest.mark.parametrize("N", [4, 6])
def test_spin1_strange_physical(N):
    roots = [1j, 0, -1j, 0]
    if N == 6:
        # polish the pair +-ia on its own (regular) Bethe equation
        sys = BetheSystem(1, 6, 6)

        def f(a):
            return residual(sys, roots + [1j * a, -1j * a])[4]

        a, h = 0.474498, 1e-7
        for _ in range(8):
            a = (a - f(a) / ((f(a + h) - f(a - h)) / (2 * h))).real
        roots = roots + [1j * a, -1j * a]
    v = verify_solution(roots, 1, N)
    assert v.verdict == "physical"
    assert v.level_match
