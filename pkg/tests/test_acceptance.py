"""Acceptance criteria 1-9.

Each test records one PASS/FAIL line through the ``criterion`` fixture; the
lines are printed together at the end of the run.  Tolerances are pinned
here, not taken from module defaults.
"""
import math

import numpy as np
import pytest

from conftest import extended_enabled
from spinbethe.bethe import BetheSystem, energy
from spinbethe.classify import singular_physical
from spinbethe.homotopy import solve_all
from spinbethe.oracle import Oracle, verify_solution
from spinbethe.reptheory import CensusRow, dimension_check, expected_count, ledger, multiplicity
from spinbethe.spin import HalfInt

TOL_SPECTRUM = 1e-7
TOL_M1 = 1e-10
TOL_ROOT_SIG = 5e-6  # five significant figures

TABLE_S1 = {
    2: [(1, 0, 0, 0, 1), (1, 0, 0, 0, 1)],
    3: [(2, 0, 0, 0, 2), (3, 0, 0, 0, 3), (1, 1, 1, 0, 1)],
    4: [(3, 0, 0, 0, 3), (6, 0, 0, 0, 6), (6, 1, 1, 0, 6), (4, 2, 0, 1, 3)],
    5: [(4, 0, 0, 0, 4), (10, 0, 0, 0, 10), (15, 1, 1, 0, 15), (19, 4, 0, 0, 15), (14, 10, 2, 0, 6)],
    6: [
        (5, 0, 0, 0, 5), (15, 0, 0, 0, 15), (29, 1, 1, 0, 29), (43, 4, 0, 1, 40),
        (48, 15, 3, 0, 36), (41, 28, 0, 2, 15),
    ],
}

TABLE_S32 = {
    2: [(1, 0, 0, 0, 1), (1, 0, 0, 0, 1), (1, 0, 0, 0, 1)],
    3: [(2, 0, 0, 0, 2), (2, 0, 0, 1, 3), (4, 0, 0, 0, 4), (3, 1, 0, 0, 2)],
    4: [(3, 0, 0, 0, 3), (6, 0, 0, 0, 6), (10, 0, 0, 0, 10), (11, 1, 1, 0, 11), (11, 3, 1, 0, 9), (8, 6, 2, 0, 4)],
}


def _compare(census_cache, s, table):
    bad = []
    for N, want in table.items():
        rows, _ = census_cache(s, N)
        got = [r.tuple5() for r in rows]
        if got != want:
            bad.append(f"N={N}: got {got}")
    return bad


def _strange_roots(archives, N, M):
    out = []
    for rec in archives[(N, M)].records:
        if not rec.distinct and rec.oracle_verdict == "physical":
            out.append(rec.roots.canonical())
    return out


def test_criterion_1_table_s1(criterion, census_cache):
    bad = _compare(census_cache, 1, {N: TABLE_S1[N] for N in range(2, 6)})
    _, arch = census_cache(1, 4)
    strange = _strange_roots(arch, 4, 4)
    ok_strange = len(strange) == 1 and np.allclose(sorted(strange[0], key=lambda z: z.imag), [-1j, 0, 0, 1j], atol=1e-8)
    ok = not bad and ok_strange
    criterion(1, ok, "s=1, N<=5 exact" if ok else "; ".join(bad) + f" strange={strange}")
    assert ok


def test_criterion_2_table_s32(criterion, census_cache):
    bad = _compare(census_cache, "3/2", TABLE_S32)
    _, arch = census_cache("3/2", 3)
    strange = _strange_roots(arch, 3, 2)
    ok_strange = len(strange) == 1 and np.allclose(strange[0], [0, 0], atol=1e-8)
    ok = not bad and ok_strange
    criterion(2, ok, "s=3/2, N<=4 exact" if ok else "; ".join(bad) + f" strange={strange}")
    assert ok


@pytest.mark.extended
@pytest.mark.skipif(not extended_enabled(), reason="set SPINBETHE_EXTENDED=1 to run the s=1, N=6 row")
def test_criterion_3_extended(criterion, census_cache):
    bad = _compare(census_cache, 1, {6: TABLE_S1[6]})
    _, arch = census_cache(1, 6)
    pairs = []
    for roots in _strange_roots(arch, 6, 6):
        extra = [z for z in roots if min(abs(z - 1j), abs(z), abs(z + 1j)) > 1e-6]
        pairs.append(max(abs(z.imag) for z in extra))
    want = [0.474498, 2.10749]
    ok_roots = len(pairs) == 2 and all(
        abs(a - b) <= TOL_ROOT_SIG * b for a, b in zip(sorted(pairs), want)
    )
    ok = not bad and ok_roots
    criterion(3, ok, f"s=1, N=6 row; strange pairs {sorted(pairs)}")
    assert ok


def _reconstructed_levels(census_cache, s, N):
    """Energies of physical solutions, each repeated 2S+1 times."""
    s = HalfInt.from_value(s)
    rows, archives = census_cache(s, N)
    levels = [0.0] * (s.twice * N + 1)  # reference state, S = sN
    for row in rows:
        S2 = s.twice * N - 2 * row.M
        for rec in archives[(N, row.M)].records:
            if rec.distinct and not rec.singular:
                E = energy(s, rec.roots.as_array()).real
            elif rec.oracle_verdict == "physical" and (not rec.distinct or rec.singular_physical):
                E = rec.oracle_residuals["energy"]
            else:
                continue
            levels += [E] * (S2 + 1)
    return np.sort(levels)


def test_criterion_4_spectrum(criterion, census_cache):
    cells = [(1, 2), (1, 3), (1, 4), (1, 5), ("3/2", 2), ("3/2", 3)]
    worst = 0.0
    bad = []
    for s, N in cells:
        levels = _reconstructed_levels(census_cache, s, N)
        ed = Oracle(s, N).spectrum.eigenvalues
        if len(levels) != len(ed):
            bad.append(f"s={s} N={N}: {len(levels)}/{len(ed)} states")
            continue
        dev = float(np.max(np.abs(levels - ed)))
        worst = max(worst, dev)
        if dev >= TOL_SPECTRUM:
            bad.append(f"s={s} N={N}: deviation {dev:.1e}")
    ok = not bad
    criterion(4, ok, f"{len(cells)} (s, N) spectra, max level deviation {worst:.1e}" if ok else "; ".join(bad))
    assert ok


def test_criterion_5_m1_closed_form(criterion):
    worst = 0.0
    bad = []
    for s in ("1/2", "1", "3/2"):
        sv = float(HalfInt.from_value(s))
        for N in range(2, 11):
            recs = solve_all(BetheSystem(s, N, 1))
            got = np.sort([r.roots.as_array()[0].real for r in recs])
            imag = max((abs(r.roots.as_array()[0].imag) for r in recs), default=0.0)
            want = np.sort([sv / math.tan(math.pi * k / N) for k in range(1, N)])
            if len(got) != N - 1 or len(got) != expected_count(N, 1, s):
                bad.append(f"s={s} N={N}: {len(got)} roots")
                continue
            err = max(float(np.max(np.abs(got - want))), imag)
            worst = max(worst, err)
            if err > TOL_M1:
                bad.append(f"s={s} N={N}: error {err:.1e}")
    ok = not bad
    criterion(5, ok, f"max error {worst:.1e}" if ok else "; ".join(bad))
    assert ok


def test_criterion_6_singular_agreement(criterion, census_cache):
    cells = [(1, N) for N in range(2, 6)] + [("3/2", N) for N in range(2, 5)]
    if extended_enabled():
        cells.append((1, 6))
    checked = 0
    disagree = []
    for s, N in cells:
        _, archives = census_cache(s, N)
        for arch in archives.values():
            for rec in arch.records:
                if rec.distinct and rec.singular:
                    checked += 1
                    if (rec.oracle_verdict == "physical") != bool(rec.singular_physical):
                        disagree.append((s, N, rec.roots.canonical(), rec.oracle_verdict))
    ok = checked > 0 and not disagree
    criterion(6, ok, f"{checked} singular solutions, {len(disagree)} disagreements")
    assert ok


def _weight_multiplicities(N, s):
    """Brute force: count product states by total weight, then difference."""
    d = HalfInt.from_value(s).twice + 1
    counts = np.array([1], dtype=object)
    for _ in range(N):
        counts = np.convolve(counts, np.ones(d, dtype=object))
    # counts[j] = number of states with M = j lowered units (weight sN - j)
    top = (d - 1) * N
    out = {}
    for j in range(top // 2 + 1):
        out[j] = int(counts[j] - (counts[j - 1] if j else 0))
    return out


def test_criterion_7_representation(criterion):
    dims = all(dimension_check(N, s) for s in ("1/2", "1", "3/2", "2") for N in range(1, 13))
    mults = True
    for s in ("1/2", "1", "3/2"):
        tw = HalfInt.from_value(s).twice
        for N in range(1, 9):
            for M, n in _weight_multiplicities(N, s).items():
                S = HalfInt(tw * N - 2 * M)
                mults &= multiplicity(N, S, s) == n
                mults &= expected_count(N, M, s) == n
    value = expected_count(8, 12, "3/2")
    ok = dims and mults and value == 361
    criterion(
        7,
        ok,
        f"dimension_check {dims}, multiplicities {mults}, expected_count(3/2, 8, 12) = {value} (target 361)",
    )
    assert dims and mults
    assert value == 364


@pytest.mark.xfail(strict=True, reason="361 is the found total in the table; the multiplicity is 364")
def test_criterion_7_target_361():
    assert expected_count(8, 12, "3/2") == 361


def test_criterion_8_spin_half_pair(criterion):
    bad = []
    for N in (4, 5, 6):
        analytic, _ = singular_physical([0.5j, -0.5j], "1/2", N)
        v = verify_solution([0.5j, -0.5j], "1/2", N)
        want = N % 2 == 0
        if analytic != want or (v.verdict == "physical") != want:
            bad.append(f"N={N}: analytic {analytic}, oracle {v.verdict}")
    ok = not bad
    criterion(8, ok, "{+-i/2} physical iff N even, N=4,5,6" if ok else "; ".join(bad))
    assert ok


def test_criterion_9_inconclusive(criterion):
    # s = 3/2, N = 8 cells whose found totals fall short of the multiplicity
    shortfall = {6: (723, 28, 4, 0), 8: (1544, 203, 9, 0), 10: (2107, 728, 16, 0), 12: (1893, 1554, 22, 0)}
    rows = [CensusRow("3/2", 8, M, *t, expected_count(8, M, "3/2")) for M, t in shortfall.items()]
    rows.append(CensusRow("3/2", 8, 1, 7, 0, 0, 0, expected_count(8, 1, "3/2")))
    rep = ledger(rows)
    statuses = {r.M: r.status for r in rows}
    ok = (
        all(statuses[M] == "inconclusive" for M in shortfall)
        and statuses[1] == "match"
        and rep.verdict == "inconclusive"
        and not rep.violations
    )
    criterion(9, ok, f"statuses {statuses}, ledger {rep.verdict}")
    assert ok
