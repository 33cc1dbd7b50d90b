"""Census driver: solve, classify, verify and count over (N, M) grids.

Archives keep every root as a pair of hex floats so a reload is bit-exact
and re-classification never needs the solver.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from . import __version__
from .bethe import TAU_EQ, BetheSystem, RootSet
from .classify import TAU_PHYS, classify
from .errors import DimensionCap, PathCountOverflow, VersionMismatch
from .homotopy import HomotopyConfig, SolutionRecord, SolveReport, solve_all
from .oracle import DIM_CAP, TAU_ORACLE, Oracle
from .reptheory import CensusRow, expected_count, ledger
from .spin import HalfInt

__all__ = [
    "ARCHIVE_SCHEMA",
    "CSV_COLUMNS",
    "RunConfig",
    "SolutionArchive",
    "run_cell",
    "run_census",
    "tally",
    "emit_report",
    "format_table",
    "rows_from_json",
    "write_archive",
    "read_archive",
]

log = logging.getLogger(__name__)

ARCHIVE_SCHEMA = "spinbethe-archive/1"
CSV_COLUMNS = ("s", "N", "M", "n_distinct", "n_singular", "n_singular_physical", "n_strange", "expected", "status")


@dataclass
class RunConfig:
    s: HalfInt
    N_range: tuple[int, int]
    M_range: Optional[tuple[int, int]] = None  # default 1..floor(sN)
    path_budget: int = 2_000_000
    tau_eq: float = TAU_EQ
    tau_phys: float = TAU_PHYS
    tau_oracle: float = TAU_ORACLE
    refine_tol: float = 1e-11
    seed: int = 0
    oracle_enabled: bool = True
    dim_cap: int = DIM_CAP
    out_dir: Optional[str] = None
    timestamps: bool = False

    def __post_init__(self):
        self.s = HalfInt.from_value(self.s)
        if self.path_budget <= 0:
            raise ValueError("path budget must be positive")
        if not self.refine_tol < self.tau_phys:
            raise ValueError("need refine_tol < tau_phys")
        if not self.refine_tol < self.tau_oracle:
            raise ValueError("need refine_tol < tau_oracle")
        if self.N_range[0] < 1 or self.N_range[1] < self.N_range[0]:
            raise ValueError(f"bad site range {self.N_range}")

    def magnons(self, N: int) -> range:
        top = (self.s.twice * N) // 2
        if self.M_range is None:
            return range(1, top + 1)
        return range(max(self.M_range[0], 0), min(self.M_range[1], top) + 1)

    def homotopy(self) -> HomotopyConfig:
        return HomotopyConfig(seed=self.seed, path_budget=self.path_budget, refine_tol=self.refine_tol)

    def snapshot(self) -> dict:
        d = asdict(self)
        d["s"] = str(self.s)
        d.pop("out_dir")
        d.pop("timestamps")
        return d


@dataclass
class SolutionArchive:
    header: dict
    records: list[SolutionRecord] = field(default_factory=list)


# ---------------------------------------------------------------------------


def _annotate(rec: SolutionRecord, s: HalfInt, N: int, oracle: Optional[Oracle]):
    cls = classify(rec.roots, s, N)
    rec.distinct = cls.distinct
    rec.singular = cls.singular
    rec.singular_physical = cls.singular_physical
    rec.strange_candidate = cls.strange_candidate
    rec.needs_oracle = cls.needs_oracle
    rec.condition_residuals = {k: _as_real(v) for k, v in cls.condition_residuals.items()}
    rec.condition_residuals["pattern"] = cls.pattern
    want_oracle = oracle is not None and (rec.singular or not rec.distinct)
    if want_oracle:
        v = oracle.verify(rec.roots)
        rec.oracle_verdict = v.verdict
        rec.oracle_residuals = {
            "eigen": v.eigen_residual,
            "highest_weight": v.hw_residual,
            "energy": v.energy if v.energy is not None else math.nan,
        }
        if v.note:
            rec.oracle_residuals["note"] = v.note


def _as_real(v):
    if isinstance(v, complex):
        return abs(v)
    if isinstance(v, (bool, int, float, str)):
        return v
    try:
        return float(v)
    except (TypeError, ValueError):
        return str(v)


def tally(records: Iterable[SolutionRecord], s, N: int, M: int, oracle_used: bool) -> CensusRow:
    """Counts for one cell from annotated records.

    Singular physicality comes from the analytic condition (the oracle is
    recorded alongside and disagreements are noted).  A repeated-root
    solution counts as strange only if the oracle says physical, or, without
    the oracle, if the analytic candidate condition certifies it.
    """
    s = HalfInt.from_value(s)
    nd = ns = nsp = nst = nun = 0
    notes = []
    for rec in records:
        if rec.distinct:
            nd += 1
            if rec.singular:
                ns += 1
                nsp += bool(rec.singular_physical)
                if rec.oracle_verdict in ("physical", "unphysical"):
                    if (rec.oracle_verdict == "physical") != bool(rec.singular_physical):
                        notes.append(f"oracle disagrees on singular {rec.roots.canonical()}")
            continue
        if oracle_used and rec.oracle_verdict is not None:
            if rec.oracle_verdict == "physical":
                nst += 1
            elif rec.oracle_verdict == "undetermined":
                nun += 1
        elif rec.strange_candidate and not rec.needs_oracle:
            nst += 1
        elif rec.needs_oracle:
            nun += 1
    return CensusRow(s, N, M, nd, ns, nsp, nst, expected_count(N, M, s), n_unresolved=nun, note="; ".join(notes))


def run_cell(s, N: int, M: int, cfg: RunConfig, oracle: Optional[Oracle] = None):
    """One (N, M) cell: returns (CensusRow, SolutionArchive, SolveReport)."""
    s = HalfInt.from_value(s)
    sysm = BetheSystem(s, N, M)
    header = {"schema": ARCHIVE_SCHEMA, "version": __version__, "s": str(s), "N": N, "M": M, "config": cfg.snapshot()}
    if cfg.timestamps:
        from datetime import datetime, timezone

        header["created"] = datetime.now(timezone.utc).isoformat()
    report = SolveReport()
    expected = expected_count(N, M, s)
    try:
        records = solve_all(sysm, cfg.homotopy(), report)
    except PathCountOverflow as exc:
        row = CensusRow(s, N, M, 0, 0, 0, 0, expected, status="skipped", note=str(exc))
        return row, SolutionArchive(header, []), report
    for rec in records:
        _annotate(rec, s, N, oracle)
    row = tally(records, s, N, M, oracle is not None)
    extra = []
    if report.n_failed:
        extra.append(f"{report.n_failed} paths failed")
    if row.n_unresolved:
        extra.append(f"{row.n_unresolved} repeated-root solutions undetermined")
    row.note = "; ".join([row.note] * bool(row.note) + extra)
    header["solve"] = asdict(report)
    return row, SolutionArchive(header, records), report


def run_census(cfg: RunConfig):
    """All cells of the configured grid.  Returns (rows, {(N, M): archive})."""
    rows: list[CensusRow] = []
    archives: dict[tuple[int, int], SolutionArchive] = {}
    for N in range(cfg.N_range[0], cfg.N_range[1] + 1):
        oracle = None
        if cfg.oracle_enabled:
            try:
                oracle = Oracle(cfg.s, N, cap=cfg.dim_cap)
            except DimensionCap as exc:
                log.info("oracle off for N=%d: %s", N, exc)
        for M in cfg.magnons(N):
            log.info("cell s=%s N=%d M=%d", cfg.s, N, M)
            row, arch, _ = run_cell(cfg.s, N, M, cfg, oracle)
            if oracle is None and cfg.oracle_enabled:
                row.note = "; ".join(filter(None, [row.note, "oracle beyond dimension cap"]))
            rows.append(row)
            archives[(N, M)] = arch
            if cfg.out_dir:
                out = Path(cfg.out_dir)
                out.mkdir(parents=True, exist_ok=True)
                write_archive(arch, out / f"archive_s{cfg.s.twice}_N{N}_M{M}.json")
    ledger(rows)
    return rows, archives


# ---------------------------------------------------------------------------
# reports


def _row_dict(row: CensusRow) -> dict:
    return {
        "s": str(row.s),
        "N": row.N,
        "M": row.M,
        "n_distinct": row.n_distinct,
        "n_singular": row.n_singular,
        "n_singular_physical": row.n_singular_physical,
        "n_strange": row.n_strange,
        "expected": row.expected,
        "status": row.status,
        "n_unresolved": row.n_unresolved,
        "note": row.note,
    }


def rows_from_json(text: str) -> list[CensusRow]:
    out = []
    for d in json.loads(text)["rows"]:
        out.append(
            CensusRow(
                HalfInt.from_str(d["s"]), d["N"], d["M"], d["n_distinct"], d["n_singular"],
                d["n_singular_physical"], d["n_strange"], d["expected"], d["status"],
                d.get("n_unresolved", 0), d.get("note", ""),
            )
        )
    return out


def format_table(rows: list[CensusRow]) -> str:
    """Grid with N down and M across, entries (N, N_s, N_sp, N_strange; sum)."""
    Ms = sorted({r.M for r in rows})
    Ns = sorted({r.N for r in rows})
    cell = {(r.N, r.M): r for r in rows}

    def entry(r: Optional[CensusRow]) -> str:
        if r is None:
            return ""
        if r.status == "skipped":
            return "skipped"
        a, b, c, d, e = r.tuple5()
        mark = "" if r.status == "match" else " ?"
        return f"({a},{b},{c},{d}; {e}){mark}"

    table = [["N\\M"] + [str(m) for m in Ms]]
    for n in Ns:
        table.append([str(n)] + [entry(cell.get((n, m))) for m in Ms])
    widths = [max(len(row[k]) for row in table) for k in range(len(table[0]))]
    lines = [" | ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in table]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def emit_report(rows: list[CensusRow], fmt: str, path=None) -> str:
    """Serialize rows as json, csv or text-table; write to ``path`` if given."""
    if not rows:
        raise ValueError("no rows to report")
    rows = sorted(rows, key=lambda r: (r.s.twice, r.N, r.M))
    if fmt == "json":
        rep = ledger(list(rows))
        text = json.dumps({"rows": [_row_dict(r) for r in rows], "verdict": rep.verdict}, indent=1, sort_keys=True) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            d = _row_dict(r)
            w.writerow([d[c] for c in CSV_COLUMNS])
        text = buf.getvalue()
    elif fmt in ("text", "text-table"):
        blocks = []
        for tw in sorted({r.s.twice for r in rows}):
            sub = [r for r in rows if r.s.twice == tw]
            blocks.append(f"s = {sub[0].s}\n" + format_table(sub))
        text = "\n".join(blocks)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


# ---------------------------------------------------------------------------
# archives


def _hex(z: complex) -> list[str]:
    return [float(z.real).hex(), float(z.imag).hex()]


def _unhex(p) -> complex:
    return complex(float.fromhex(p[0]), float.fromhex(p[1]))


def _jsonable(v):
    if isinstance(v, float):
        return {"hex": v.hex()}
    if isinstance(v, complex):
        return {"chex": _hex(v)}
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _unjson(v):
    if isinstance(v, dict):
        if set(v) == {"hex"}:
            return float.fromhex(v["hex"])
        if set(v) == {"chex"}:
            return _unhex(v["chex"])
        return {k: _unjson(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_unjson(x) for x in v]
    return v


_REC_FIELDS = (
    "residual", "path_index", "n_paths", "history", "distinct", "singular", "singular_physical",
    "strange_candidate", "needs_oracle", "oracle_verdict", "energy", "condition_residuals", "oracle_residuals",
)


def archive_to_text(arch: SolutionArchive) -> str:
    recs = []
    for r in arch.records:
        d = {"roots": [_hex(z) for z in r.roots.as_array()]}
        for f in _REC_FIELDS:
            d[f] = _jsonable(getattr(r, f))
        recs.append(d)
    return json.dumps({"header": arch.header, "records": recs}, indent=1, sort_keys=True) + "\n"


def archive_from_text(text: str) -> SolutionArchive:
    try:
        data = json.loads(text)
        header = data["header"]
        raw = data["records"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise VersionMismatch(f"corrupt archive: {exc}") from exc
    if header.get("schema") != ARCHIVE_SCHEMA:
        raise VersionMismatch(f"archive schema {header.get('schema')!r}, expected {ARCHIVE_SCHEMA!r}")
    records = []
    for d in raw:
        roots = RootSet(np.array([_unhex(p) for p in d["roots"]], dtype=complex))
        kw = {f: _unjson(d[f]) for f in _REC_FIELDS if f in d}
        records.append(SolutionRecord(roots=roots, **kw))
    return SolutionArchive(header, records)


def write_archive(arch: SolutionArchive, path) -> None:
    tmp = Path(str(path) + ".tmp")
    tmp.write_text(archive_to_text(arch))
    os.replace(tmp, path)


def read_archive(path) -> SolutionArchive:
    return archive_from_text(Path(path).read_text())


def reclassify(arch: SolutionArchive, oracle: Optional[Oracle] = None) -> CensusRow:
    """Recount a cell from its archive without re-solving."""
    s = HalfInt.from_str(arch.header["s"])
    N, M = arch.header["N"], arch.header["M"]
    for rec in arch.records:
        _annotate(rec, s, N, oracle)
    return tally(arch.records, s, N, M, oracle is not None)
