"""Holdings ingestion: file parsing, cleaning rules, and synthetic data.

Sources are either a delimited edge file (``fund_id,asset_isin,weight_pct``)
or the holdings subset of a regulatory portfolio XML filing. Cleaning drops
non-positive weights and invalid ISINs, merges duplicate edges, and removes
funds whose surviving weights cover less than a threshold percentage of the
portfolio. Weights are never renormalized.
"""

from __future__ import annotations

import csv
import io
import math
import os
import string
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGraphError, EmptyInputError, ParameterError

EDGE_CSV_HEADER = ("fund_id", "asset_isin", "weight_pct")

_UPPER = set(string.ascii_uppercase)
_ALNUM = set(string.ascii_uppercase + string.digits)


@dataclass(frozen=True)
class RawHolding:
    """One parsed holding row, prior to any cleaning."""

    fund_id: str
    asset_isin: str
    weight_pct: float
    line: int = 0


@dataclass(frozen=True)
class Diagnostic:
    """A dropped or rejected row together with the reason."""

    line: int
    reason: str
    raw: str


@dataclass
class ParseResult:
    holdings: list[RawHolding]
    diagnostics: list[Diagnostic]


@dataclass
class CleanEdgeList:
    """Edges surviving the cleaning rules.

    edges are (fund_id, asset_isin, weight_pct) tuples sorted by
    (fund_id, asset_isin); weights are strictly positive and pairs unique.
    """

    edges: list[tuple[str, str, float]]
    fund_count: int
    asset_count: int
    coverage_per_fund: dict[str, float] = field(default_factory=dict)


def isin_structure_ok(isin: str) -> bool:
    """Two uppercase letters, nine alphanumerics, one decimal check digit."""
    if len(isin) != 12:
        return False
    if isin[0] not in _UPPER or isin[1] not in _UPPER:
        return False
    if any(ch not in _ALNUM for ch in isin[2:11]):
        return False
    return isin[11].isdigit()


def _luhn_ok(digits: str) -> bool:
    total = 0
    double = False
    for ch in reversed(digits):
        d = ord(ch) - 48
        if double:
            d *= 2
            if d > 9:
                d -= 9
        total += d
        double = not double
    return total % 10 == 0


def isin_checksum_ok(isin: str) -> bool:
    """Validate the ISO 6166 check digit (letters expand to 10..35)."""
    if not isin_structure_ok(isin):
        return False
    expanded = "".join(str(ord(c) - 55) if c.isalpha() else c for c in isin)
    return _luhn_ok(expanded)


def isin_check_digit(body: str) -> str:
    """Compute the check digit for an 11-character ISIN body."""
    for cand in "0123456789":
        if isin_checksum_ok(body + cand):
            return cand
    raise ParameterError(f"no valid check digit for ISIN body {body!r}")


def _open_text(source):
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            return io.StringIO(data.decode("utf-8"))
        return io.StringIO(data)
    return open(os.fspath(source), "r", encoding="utf-8", newline="")


def parse_holdings(source, fmt: str = "edge-csv") -> ParseResult:
    """Parse a holdings source into raw rows plus per-row diagnostics.

    Args:
        source: path or file-like object.
        fmt: "edge-csv" or "nport-xml-subset".

    Raises:
        ParameterError: unsupported format tag.
        EmptyInputError: no parsable records at all.
    """
    if fmt == "edge-csv":
        result = _parse_edge_csv(source)
    elif fmt == "nport-xml-subset":
        result = _parse_nport_xml(source)
    else:
        raise ParameterError(f"unsupported holdings format: {fmt!r}")
    if not result.holdings:
        raise EmptyInputError(f"no parsable holdings in source ({fmt})")
    return result


def _parse_edge_csv(source) -> ParseResult:
    holdings: list[RawHolding] = []
    diags: list[Diagnostic] = []
    with _open_text(source) as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            raw = ",".join(row)
            if not row or all(not f.strip() for f in row):
                continue
            if line_no == 1 and tuple(f.strip() for f in row) == EDGE_CSV_HEADER:
                continue
            if len(row) != 3:
                diags.append(Diagnostic(line_no, "expected 3 fields", raw))
                continue
            fund_id, isin, weight_s = (f.strip() for f in row)
            if not fund_id:
                diags.append(Diagnostic(line_no, "empty fund_id", raw))
                continue
            if any(ch.isspace() for ch in fund_id):
                diags.append(Diagnostic(line_no, "fund_id contains whitespace", raw))
                continue
            if len(isin) != 12:
                diags.append(Diagnostic(line_no, f"isin length {len(isin)} != 12", raw))
                continue
            try:
                weight = float(weight_s)
            except ValueError:
                diags.append(Diagnostic(line_no, "weight_pct not a number", raw))
                continue
            if math.isnan(weight) or math.isinf(weight):
                diags.append(Diagnostic(line_no, "weight_pct not finite", raw))
                continue
            holdings.append(RawHolding(fund_id, isin, weight, line_no))
    return ParseResult(holdings, diags)


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _parse_nport_xml(source) -> ParseResult:
    """Extract (series id, ISIN, pct of net assets) triples from a filing."""
    holdings: list[RawHolding] = []
    diags: list[Diagnostic] = []
    with _open_text(source) as fh:
        text = fh.read()
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise EmptyInputError(f"XML parse failure: {exc}") from None

    series_id = None
    for el in root.iter():
        if _local(el.tag) == "seriesId" and el.text and el.text.strip():
            series_id = el.text.strip()
            break
    if series_id is None or any(ch.isspace() for ch in series_id):
        diags.append(Diagnostic(0, "missing or malformed seriesId", "<filing>"))
        return ParseResult(holdings, diags)

    idx = 0
    for sec in root.iter():
        if _local(sec.tag) != "invstOrSec":
            continue
        idx += 1
        raw = f"invstOrSec[{idx}]"
        isin = None
        for el in sec.iter():
            if _local(el.tag) == "isin":
                isin = (el.get("value") or (el.text or "")).strip()
                break
        if not isin:
            diags.append(Diagnostic(idx, "missing isin", raw))
            continue
        if len(isin) != 12:
            diags.append(Diagnostic(idx, f"isin length {len(isin)} != 12", raw))
            continue
        pct_text = None
        for el in sec.iter():
            if _local(el.tag) == "pctVal":
                pct_text = (el.text or "").strip()
                break
        if pct_text is None:
            diags.append(Diagnostic(idx, "missing pctVal", raw))
            continue
        try:
            weight = float(pct_text)
        except ValueError:
            diags.append(Diagnostic(idx, "pctVal not a number", raw))
            continue
        if math.isnan(weight) or math.isinf(weight):
            diags.append(Diagnostic(idx, "pctVal not finite", raw))
            continue
        holdings.append(RawHolding(series_id, isin, weight, idx))
    return ParseResult(holdings, diags)


def clean(
    raw: list[RawHolding],
    coverage_threshold: float = 95.0,
    *,
    validate_checksum: bool = False,
    diagnostics: list[Diagnostic] | None = None,
) -> CleanEdgeList:
    """Apply the cleaning rules and return the surviving edge list.

    Rules, in order: drop weight <= 0, drop invalid ISINs (structure always,
    ISO 6166 checksum when validate_checksum), merge duplicate (fund, asset)
    pairs by summing, then drop funds whose total surviving weight is below
    coverage_threshold. Surviving weights are kept as-is.

    Raises EmptyGraphError when the filters eliminate every fund.
    """
    if not 0.0 <= coverage_threshold <= 100.0:
        raise ParameterError(f"coverage_threshold must be in [0, 100], got {coverage_threshold}")
    diags = diagnostics if diagnostics is not None else []

    merged: dict[tuple[str, str], float] = {}
    for h in raw:
        raw_row = f"{h.fund_id},{h.asset_isin},{h.weight_pct!r}"
        if h.weight_pct <= 0:
            diags.append(Diagnostic(h.line, "non-positive weight", raw_row))
            continue
        if not isin_structure_ok(h.asset_isin):
            diags.append(Diagnostic(h.line, "invalid ISIN structure", raw_row))
            continue
        if validate_checksum and not isin_checksum_ok(h.asset_isin):
            diags.append(Diagnostic(h.line, "ISIN checksum failure", raw_row))
            continue
        merged[(h.fund_id, h.asset_isin)] = merged.get((h.fund_id, h.asset_isin), 0.0) + h.weight_pct

    coverage: dict[str, float] = {}
    for (fund, _asset), w in merged.items():
        coverage[fund] = coverage.get(fund, 0.0) + w

    kept_funds = {f for f, cov in coverage.items() if cov >= coverage_threshold}
    for (fund, asset), w in sorted(merged.items()):
        if fund not in kept_funds:
            diags.append(
                Diagnostic(0, f"fund coverage {coverage[fund]:.4f} below threshold", f"{fund},{asset},{w!r}")
            )

    edges = [(f, a, w) for (f, a), w in sorted(merged.items()) if f in kept_funds]
    if not edges:
        raise EmptyGraphError("cleaning removed every fund; nothing survives to build a graph")
    assets = {a for _f, a, _w in edges}
    return CleanEdgeList(
        edges=edges,
        fund_count=len(kept_funds),
        asset_count=len(assets),
        coverage_per_fund={f: coverage[f] for f in sorted(kept_funds)},
    )


def generate_synthetic(
    n_funds: int,
    n_assets: int,
    n_communities: int,
    overlap: float,
    seed: int,
    holdings_per_fund: int | None = None,
) -> CleanEdgeList:
    """Generate a community-structured holdings dataset.

    Funds and assets are split into n_communities contiguous blocks. Each
    fund draws a fraction (1 - overlap) of its holdings from its own
    community's asset pool and the rest uniformly from the full asset
    universe, so overlap=0 gives disjoint blocks and overlap=1 removes any
    dependence on the community label. Per-fund weights sum to 100.
    """
    if n_funds < 1 or n_assets < 1:
        raise ParameterError("n_funds and n_assets must be positive")
    if not 1 <= n_communities <= min(n_funds, n_assets):
        raise ParameterError("n_communities must be in [1, min(n_funds, n_assets)]")
    if not 0.0 <= overlap <= 1.0:
        raise ParameterError(f"overlap must be in [0, 1], got {overlap}")
    if seed < 0:
        raise ParameterError("seed must be non-negative")

    rng = np.random.default_rng(np.random.SeedSequence((seed, n_funds, n_assets, n_communities)))
    fund_comm = np.array([i * n_communities // n_funds for i in range(n_funds)])
    asset_comm = np.array([j * n_communities // n_assets for j in range(n_assets)])
    pools = [np.flatnonzero(asset_comm == c) for c in range(n_communities)]
    if any(p.size == 0 for p in pools):
        raise ParameterError("every community needs a non-empty asset pool")

    isins = [
        "XS" + (body := f"{j:09d}") + isin_check_digit("XS" + body) for j in range(n_assets)
    ]
    fund_width = max(4, len(str(n_funds - 1)))
    edges: list[tuple[str, str, float]] = []
    coverage: dict[str, float] = {}
    for i in range(n_funds):
        pool = pools[fund_comm[i]]
        # default density mirrors benchmark trackers: community members hold
        # overlapping slices of a shared pool, so pairs share many assets
        h = holdings_per_fund if holdings_per_fund is not None else min(pool.size, max(3, (3 * pool.size) // 10))
        if h < 1 or h > n_assets:
            raise ParameterError(f"holdings_per_fund {h} infeasible for {n_assets} assets")
        own_n = round((1.0 - overlap) * h)
        if own_n > pool.size:
            raise ParameterError("own-community pool smaller than requested own holdings")
        own = rng.choice(pool, size=own_n, replace=False)
        rest = np.setdiff1d(np.arange(n_assets), own, assume_unique=False)
        cross = rng.choice(rest, size=h - own_n, replace=False)
        chosen = np.sort(np.concatenate([own, cross]))
        w = rng.uniform(1.0, 10.0, size=h)
        w = 100.0 * w / w.sum()
        fund = f"F{i:0{fund_width}d}"
        for a_idx, weight in zip(chosen, w):
            edges.append((fund, isins[a_idx], float(weight)))
        coverage[fund] = float(w.sum())

    edges.sort()
    assets = {a for _f, a, _w in edges}
    return CleanEdgeList(
        edges=edges,
        fund_count=n_funds,
        asset_count=len(assets),
        coverage_per_fund=coverage,
    )


def write_edge_csv(clean_edges: CleanEdgeList, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EDGE_CSV_HEADER)
        for fund, asset, w in clean_edges.edges:
            writer.writerow([fund, asset, repr(w)])


def write_diagnostics(diags: list[Diagnostic], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in diags:
            fh.write(f"{d.line}\t{d.reason}\t{d.raw}\n")
