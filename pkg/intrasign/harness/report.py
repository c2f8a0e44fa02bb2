"""Report files.

``group_<k>.csv``: one table per capitalization group (k = 1 is the lowest
group), one column per stock, rows in the order of the published tables.
``runs.csv``: every run of every stock at full precision.
``scatter.csv``: log market cap against mean sign prediction, per stock and
per group.
"""

import logging
import math
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import pandas as pd

from intrasign.errors import ParseError, SchemaError, SizeError, ValidationError
from intrasign.harness import StockReport
from intrasign.market_data import PERCENTILE_GROUPS, StockMeta
from intrasign.metrics import METRIC_NAMES, RunMetrics, aggregate
from intrasign.utils import format_fixed, format_percent
from intrasign.utils.io import ensure_dir, write_frame

logger = logging.getLogger(__name__)

RUN_COLUMNS = ("ticker", "sector", "market_cap_kusd", "group", "run", "seed", *METRIC_NAMES)
SCATTER_COLUMNS = ("kind", "ticker", "group", "log_market_cap", "mean_sign_prediction")


def _checked(value):
    if value is not None and not math.isfinite(value):
        raise ValidationError(f"non-finite value {value} in report")
    return value


def _mean(name) -> Callable[[StockReport], str]:
    return lambda r: format_fixed(_checked(r.summary.mean[name]))


def _std(name) -> Callable[[StockReport], str]:
    return lambda r: format_fixed(_checked(r.summary.std[name]))


def _runs_cell(report: StockReport) -> str:
    if report.summary.single_run:
        return "1 (single run)"
    return str(report.summary.runs)


TABLE_ROWS: list[tuple[str, Callable[[StockReport], str]]] = [
    ("Buy & Hold (train)", _mean("bh_train")),
    ("Return rule (train)", _mean("return_rule_train")),
    ("Std. Dev", _std("return_rule_train")),
    ("Buy & Hold (test)", _mean("bh_test")),
    ("Sign Prediction", lambda r: format_percent(_checked(r.summary.mean["sign_prediction"]))),
    ("Std. Dev", _std("sign_prediction")),
    ("Total Return", _mean("total_return_rule")),
    ("Std. Dev", _std("total_return_rule")),
    ("Ideal Profit Ratio", _mean("ideal_profit_ratio")),
    ("Std. Dev", _std("ideal_profit_ratio")),
    ("Sharpe Ratio", lambda r: format_fixed(_checked(r.summary.sharpe_ratio))),
    ("Range", lambda r: "+/-" + format_fixed(_checked(r.summary.mean["threshold"]))),
    ("Std. Dev", _std("threshold")),
    # diagnostic: positions straight from the prediction sign, no band
    ("Total Return (raw sign)", _mean("total_return_rawsign")),
    ("Std. Dev", _std("total_return_rawsign")),
    ("Runs", _runs_cell),
]


def group_key(report: StockReport) -> int:
    """1..4 for the capitalization groups, 0 for stocks without metadata."""
    return report.meta.group_index if report.meta else 0


def group_table(reports: Sequence[StockReport]) -> pd.DataFrame:
    columns = {"Ticker": [label for label, _ in TABLE_ROWS]}
    for report in reports:
        columns[report.ticker] = [cell(report) for _, cell in TABLE_ROWS]
    return pd.DataFrame(columns)


def run_table(reports: Sequence[StockReport]) -> pd.DataFrame:
    rows = []
    for report in reports:
        meta = report.meta
        for run, (seed, metrics) in enumerate(zip(report.seeds, report.runs)):
            row = {
                "ticker": report.ticker,
                "sector": meta.sector if meta else "",
                "market_cap_kusd": repr(meta.market_cap) if meta else "",
                "group": report.group,
                "run": str(run),
                "seed": str(seed),
            }
            row.update({name: repr(float(_checked(v))) for name, v in metrics.as_dict().items()})
            rows.append(row)
    return pd.DataFrame(rows, columns=list(RUN_COLUMNS))


def scatter_table(reports: Sequence[StockReport]) -> pd.DataFrame:
    """Stock points, then one mean point per capitalization group."""
    placed = [r for r in reports if r.meta is not None]
    rows = [
        {
            "kind": "stock",
            "ticker": r.ticker,
            "group": r.group,
            "log_market_cap": repr(r.meta.log_market_cap),
            "mean_sign_prediction": repr(r.summary.mean["sign_prediction"]),
        }
        for r in placed
    ]
    for label in PERCENTILE_GROUPS:
        members = [r for r in placed if r.group == label]
        if not members:
            continue
        rows.append(
            {
                "kind": "group",
                "ticker": "",
                "group": label,
                "log_market_cap": repr(float(np.mean([r.meta.log_market_cap for r in members]))),
                "mean_sign_prediction": repr(
                    float(np.mean([r.summary.mean["sign_prediction"] for r in members]))
                ),
            }
        )
    return pd.DataFrame(rows, columns=list(SCATTER_COLUMNS))


def emit_report(reports: Sequence[StockReport], out_dir) -> list[Path]:
    """Write group tables, ``runs.csv`` and ``scatter.csv`` into ``out_dir``.

    Returns:
        list[Path]: written files, group tables first.

    Raises:
        SizeError: no reports.
        OSError: the directory cannot be written.
    """
    if not reports:
        raise SizeError("no reports to emit")
    out_dir = ensure_dir(out_dir)

    groups: dict[int, list[StockReport]] = {}
    for report in reports:
        groups.setdefault(group_key(report), []).append(report)

    written = []
    for key in sorted(groups):
        written.append(write_frame(group_table(groups[key]), out_dir / f"group_{key}.csv"))
    written.append(write_frame(run_table(reports), out_dir / "runs.csv"))
    written.append(write_frame(scatter_table(reports), out_dir / "scatter.csv"))
    logger.info(f"Wrote {len(written)} report files to {out_dir}")
    return written


def read_run_file(path) -> list[StockReport]:
    """Rebuild stock reports from a ``runs.csv`` written by ``emit_report``."""
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise SizeError(f"{path}: empty run file") from None
    except pd.errors.ParserError as e:
        raise ParseError(str(e).strip(), path=path) from e
    missing = [c for c in RUN_COLUMNS if c not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    if frame.empty:
        raise SizeError(f"{path}: no runs")

    def number(raw, line, conv=float):
        try:
            return conv(raw)
        except ValueError:
            raise ParseError(f"malformed value {raw!r}", line=line, path=path) from None

    rows: dict[str, list] = {}
    for line, row in enumerate(frame.to_dict("records"), start=2):
        rows.setdefault(row["ticker"], []).append((line, row))

    reports = []
    for ticker, entries in rows.items():
        entries.sort(key=lambda e: number(e[1]["run"], e[0], int))
        first = entries[0][1]
        meta = None
        if first["market_cap_kusd"]:
            meta = StockMeta(
                ticker=ticker,
                sector=first["sector"],
                market_cap=number(first["market_cap_kusd"], entries[0][0]),
                percentile_group=first["group"],
            )
        runs = [
            RunMetrics(**{name: number(row[name], line) for name in METRIC_NAMES})
            for line, row in entries
        ]
        reports.append(
            StockReport(
                ticker=ticker,
                runs=tuple(runs),
                seeds=tuple(number(row["seed"], line, int) for line, row in entries),
                summary=aggregate(runs),
                meta=meta,
            )
        )
    logger.info(f"Read {sum(len(r.runs) for r in reports)} runs of {len(reports)} stocks from {path}")
    return reports
