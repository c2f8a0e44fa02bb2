"""Quote series and stock metadata ingestion.

Quote files are headerless CSV, one ``<ISO-8601 timestamp>,<price>`` record per
line. Metadata files are CSV with header ``ticker,sector,market_cap_kusd,percentile``.
Both loaders validate and never reorder or round what they read.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from intrasign.errors import (
    OrderingError,
    ParseError,
    SchemaError,
    StructureError,
    ValidationError,
)
from intrasign.utils.io import write_frame

logger = logging.getLogger(__name__)

PERCENTILE_GROUPS = ("0-25", "25-50", "50-75", "75-100")
METADATA_COLUMNS = ("ticker", "sector", "market_cap_kusd", "percentile")


@dataclass(frozen=True, eq=False)
class QuoteSeries:
    """Ordered intraday prices of one stock.

    ``timestamps`` is a UTC ``DatetimeIndex`` and ``prices`` a float64 array of
    the same length. Spacing between quotes may be irregular.
    """

    ticker: str
    timestamps: pd.DatetimeIndex
    prices: np.ndarray

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=np.float64)
        timestamps = pd.DatetimeIndex(self.timestamps)
        if timestamps.tz is None:
            timestamps = timestamps.tz_localize("UTC")
        if len(prices) != len(timestamps):
            raise StructureError(
                f"{self.ticker}: {len(timestamps)} timestamps but {len(prices)} prices"
            )
        if len(prices) == 0:
            raise ValidationError(f"{self.ticker}: empty quote series")
        bad = np.flatnonzero(~(np.isfinite(prices) & (prices > 0)))
        if bad.size:
            raise ValidationError(
                f"{self.ticker}: price #{bad[0] + 1} is not a positive number: {prices[bad[0]]}"
            )
        steps = np.diff(timestamps.asi8)
        bad = np.flatnonzero(steps <= 0)
        if bad.size:
            raise OrderingError(
                f"{self.ticker}: timestamp #{bad[0] + 2} ({timestamps[bad[0] + 1]}) "
                f"does not follow {timestamps[bad[0]]}"
            )
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "timestamps", timestamps)

    def __len__(self):
        return len(self.prices)


@dataclass(frozen=True)
class StockMeta:
    ticker: str
    sector: str
    market_cap: float  # thousand USD
    percentile_group: str

    def __post_init__(self):
        if self.percentile_group not in PERCENTILE_GROUPS:
            raise ValidationError(
                f"{self.ticker}: unknown percentile group {self.percentile_group!r}"
            )
        if not (math.isfinite(self.market_cap) and self.market_cap > 0):
            raise ValidationError(f"{self.ticker}: market cap must be positive")

    @property
    def log_market_cap(self) -> float:
        return math.log(self.market_cap)

    @property
    def group_index(self) -> int:
        """1-based position of the group, lowest capitalization first."""
        return PERCENTILE_GROUPS.index(self.percentile_group) + 1


def normalize_percentile(label: str) -> str:
    """Canonical group label; also accepts spellings like "75th – 100th"."""
    text = label.strip().replace("–", "-").replace("—", "-")
    text = text.replace("th", "").replace(" ", "")
    return text


def _read_csv(path, **kwargs) -> pd.DataFrame:
    try:
        return pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
            encoding="utf-8",
            **kwargs,
        )
    except pd.errors.EmptyDataError:
        return pd.DataFrame()
    except pd.errors.ParserError as e:
        # pandas reports "Expected 2 fields in line 7, saw 3"
        raise ParseError(str(e).strip(), path=path) from e


def _parse_float(raw: str, line: int, path, what: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ParseError(f"malformed {what} {raw!r}", line=line, path=path) from None


def load_quotes(path, ticker: Optional[str] = None) -> QuoteSeries:
    """Load and validate one quote file.

    Args:
        path: headerless CSV of ``timestamp,price`` records.
        ticker: defaults to the file stem.

    Raises:
        ParseError: a record is malformed (message carries the line number).
        ValidationError: a price is not positive.
        OrderingError: timestamps are not strictly increasing.
    """
    path = Path(path)
    ticker = ticker or path.stem
    # blank lines are skipped, so recover physical line numbers from the file
    lines = _record_line_numbers(path, fields=2)
    frame = _read_csv(path, header=None)
    if frame.empty:
        raise ValidationError(f"{path}: no quotes")
    frame.columns = ["timestamp", "price"]

    prices = np.array(
        [
            _parse_float(raw, lines[i], path, "price")
            for i, raw in enumerate(frame["price"])
        ],
        dtype=np.float64,
    )
    timestamps = pd.to_datetime(
        frame["timestamp"].str.strip(), format="ISO8601", utc=True, errors="coerce"
    )
    missing = np.flatnonzero(timestamps.isna().to_numpy())
    if missing.size:
        i = missing[0]
        raise ParseError(
            f"malformed timestamp {frame['timestamp'].iloc[i]!r}", line=lines[i], path=path
        )
    for i, price in enumerate(prices):
        if not (math.isfinite(price) and price > 0):
            raise ValidationError(f"{path}:{lines[i]}: price must be positive, got {price}")
    steps = np.diff(pd.DatetimeIndex(timestamps).asi8)
    bad = np.flatnonzero(steps <= 0)
    if bad.size:
        raise OrderingError(f"{path}:{lines[bad[0] + 1]}: timestamp does not increase")

    series = QuoteSeries(ticker, pd.DatetimeIndex(timestamps), prices)
    logger.debug(f"Loaded {len(series)} quotes for {ticker} from {path}")
    return series


def _record_line_numbers(path: Path, fields: int) -> list[int]:
    """Line numbers of the non-blank records, each of which must have ``fields`` fields."""
    numbers = []
    with open(path, "r", encoding="utf-8") as f:
        for n, line in enumerate(f, start=1):
            if not line.strip():
                continue
            found = line.count(",") + 1
            if found != fields:
                raise ParseError(f"expected {fields} fields, found {found}", line=n, path=path)
            numbers.append(n)
    return numbers


def write_quotes(series: QuoteSeries, path) -> Path:
    """Write a series in the format ``load_quotes`` reads back unchanged."""
    frame = pd.DataFrame(
        {
            "timestamp": [ts.isoformat() for ts in series.timestamps],
            "price": [repr(float(p)) for p in series.prices],
        }
    )
    return write_frame(frame, path, header=False)


def load_metadata(path) -> list[StockMeta]:
    """Load the stock universe description.

    Raises:
        SchemaError: a required column is missing.
        ValidationError: bad market cap, unknown percentile label or a
            duplicate ticker.
    """
    path = Path(path)
    frame = _read_csv(path, header=0)
    if frame.empty and not len(frame.columns):
        raise SchemaError(f"{path}: missing header row")
    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in METADATA_COLUMNS if c not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")

    stocks = []
    seen = set()
    for i, row in enumerate(frame.itertuples(index=False), start=2):
        ticker = row.ticker.strip()
        if not ticker:
            raise ValidationError(f"{path}:{i}: empty ticker")
        if ticker in seen:
            raise ValidationError(f"{path}:{i}: duplicate ticker {ticker}")
        seen.add(ticker)
        cap = _parse_float(row.market_cap_kusd.replace("_", ""), i, path, "market cap")
        try:
            stock = StockMeta(
                ticker=ticker,
                sector=row.sector.strip(),
                market_cap=cap,
                percentile_group=normalize_percentile(row.percentile),
            )
        except ValidationError as e:
            raise ValidationError(f"{path}:{i}: {e}") from e
        stocks.append(stock)
    logger.info(f"Loaded metadata for {len(stocks)} stocks from {path}")
    return stocks


def sample_metadata_path() -> Path:
    """The packaged 20-stock Bovespa universe description."""
    return Path(__file__).parent / "bovespa_sample.csv"
