import logging
from pathlib import Path

import pandas as pd

logger = logging.getLogger(__name__)


def ensure_dir(path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_frame(frame: pd.DataFrame, path, header=True) -> Path:
    """Write a frame as UTF-8 CSV with LF endings and no index column.

    Cells are written as-is; callers pre-format anything that needs a fixed
    textual form so repeated runs produce identical bytes.
    """
    path = Path(path)
    ensure_dir(path.parent)
    frame.to_csv(path, header=header, index=False, lineterminator="\n", encoding="utf-8")
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path
