# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

"""Reading series from CSV files and writing plot data."""

from dataclasses import dataclass

from colcon_core.logging import colcon_logger
from lbd_changepoint.exceptions import InvalidArgumentError
from lbd_changepoint.exceptions import InvalidDataError
import numpy as np
import pandas as pd

logger = colcon_logger.getChild(__name__)


@dataclass(frozen=True)
class SeriesData:
    """
    A series read from a file.

    :param values: float64 array
    :param first_row: 1-based file row holding ``values[0]``
    :param column: name or position of the column read
    """

    values: np.ndarray
    first_row: int
    column: object

    def row_of(self, index):
        """File row of ``values[index]``."""
        return self.first_row + index


def _is_number(text):
    try:
        float(text)
    except (TypeError, ValueError):
        return False
    return True


def _select(frame, column, has_header):
    if column is None:
        if frame.shape[1] > 1:
            logger.info("input has %d columns, reading the first", frame.shape[1])
        return 0
    if isinstance(column, str) and not column.lstrip("-").isdigit():
        if not has_header:
            raise InvalidArgumentError(
                f"column '{column}' selected by name but the input has no header"
            )
        names = [str(name).strip() for name in frame.iloc[0]]
        if column not in names:
            raise InvalidArgumentError(
                f"column '{column}' not found, available: {', '.join(names)}"
            )
        return names.index(column)
    position = int(column)
    if not 0 <= position < frame.shape[1]:
        raise InvalidArgumentError(
            f"column {position} out of range for {frame.shape[1]} columns"
        )
    return position


def load_series(path, column=None):
    """
    Read one numeric column of a CSV file.

    A first row whose selected cell is not a number is taken as a header.

    :param column: 0-based position, or a header name
    :raises InvalidDataError: for an empty file or a cell that is not a
      number; the message names the file row
    :raises OSError: if the file cannot be read
    :rtype: :class:`SeriesData`
    """
    try:
        frame = pd.read_csv(
            path, header=None, dtype=str, skip_blank_lines=True,
            keep_default_na=False,
        )
    except pd.errors.EmptyDataError:
        raise InvalidDataError(f"'{path}' contains no data") from None
    except pd.errors.ParserError as e:
        raise InvalidDataError(f"'{path}' is not valid CSV: {e}") from None

    first = frame.iloc[0] if len(frame) else None
    has_header = first is not None and not all(
        _is_number(cell) for cell in first if str(cell).strip()
    )
    position = _select(frame, column, has_header)
    cells = frame.iloc[1 if has_header else 0:, position]
    first_row = 2 if has_header else 1
    if not len(cells):
        raise InvalidDataError(f"'{path}' contains no data rows")

    values = pd.to_numeric(cells.str.strip(), errors="coerce").to_numpy(dtype=np.float64)
    missing = np.isnan(values) & ~cells.str.strip().str.lower().isin(["nan"]).to_numpy()
    if missing.any():
        index = int(np.flatnonzero(missing)[0])
        raise InvalidDataError(
            f"row {first_row + index}: '{cells.iloc[index]}' is not a number",
            index=index,
        )
    logger.debug(
        "read %d values from '%s' (column %s, header %s)",
        len(values), path, position, has_header,
    )
    name = str(frame.iloc[0, position]).strip() if has_header else position
    return SeriesData(values, first_row, name)


def write_plot_data(path, y, minimal):
    """
    Write ``(index, value)`` rows, a blank line, then ``(lo, hi)`` rows.

    Indices are 1-based like the interval endpoints.
    """
    y = np.asarray(y, dtype=np.float64)
    points = pd.DataFrame({"index": np.arange(1, len(y) + 1), "value": y})
    intervals = pd.DataFrame(
        [interval.as_list() for interval in minimal], columns=["lo", "hi"],
        dtype=np.int64,
    )
    with open(path, "w", encoding="utf-8", newline="") as handle:
        points.to_csv(handle, sep="\t", index=False, lineterminator="\n")
        handle.write("\n")
        intervals.to_csv(handle, sep="\t", index=False, lineterminator="\n")
    logger.debug("wrote plot data for %d minimal intervals to '%s'", len(intervals), path)
