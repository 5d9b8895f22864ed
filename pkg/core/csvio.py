"""
CSV Utilities
Byte-stable CSV emission shared by every command
"""
import csv
import io
import logging
import numbers
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, TextIO, Union

import numpy as np

logger = logging.getLogger('wbpdecode')


def format_real(value: float) -> str:
    """Shortest round-trip decimal (repr of a Python float)."""
    return repr(float(value))


def format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return '1' if value else '0'
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        return format_real(value)
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV text with '\\n' line endings and no quoting of numeric cells."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def write_csv(destination: Union[str, Path, TextIO], header: Sequence[str], rows: Iterable[Sequence]):
    text = render_csv(header, rows)
    if hasattr(destination, 'write'):
        destination.write(text)
        return
    path = Path(destination)
    try:
        path.write_text(text, newline='')
    except OSError as e:
        logger.error(f"Cannot write CSV {path}: {e}")
        raise


def read_csv(path: Union[str, Path], expected_header: Optional[Sequence[str]] = None) -> List[dict]:
    """Rows as dicts; the header must match ``expected_header`` when given."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        logger.error(f"Cannot read CSV {path}: {e}")
        raise
    reader = csv.DictReader(io.StringIO(text))
    if expected_header is not None and list(reader.fieldnames or []) != list(expected_header):
        raise ValueError(f"{path}: expected columns {','.join(expected_header)}, "
                         f"got {','.join(reader.fieldnames or [])}")
    return list(reader)
