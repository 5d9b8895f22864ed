"""
ALIST Parity-Check Matrix Format
Parser and canonical serializer for sparse parity-check matrices
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Tuple, Union

from .matrix import ParityCheckMatrix

logger = logging.getLogger('wbpdecode')


class AlistFormatError(ValueError):
    """
    Malformed ALIST input.

    ``kind`` is one of ``header``, ``syntax``, ``index``, ``degree`` or
    ``truncated``; ``line`` is the 1-based line number in the source text.
    """

    def __init__(self, kind: str, line: int, message: str, source: str = '<string>'):
        self.kind = kind
        self.line = line
        self.source = source
        super().__init__(f"{source}: line {line}: {message}")


def _tokenize(text: str, source: str) -> List[Tuple[int, List[int]]]:
    """Non-blank lines as (line_number, integers)."""
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens:
            continue
        try:
            values = [int(tok) for tok in tokens]
        except ValueError:
            kind = 'header' if len(lines) < 4 else 'syntax'
            raise AlistFormatError(kind, number, f"non-integer token in {raw.strip()!r}", source)
        lines.append((number, values))
    return lines


def _adjacency(values: List[int], degree: int, bound: int, number: int,
               label: str, source: str) -> List[int]:
    """First ``degree`` entries are 1-based indices; anything after them must be zero padding."""
    if len(values) < degree:
        raise AlistFormatError('degree', number, f"{label} lists {len(values)} entries, declared {degree}", source)
    head, padding = values[:degree], values[degree:]
    for x in head:
        if x < 1 or x > bound:
            raise AlistFormatError('index', number, f"index out of range [1, {bound}]: {x}", source)
    if any(padding):
        raise AlistFormatError('degree', number, f"{label} lists more than the declared {degree} entries", source)
    if len(set(head)) != len(head):
        raise AlistFormatError('degree', number, f"{label} repeats an index", source)
    return head


def parse_alist(text: str, source: str = '<string>') -> ParityCheckMatrix:
    """
    Parse ALIST text into a ParityCheckMatrix.

    Layout: ``n m``; ``max_col_deg max_row_deg``; n column degrees;
    m row degrees; n lines of 1-based check indices per column; m lines of
    1-based variable indices per row. Trailing zeros after the declared
    degree are padding.

    Args:
        text: ALIST document
        source: Name used in diagnostics (usually the file path)

    Returns:
        ParityCheckMatrix
    """
    lines = _tokenize(text, source)
    if len(lines) < 4:
        last = lines[-1][0] if lines else 0
        raise AlistFormatError('truncated', last + 1, "header needs 4 lines", source)

    (ln, dims), (ln_max, maxdeg), (ln_cdeg, col_deg), (ln_rdeg, row_deg) = lines[:4]
    if len(dims) != 2 or dims[0] <= 0 or dims[1] <= 0:
        raise AlistFormatError('header', ln, f"expected 'n m' with positive values, got {dims}", source)
    n, m = dims
    if n <= m:
        raise AlistFormatError('header', ln, f"need n > m for a code of positive rate, got n={n}, m={m}", source)
    if len(maxdeg) != 2:
        raise AlistFormatError('header', ln_max, "expected 'max_col_deg max_row_deg'", source)
    if len(col_deg) != n:
        raise AlistFormatError('header', ln_cdeg, f"expected {n} column degrees, got {len(col_deg)}", source)
    if len(row_deg) != m:
        raise AlistFormatError('header', ln_rdeg, f"expected {m} row degrees, got {len(row_deg)}", source)
    if max(col_deg) > maxdeg[0]:
        raise AlistFormatError('degree', ln_cdeg, f"column degree exceeds declared maximum {maxdeg[0]}", source)
    if max(row_deg) > maxdeg[1]:
        raise AlistFormatError('degree', ln_rdeg, f"row degree exceeds declared maximum {maxdeg[1]}", source)

    body = lines[4:]
    if len(body) < n + m:
        last = body[-1][0] if body else ln_rdeg
        raise AlistFormatError('truncated', last + 1, f"expected {n + m} adjacency lines, got {len(body)}", source)

    col_entries = set()
    for v in range(n):
        number, values = body[v]
        checks = _adjacency(values, col_deg[v], m, number, f"column {v + 1}", source)
        col_entries.update((x - 1, v) for x in checks)

    rows = []
    row_entries = set()
    for c in range(m):
        number, values = body[n + c]
        variables = _adjacency(values, row_deg[c], n, number, f"row {c + 1}", source)
        row_entries.update((c, x - 1) for x in variables)
        rows.append(tuple(sorted(x - 1 for x in variables)))

    if row_entries != col_entries:
        number = body[n][0]
        raise AlistFormatError('degree', number, "row lists disagree with column lists", source)

    try:
        return ParityCheckMatrix(n=n, m=m, rows=tuple(rows))
    except ValueError as e:
        raise AlistFormatError('degree', ln_rdeg, str(e), source) from e


def serialize_alist(pcm: ParityCheckMatrix) -> str:
    """Canonical ALIST text: no zero padding, sorted indices, single spaces."""
    col_deg = pcm.column_degrees
    row_deg = pcm.row_degrees
    out = [
        f"{pcm.n} {pcm.m}",
        f"{max(col_deg)} {max(row_deg)}",
        ' '.join(str(d) for d in col_deg),
        ' '.join(str(d) for d in row_deg),
    ]
    out.extend(' '.join(str(c + 1) for c in col) for col in pcm.columns)
    out.extend(' '.join(str(v + 1) for v in row) for row in pcm.rows)
    return '\n'.join(out) + '\n'


def read_alist(path: Union[str, Path]) -> ParityCheckMatrix:
    """Read and parse an ALIST file; diagnostics carry the file path."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        logger.error(f"Cannot read ALIST file {path}: {e}")
        raise
    pcm = parse_alist(text, source=str(path))
    logger.info(f"Parsed {path.name}: n={pcm.n} m={pcm.m} edges={pcm.num_edges}")
    return pcm
