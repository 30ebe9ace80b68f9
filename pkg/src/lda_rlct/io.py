"""Plain-text serialization for datasets, truths, and draw dumps.

Formats are line-oriented ASCII.  Indices are 1-based on disk and
0-based in memory.  Floats are written with repr-level precision so a
write/read round trip is exact.

Dataset:
    M N n
    doc<TAB>word        (n lines, 1-based)

Truth:
    A0 M H0
    <M rows of H0 floats>
    B0 H0 N
    <H0 rows of N floats>
    doc_dist N
    <1 row of N floats>

Draw dump: for each retained draw,
    draw k
    A M H
    <rows>
    B H N
    <rows>
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .gibbs import PosteriorDraws
from .model import Dataset, TrueModel

__all__ = [
    "write_dataset",
    "read_dataset",
    "write_true_model",
    "read_true_model",
    "write_draws",
    "read_draws",
]


class ParseError(ValueError):
    """A serialized file violates its documented format."""

    def __init__(self, path: Path | str, line_num: int, message: str) -> None:
        super().__init__(f"{path}:{line_num}: {message}")
        self.line_num = line_num


def write_dataset(dataset: Dataset, path: Path | str) -> None:
    M, N = dataset.counts.shape
    lines = [f"{M} {N} {dataset.n}"]
    lines.extend(
        f"{j + 1}\t{i + 1}" for j, i in zip(dataset.docs, dataset.words)
    )
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_dataset(path: Path | str) -> Dataset:
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines:
        raise ParseError(path, 1, "empty file, expected header 'M N n'")
    header = lines[0].split()
    if len(header) != 3:
        raise ParseError(path, 1, f"expected header 'M N n', got {lines[0]!r}")
    try:
        M, N, n = (int(x) for x in header)
    except ValueError:
        raise ParseError(path, 1, f"non-integer header {lines[0]!r}") from None
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != n:
        raise ParseError(path, len(lines), f"header promises {n} tokens, found {len(body)}")
    docs = np.empty(n, dtype=np.int64)
    words = np.empty(n, dtype=np.int64)
    for t, line in enumerate(body):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(path, t + 2, f"expected 'doc<TAB>word', got {line!r}")
        try:
            j, i = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(path, t + 2, f"non-integer token {line!r}") from None
        if not (1 <= j <= N and 1 <= i <= M):
            raise ParseError(
                path, t + 2, f"token ({j}, {i}) outside 1..{N} x 1..{M}"
            )
        docs[t] = j - 1
        words[t] = i - 1
    return Dataset.from_tokens(docs=docs, words=words, M=M, N=N)


def _format_matrix(name: str, matrix: np.ndarray) -> list[str]:
    rows, cols = matrix.shape
    lines = [f"{name} {rows} {cols}"]
    lines.extend(" ".join(repr(float(v)) for v in row) for row in matrix)
    return lines


class _BlockReader:
    def __init__(self, path: Path | str):
        self.path = path
        self.lines = Path(path).read_text(encoding="ascii").splitlines()
        self.pos = 0

    def next_line(self) -> str:
        while self.pos < len(self.lines) and not self.lines[self.pos].strip():
            self.pos += 1
        if self.pos >= len(self.lines):
            raise ParseError(self.path, len(self.lines) + 1, "unexpected end of file")
        self.pos += 1
        return self.lines[self.pos - 1]

    @property
    def exhausted(self) -> bool:
        return all(not ln.strip() for ln in self.lines[self.pos:])

    def matrix(self, expect_name: str) -> np.ndarray:
        header_at = self.pos + 1
        parts = self.next_line().split()
        if len(parts) != 3 or parts[0] != expect_name:
            raise ParseError(
                self.path, header_at,
                f"expected block header '{expect_name} rows cols', got {parts!r}",
            )
        try:
            rows, cols = int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError(self.path, header_at, f"non-integer dimensions {parts!r}") from None
        out = np.empty((rows, cols))
        for rr in range(rows):
            row_at = self.pos + 1
            values = self.next_line().split()
            if len(values) != cols:
                raise ParseError(
                    self.path, row_at,
                    f"row {rr + 1} of {expect_name} has {len(values)} values, expected {cols}",
                )
            try:
                out[rr] = [float(v) for v in values]
            except ValueError:
                raise ParseError(self.path, row_at, "non-numeric matrix entry") from None
        return out


def write_true_model(model: TrueModel, path: Path | str) -> None:
    lines = _format_matrix("A0", model.A0)
    lines += _format_matrix("B0", model.B0)
    lines += _format_matrix("doc_dist", model.doc_dist.reshape(1, -1))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_true_model(path: Path | str) -> TrueModel:
    reader = _BlockReader(path)
    A0 = reader.matrix("A0")
    B0 = reader.matrix("B0")
    doc_dist = reader.matrix("doc_dist")
    if doc_dist.shape[0] != 1:
        raise ParseError(path, reader.pos, "doc_dist must be a single row")
    return TrueModel(A0=A0, B0=B0, doc_dist=doc_dist[0])


def write_draws(draws: PosteriorDraws, path: Path | str) -> None:
    """Audit dump of every retained (A, B) pair, tagged by draw index."""
    lines: list[str] = []
    for k in range(draws.num_draws):
        lines.append(f"draw {k}")
        lines += _format_matrix("A", draws.A[k])
        lines += _format_matrix("B", draws.B[k])
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_draws(path: Path | str) -> PosteriorDraws:
    reader = _BlockReader(path)
    A_list, B_list = [], []
    while not reader.exhausted:
        tag_at = reader.pos + 1
        tag = reader.next_line().split()
        if len(tag) != 2 or tag[0] != "draw" or tag[1] != str(len(A_list)):
            raise ParseError(path, tag_at, f"expected 'draw {len(A_list)}', got {tag!r}")
        A_list.append(reader.matrix("A"))
        B_list.append(reader.matrix("B"))
    if not A_list:
        raise ParseError(path, 1, "no draws in file")
    return PosteriorDraws(A=np.stack(A_list), B=np.stack(B_list))
