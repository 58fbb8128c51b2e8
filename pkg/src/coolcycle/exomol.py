"""Readers for ExoMol-style ``.states`` and ``.trans`` flat files.

Both file kinds are plain text (optionally bz2-compressed), delimited by
runs of spaces or by single commas. ``.states`` layouts vary per molecule,
so the column schema is user-supplied; only the ``id`` and ``energy``
columns carry meaning for the search, everything else is kept as opaque
string attributes. ``.trans`` rows are always ``upper lower A [wavenumber]``.

Transition files can be far larger than memory, so they are consumed either
record-by-record (:func:`parse_trans`) or in columnar chunks
(:func:`iter_transition_chunks`), and a :class:`LevelDataset` keeps only the
file handles needed to re-stream them.
"""

from __future__ import annotations

import bz2
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
import pandas as pd

from .errors import DataError, DuplicateIdError, IntegrityError, ParseError, SchemaError

_BZ2_MAGIC = b"BZh"
_CHUNK_ROWS = 1_000_000


@dataclass(frozen=True)
class StatesSchema:
    """Ordered column layout of a ``.states`` file.

    ``column_names`` maps position to attribute name; ``id_column`` and
    ``energy_column`` select which of those are the integer key and the
    level energy (cm^-1).
    """

    column_names: tuple[str, ...]
    id_column: str = "id"
    energy_column: str = "energy"

    def __post_init__(self):
        names = self.column_names
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate column names in schema: {names}")
        if self.id_column not in names:
            raise SchemaError(f"schema has no {self.id_column!r} column")
        if self.energy_column not in names:
            raise SchemaError(f"schema has no {self.energy_column!r} column")
        if self.id_column == self.energy_column:
            raise SchemaError("id and energy must be distinct columns")

    @property
    def id_pos(self) -> int:
        return self.column_names.index(self.id_column)

    @property
    def energy_pos(self) -> int:
        return self.column_names.index(self.energy_column)

    @property
    def attr_names(self) -> tuple[str, ...]:
        return tuple(
            n for n in self.column_names if n not in (self.id_column, self.energy_column)
        )

    @classmethod
    def from_header(cls, header: str) -> "StatesSchema":
        """Build a schema from a single header line like ``id,energy,gtot,J``."""
        names = tuple(_split_row(header.strip()))
        if not names:
            raise SchemaError("empty schema header")
        return cls(column_names=names)

    @classmethod
    def from_file(cls, path: str | Path) -> "StatesSchema":
        """Read a schema config: either one header line or ``key=value`` lines.

        Recognized keys: ``columns`` (required in key=value form), ``id``,
        ``energy`` (names of the key/energy columns, default ``id``/``energy``).
        """
        lines = [
            ln.strip()
            for ln in Path(path).read_text().splitlines()
            if ln.strip() and not ln.lstrip().startswith("#")
        ]
        if not lines:
            raise SchemaError(f"{path}: empty schema file")
        if any("=" in ln for ln in lines):
            kv = {}
            for ln in lines:
                if "=" not in ln:
                    raise SchemaError(f"{path}: mixed key=value and bare lines")
                key, _, value = ln.partition("=")
                kv[key.strip()] = value.strip()
            if "columns" not in kv:
                raise SchemaError(f"{path}: key=value schema needs a 'columns' entry")
            return cls(
                column_names=tuple(_split_row(kv["columns"])),
                id_column=kv.get("id", "id"),
                energy_column=kv.get("energy", "energy"),
            )
        if len(lines) > 1:
            raise SchemaError(f"{path}: expected a single header line, got {len(lines)}")
        return cls.from_header(lines[0])

    @classmethod
    def positional(cls, n_columns: int) -> "StatesSchema":
        """Fallback schema: first two columns are id and energy."""
        if n_columns < 2:
            raise SchemaError("a states file needs at least id and energy columns")
        extra = tuple(f"col{i}" for i in range(3, n_columns + 1))
        return cls(column_names=("id", "energy") + extra)


@dataclass
class RawState:
    id: int
    energy: float
    attrs: dict[str, str] = field(default_factory=dict)


@dataclass
class RawTransition:
    upper_id: int
    lower_id: int
    einstein_a: float
    wavenumber: float | None = None


def _split_row(line: str) -> list[str]:
    # Comma-delimited if any comma is present, else whitespace runs.
    if "," in line:
        return [tok.strip() for tok in line.split(",")]
    return line.split()


def _open_text(source, path_hint=None):
    """Open a path or stream as text, transparently decoding bz2.

    Returns ``(text_stream, should_close)``.
    """
    if isinstance(source, (str, Path)):
        raw = open(source, "rb")
        if raw.peek(3)[:3] == _BZ2_MAGIC:
            return io.TextIOWrapper(bz2.BZ2File(raw)), True
        return io.TextIOWrapper(raw), True
    if hasattr(source, "read"):
        probe = source.read(0)
        if isinstance(probe, bytes):
            head = source.peek(3)[:3] if hasattr(source, "peek") else None
            if head is None and source.seekable():
                pos = source.tell()
                head = source.read(3)
                source.seek(pos)
            if head == _BZ2_MAGIC:
                return io.TextIOWrapper(bz2.BZ2File(source)), False
            return io.TextIOWrapper(source), False
        return source, False
    raise TypeError(f"cannot read from {type(source).__name__}")


def _data_rows(stream) -> Iterator[tuple[int, list[str]]]:
    """Yield (1-based line number, tokens), skipping blanks and # comments."""
    for lineno, line in enumerate(stream, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, _split_row(stripped)


def parse_states(source, schema: StatesSchema | None = None) -> list[RawState]:
    """Parse a ``.states`` stream into :class:`RawState` records, in file order.

    With ``schema=None`` the first two columns are taken as id and energy.
    A leading header row that matches the schema's column names is skipped.
    """
    stream, should_close = _open_text(source)
    path_hint = source if isinstance(source, (str, Path)) else None
    states: list[RawState] = []
    seen: set[int] = set()
    try:
        rows = _data_rows(stream)
        for lineno, tokens in rows:
            if schema is None:
                schema = StatesSchema.positional(len(tokens))
            if tuple(tokens) == schema.column_names:
                continue  # header row
            if len(tokens) != len(schema.column_names):
                raise SchemaError(
                    f"{_where(path_hint, lineno)}expected {len(schema.column_names)} "
                    f"columns, got {len(tokens)}"
                )
            id_tok = tokens[schema.id_pos]
            energy_tok = tokens[schema.energy_pos]
            try:
                state_id = int(id_tok)
            except ValueError:
                raise ParseError(f"non-integer id {id_tok!r}", row=lineno, path=path_hint)
            try:
                energy = float(energy_tok)
            except ValueError:
                raise ParseError(
                    f"non-numeric energy {energy_tok!r}", row=lineno, path=path_hint
                )
            if state_id <= 0:
                raise ParseError(f"id must be positive, got {state_id}", lineno, path_hint)
            if energy < 0:
                raise DataError(
                    f"{_where(path_hint, lineno)}negative energy {energy} for state {state_id}"
                )
            if state_id in seen:
                raise DuplicateIdError(f"duplicate state id {state_id}", lineno, path_hint)
            seen.add(state_id)
            attrs = {
                name: tok
                for name, tok in zip(schema.column_names, tokens)
                if name not in (schema.id_column, schema.energy_column)
            }
            states.append(RawState(id=state_id, energy=energy, attrs=attrs))
    finally:
        if should_close:
            stream.close()
    return states


def parse_trans(source) -> Iterator[RawTransition]:
    """Lazily parse a ``.trans`` stream (``upper lower A [wavenumber]`` rows)."""
    stream, should_close = _open_text(source)
    path_hint = source if isinstance(source, (str, Path)) else None
    try:
        for lineno, tokens in _data_rows(stream):
            if len(tokens) < 3:
                raise ParseError(
                    f"expected at least 3 columns (upper lower A), got {len(tokens)}",
                    row=lineno,
                    path=path_hint,
                )
            try:
                upper = int(tokens[0])
                lower = int(tokens[1])
                a_val = float(tokens[2])
                nu = float(tokens[3]) if len(tokens) > 3 else None
            except ValueError as exc:
                raise ParseError(f"bad numeric field ({exc})", row=lineno, path=path_hint)
            if a_val <= 0:
                raise DataError(
                    f"{_where(path_hint, lineno)}Einstein A must be > 0, "
                    f"got {a_val} on edge {upper}->{lower}"
                )
            if upper == lower:
                raise DataError(
                    f"{_where(path_hint, lineno)}self-transition on state {upper}"
                )
            yield RawTransition(upper, lower, a_val, nu)
    finally:
        if should_close:
            stream.close()


def _where(path_hint, lineno) -> str:
    prefix = f"{path_hint}: " if path_hint is not None else ""
    return f"{prefix}row {lineno}: "


@dataclass
class TransitionChunk:
    upper: np.ndarray  # int64
    lower: np.ndarray  # int64
    einstein_a: np.ndarray  # float64
    wavenumber: np.ndarray  # float64, NaN where the column is absent
    start_row: int  # 1-based data-row offset of the chunk within its file


def _sniff_delimiter(path: Path) -> str | None:
    """Return the pandas ``sep`` for the file, or None if it has no data rows."""
    stream, should_close = _open_text(path)
    try:
        for line in stream:
            stripped = line.strip()
            if stripped and not stripped.startswith("#"):
                return "," if "," in stripped else r"\s+"
    finally:
        if should_close:
            stream.close()
    return None


def _read_chunks_pandas(path: Path, chunk_rows: int) -> Iterator[TransitionChunk]:
    sep = _sniff_delimiter(path)
    if sep is None:
        return
    reader = pd.read_csv(
        path,
        sep=sep,
        header=None,
        names=["upper", "lower", "einstein_a", "wavenumber"],
        comment="#",
        chunksize=chunk_rows,
        dtype={"upper": np.int64, "lower": np.int64,
               "einstein_a": np.float64, "wavenumber": np.float64},
        skip_blank_lines=True,
    )
    row = 1
    for frame in reader:
        if frame.empty:
            continue
        yield TransitionChunk(
            upper=frame["upper"].to_numpy(),
            lower=frame["lower"].to_numpy(),
            einstein_a=frame["einstein_a"].to_numpy(),
            wavenumber=frame["wavenumber"].to_numpy(),
            start_row=row,
        )
        row += len(frame)


def _records_to_chunk(records: Sequence[RawTransition]) -> Iterator[TransitionChunk]:
    if not records:
        return
    nu = np.array(
        [np.nan if t.wavenumber is None else t.wavenumber for t in records], dtype=np.float64
    )
    yield TransitionChunk(
        upper=np.array([t.upper_id for t in records], dtype=np.int64),
        lower=np.array([t.lower_id for t in records], dtype=np.int64),
        einstein_a=np.array([t.einstein_a for t in records], dtype=np.float64),
        wavenumber=nu,
        start_row=1,
    )


def _validate_chunk(chunk: TransitionChunk, path_hint) -> None:
    prefix = f"{path_hint}: " if path_hint is not None else ""
    bad = np.flatnonzero(chunk.einstein_a <= 0)
    if bad.size:
        i = int(bad[0])
        raise DataError(
            f"{prefix}data row {chunk.start_row + i}: Einstein A must be > 0, "
            f"got {chunk.einstein_a[i]} on edge {chunk.upper[i]}->{chunk.lower[i]}"
        )
    loops = np.flatnonzero(chunk.upper == chunk.lower)
    if loops.size:
        i = int(loops[0])
        raise DataError(
            f"{prefix}data row {chunk.start_row + i}: "
            f"self-transition on state {chunk.upper[i]}"
        )


def iter_transition_chunks(
    source, chunk_rows: int = _CHUNK_ROWS
) -> Iterator[TransitionChunk]:
    """Stream a trans source as validated columnar chunks.

    ``source`` may be one path, a sequence of paths (concatenated in order),
    or a sequence of :class:`RawTransition` records.
    """
    if isinstance(source, (str, Path)):
        source = [source]
    source = list(source)
    if source and isinstance(source[0], RawTransition):
        for chunk in _records_to_chunk(source):
            _validate_chunk(chunk, None)
            yield chunk
        return
    for path in source:
        try:
            for chunk in _read_chunks_pandas(Path(path), chunk_rows):
                _validate_chunk(chunk, path)
                yield chunk
        except (ValueError, pd.errors.ParserError) as exc:
            raise ParseError(str(exc), path=path)


@dataclass
class LevelDataset:
    """States plus a re-streamable transition source, referentially checked."""

    states: list[RawState]
    trans_paths: tuple[Path, ...] | None = None
    trans_records: list[RawTransition] | None = None
    n_transitions: int = 0
    provenance: dict = field(default_factory=dict)

    def iter_chunks(self, chunk_rows: int = _CHUNK_ROWS) -> Iterator[TransitionChunk]:
        if self.trans_records is not None:
            yield from iter_transition_chunks(self.trans_records, chunk_rows)
        elif self.trans_paths:
            yield from iter_transition_chunks(self.trans_paths, chunk_rows)

    @classmethod
    def from_records(
        cls, states: Iterable[RawState], transitions: Iterable[RawTransition]
    ) -> "LevelDataset":
        ds = cls(states=list(states), trans_records=list(transitions))
        ds.n_transitions = len(ds.trans_records)
        _check_integrity(ds)
        ds.provenance = {
            "states": "<memory>",
            "trans": "<memory>",
            "n_states": len(ds.states),
            "n_transitions": ds.n_transitions,
        }
        return ds


def _check_integrity(dataset: LevelDataset) -> None:
    ids = np.fromiter((s.id for s in dataset.states), dtype=np.int64, count=len(dataset.states))
    known = np.sort(ids)
    count = 0
    for chunk in dataset.iter_chunks():
        for name, col in (("upper", chunk.upper), ("lower", chunk.lower)):
            pos = np.searchsorted(known, col)
            ok = (pos < known.size) & (known[np.minimum(pos, known.size - 1)] == col)
            if not ok.all():
                missing = int(col[~ok][0])
                raise IntegrityError(
                    f"transition {name} id {missing} not present in the states file"
                )
        count += chunk.upper.size
    dataset.n_transitions = count


def load_dataset(
    states_path: str | Path,
    trans_paths: Sequence[str | Path],
    schema: StatesSchema | None = None,
) -> LevelDataset:
    """Materialize states, validate transition ids in one streaming pass."""
    states = parse_states(states_path, schema)
    ds = LevelDataset(states=states, trans_paths=tuple(Path(p) for p in trans_paths))
    _check_integrity(ds)
    ds.provenance = {
        "states": str(states_path),
        "trans": [str(p) for p in trans_paths],
        "n_states": len(states),
        "n_transitions": ds.n_transitions,
    }
    return ds


def format_states(
    states: Iterable[RawState], schema: StatesSchema, delimiter: str = ","
) -> str:
    """Render states back to delimited text (inverse of :func:`parse_states`)."""
    lines = []
    for s in states:
        row = []
        for name in schema.column_names:
            if name == schema.id_column:
                row.append(str(s.id))
            elif name == schema.energy_column:
                row.append(repr(s.energy))
            else:
                row.append(s.attrs.get(name, ""))
        lines.append(delimiter.join(row))
    return "\n".join(lines) + ("\n" if lines else "")


def format_trans(transitions: Iterable[RawTransition], delimiter: str = " ") -> str:
    """Render transitions back to delimited text (inverse of :func:`parse_trans`)."""
    lines = []
    for t in transitions:
        row = [str(t.upper_id), str(t.lower_id), repr(t.einstein_a)]
        if t.wavenumber is not None:
            row.append(repr(t.wavenumber))
        lines.append(delimiter.join(row))
    return "\n".join(lines) + ("\n" if lines else "")
