"""Parsing layer: schemas, states, transitions, streaming equivalence."""

import bz2
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coolcycle.errors import (
    DataError,
    DuplicateIdError,
    IntegrityError,
    ParseError,
    SchemaError,
)
from coolcycle.exomol import (
    LevelDataset,
    RawState,
    RawTransition,
    StatesSchema,
    format_states,
    format_trans,
    iter_transition_chunks,
    load_dataset,
    parse_states,
    parse_trans,
)

HEADER = "id,energy,gtot,J,N,F,parity,v,state"
SCHEMA = StatesSchema.from_header(HEADER)


class TestSchema:
    def test_header_roundtrip(self):
        assert SCHEMA.column_names == tuple(HEADER.split(","))
        assert SCHEMA.id_pos == 0 and SCHEMA.energy_pos == 1

    def test_duplicate_names_rejected(self):
        with pytest.raises(SchemaError):
            StatesSchema.from_header("id,energy,x,x")

    def test_missing_required_column(self):
        with pytest.raises(SchemaError):
            StatesSchema.from_header("id,eNeRgY")

    def test_id_energy_must_differ(self):
        with pytest.raises(SchemaError):
            StatesSchema(("id", "energy"), id_column="id", energy_column="id")

    def test_from_file_header_form(self, tmp_path):
        p = tmp_path / "schema.txt"
        p.write_text(f"# NH layout\n{HEADER}\n")
        assert StatesSchema.from_file(p) == SCHEMA

    def test_from_file_key_value_form(self, tmp_path):
        p = tmp_path / "schema.cfg"
        p.write_text("columns = n E g\nid = n\nenergy = E\n")
        schema = StatesSchema.from_file(p)
        assert schema.id_pos == 0
        assert schema.energy_pos == 1
        assert schema.attr_names == ("g",)

    def test_positional_fallback(self):
        schema = StatesSchema.positional(4)
        assert schema.column_names == ("id", "energy", "col3", "col4")


class TestParseStates:
    def test_single_row(self):
        got = parse_states(io.BytesIO(b"1,0.0,3,0,0,0,+,0,X\n"), SCHEMA)
        assert got == [
            RawState(1, 0.0, {"gtot": "3", "J": "0", "N": "0", "F": "0",
                              "parity": "+", "v": "0", "state": "X"})
        ]

    def test_header_row_skipped(self):
        text = f"{HEADER}\n1,0.0,3,0,0,0,+,0,X\n"
        assert len(parse_states(io.StringIO(text), SCHEMA)) == 1

    def test_comments_and_blanks_skipped(self):
        text = "# comment\n\n1,0.0,3,0,0,0,+,0,X\n"
        assert len(parse_states(io.StringIO(text), SCHEMA)) == 1

    def test_whitespace_delimited(self):
        got = parse_states(io.StringIO("7   12.5  3 0 0 0 + 0 X\n"), SCHEMA)
        assert got[0].id == 7 and got[0].energy == 12.5

    def test_bad_energy_names_row(self):
        text = "1,0.0,3,0,0,0,+,0,X\n2,abc,3,0,0,0,+,0,X\n"
        with pytest.raises(ParseError, match="row 2"):
            parse_states(io.StringIO(text), SCHEMA)

    def test_bad_id(self):
        with pytest.raises(ParseError, match="id"):
            parse_states(io.StringIO("x,0.0,3,0,0,0,+,0,X\n"), SCHEMA)

    def test_duplicate_id(self):
        text = "1,0.0,3,0,0,0,+,0,X\n1,5.0,3,0,0,0,+,0,X\n"
        with pytest.raises(DuplicateIdError):
            parse_states(io.StringIO(text), SCHEMA)

    def test_column_count_mismatch(self):
        with pytest.raises(SchemaError, match="columns"):
            parse_states(io.StringIO("1,0.0,3\n"), SCHEMA)

    def test_negative_energy(self):
        with pytest.raises(DataError):
            parse_states(io.StringIO("1,-4.0,3,0,0,0,+,0,X\n"), SCHEMA)

    def test_without_schema_uses_positions(self):
        got = parse_states(io.StringIO("3 150.0 extra stuff\n"))
        assert got[0].id == 3
        assert got[0].attrs == {"col3": "extra", "col4": "stuff"}


class TestParseTrans:
    def test_single_row(self):
        got = list(parse_trans(io.BytesIO(b"744 1 1.0e6 29800.0\n")))
        assert got == [RawTransition(744, 1, 1.0e6, 29800.0)]

    def test_missing_einstein_a(self):
        with pytest.raises(ParseError, match="3 columns"):
            list(parse_trans(io.StringIO("744 1\n")))

    def test_nonpositive_a(self):
        with pytest.raises(DataError, match="Einstein A"):
            list(parse_trans(io.StringIO("744 1 0.0\n")))

    def test_self_transition(self):
        with pytest.raises(DataError, match="self-transition"):
            list(parse_trans(io.StringIO("5 5 10.0\n")))

    def test_wavenumber_optional(self):
        got = list(parse_trans(io.StringIO("2 1 5.5\n")))
        assert got[0].wavenumber is None

    def test_lazy(self):
        stream = parse_trans(io.StringIO("2 1 5.5\nbroken row\n"))
        assert next(stream).upper_id == 2
        with pytest.raises(ParseError):
            next(stream)


class TestStreamingEquivalence:
    def test_bz2_matches_plain(self, tmp_path):
        text = "2 1 5.5 100.0\n3 1 2.5\n3 2 1.5\n"
        plain = tmp_path / "a.trans"
        plain.write_text(text)
        packed = tmp_path / "a.trans.bz2"
        packed.write_bytes(bz2.compress(text.encode()))
        assert list(parse_trans(plain)) == list(parse_trans(packed))

    def test_bz2_states_match_plain(self, tmp_path):
        text = "1,0.0,3,0,0,0,+,0,X\n2,7.5,3,1,0,0,-,0,X\n"
        plain = tmp_path / "a.states"
        plain.write_text(text)
        packed = tmp_path / "a.states.bz2"
        packed.write_bytes(bz2.compress(text.encode()))
        assert parse_states(plain, SCHEMA) == parse_states(packed, SCHEMA)

    def test_split_files_match_single_stream(self, tmp_path):
        rows = [f"{i + 2} 1 {float(i + 1)}\n" for i in range(10)]
        whole = tmp_path / "all.trans"
        whole.write_text("".join(rows))
        part1 = tmp_path / "p1.trans"
        part1.write_text("".join(rows[:4]))
        part2 = tmp_path / "p2.trans"
        part2.write_text("".join(rows[4:]))

        single = [c for c in iter_transition_chunks(whole)]
        split = [c for c in iter_transition_chunks([part1, part2], chunk_rows=3)]
        cat = lambda chunks, attr: np.concatenate([getattr(c, attr) for c in chunks])
        for attr in ("upper", "lower", "einstein_a"):
            np.testing.assert_array_equal(cat(single, attr), cat(split, attr))

    def test_chunks_match_records(self, tmp_path):
        text = "2 1 5.5 100.0\n3 1 2.5 200.0\n3 2 1.5 99.5\n"
        path = tmp_path / "a.trans"
        path.write_text(text)
        records = list(parse_trans(path))
        (chunk,) = list(iter_transition_chunks(path))
        assert list(chunk.upper) == [t.upper_id for t in records]
        assert list(chunk.einstein_a) == [t.einstein_a for t in records]
        assert list(chunk.wavenumber) == [t.wavenumber for t in records]

    def test_chunked_validation_reports_row(self, tmp_path):
        path = tmp_path / "bad.trans"
        path.write_text("2 1 5.5\n3 1 -2.0\n")
        with pytest.raises(DataError, match="row 2"):
            list(iter_transition_chunks(path))


ids_and_energies = st.lists(
    st.tuples(
        st.integers(min_value=1, max_value=10_000),
        st.floats(min_value=0.0, max_value=5e4, allow_nan=False, width=64),
    ),
    min_size=1,
    max_size=30,
    unique_by=lambda t: t[0],
)


class TestRoundTrip:
    @given(ids_and_energies)
    @settings(max_examples=50, deadline=None)
    def test_states_roundtrip(self, rows):
        schema = StatesSchema.from_header("id,energy,tag")
        states = [RawState(i, e, {"tag": f"s{i}"}) for i, e in rows]
        text = format_states(states, schema)
        assert parse_states(io.StringIO(text), schema) == states

    @given(
        st.lists(
            st.tuples(
                st.integers(2, 500),
                st.integers(1, 500),
                st.floats(1e-3, 1e9, allow_nan=False),
                st.one_of(st.none(), st.floats(1.0, 5e4, allow_nan=False)),
            ),
            min_size=1,
            max_size=30,
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_trans_roundtrip(self, rows):
        trans = [
            RawTransition(u + l, l, a, nu) for u, l, a, nu in rows
        ]
        text = format_trans(trans)
        assert list(parse_trans(io.StringIO(text))) == trans


class TestLoadDataset:
    def _write(self, tmp_path, states_text, trans_text):
        sp = tmp_path / "m.states"
        sp.write_text(states_text)
        tp = tmp_path / "m.trans"
        tp.write_text(trans_text)
        return sp, tp

    def test_counts_and_provenance(self, tmp_path):
        sp, tp = self._write(tmp_path, "1 0.0\n2 10.0\n3 20.0\n", "3 1 2.0\n2 1 1.0\n")
        ds = load_dataset(sp, [tp])
        assert len(ds.states) == 3
        assert ds.n_transitions == 2
        assert ds.provenance["n_transitions"] == 2

    def test_empty_trans_is_valid(self, tmp_path):
        sp, tp = self._write(tmp_path, "1 0.0\n2 10.0\n", "")
        ds = load_dataset(sp, [tp])
        assert ds.n_transitions == 0

    def test_dangling_reference(self, tmp_path):
        sp, tp = self._write(tmp_path, "1 0.0\n2 10.0\n", "99999 1 2.0\n")
        with pytest.raises(IntegrityError, match="99999"):
            load_dataset(sp, [tp])

    def test_from_records_checks_ids(self):
        with pytest.raises(IntegrityError):
            LevelDataset.from_records([RawState(1, 0.0)], [RawTransition(2, 1, 1.0)])
