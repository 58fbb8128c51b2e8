"""Binary snapshot of a built decay graph, so repeated searches skip parsing.

Format (documented in docs/snapshot_format.md; all integers little-endian):

    offset  size  field
    0       8     magic  b"COOLGRPH"
    8       4     format version (uint32), currently 1
    12      8     n_states (uint64)
    20      8     n_edges  (uint64)
    28      8     metadata length in bytes (uint64)
    36      -     fixed-width record arrays, in order:
                    ids          int64[n_states]
                    energies     float64[n_states]
                    a_sums       float64[n_states]
                    lifetimes    float64[n_states]
                    out_offsets  int64[n_states + 1]
                    edge_upper   int32[n_edges]
                    edge_lower   int32[n_edges]
                    edge_a       float64[n_edges]
                    edge_br      float64[n_edges]
                    edge_lambda  float64[n_edges]
    ...     -     metadata: UTF-8 JSON object with keys
                    "sentinel_lifetime_s", "br_floor", "provenance",
                    "attrs" (per-state attribute dicts, in ids order)

The incoming adjacency is derived, not stored; it is rebuilt on load.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import DataError
from .graph import LevelGraph

MAGIC = b"COOLGRPH"
VERSION = 1
_HEADER = struct.Struct("<8sIQQQ")


def _arrays(graph: LevelGraph):
    return (
        ("ids", graph.ids, "<i8"),
        ("energies", graph.energies, "<f8"),
        ("a_sums", graph.a_sums, "<f8"),
        ("lifetimes", graph.lifetimes, "<f8"),
        ("out_offsets", graph.out_offsets, "<i8"),
        ("edge_upper", graph.edge_upper, "<i4"),
        ("edge_lower", graph.edge_lower, "<i4"),
        ("edge_a", graph.edge_a, "<f8"),
        ("edge_br", graph.edge_br, "<f8"),
        ("edge_lambda", graph.edge_lambda, "<f8"),
    )


def graph_bytes(graph: LevelGraph) -> bytes:
    """Serialize; equal graphs produce byte-identical output."""
    meta = json.dumps(
        {
            "sentinel_lifetime_s": graph.sentinel_lifetime_s,
            "br_floor": graph.br_floor,
            "provenance": graph.provenance,
            "attrs": graph.attrs,
        },
        sort_keys=True,
        separators=(",", ":"),
    ).encode()
    parts = [
        _HEADER.pack(MAGIC, VERSION, graph.n_states, graph.n_edges, len(meta))
    ]
    parts.extend(np.asarray(arr, dtype=dt).tobytes() for _, arr, dt in _arrays(graph))
    parts.append(meta)
    return b"".join(parts)


def save_graph(graph: LevelGraph, path: str | Path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(graph_bytes(graph))
    tmp.replace(path)


def load_graph(path: str | Path) -> LevelGraph:
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise DataError(f"{path}: truncated snapshot")
    magic, version, n, m, meta_len = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise DataError(f"{path}: not a graph snapshot (bad magic)")
    if version != VERSION:
        raise DataError(f"{path}: unsupported snapshot version {version}")
    pos = _HEADER.size
    fields = {}
    lengths = {"ids": n, "energies": n, "a_sums": n, "lifetimes": n,
               "out_offsets": n + 1, "edge_upper": m, "edge_lower": m,
               "edge_a": m, "edge_br": m, "edge_lambda": m}
    for name, dt in (("ids", "<i8"), ("energies", "<f8"), ("a_sums", "<f8"),
                     ("lifetimes", "<f8"), ("out_offsets", "<i8"),
                     ("edge_upper", "<i4"), ("edge_lower", "<i4"),
                     ("edge_a", "<f8"), ("edge_br", "<f8"), ("edge_lambda", "<f8")):
        count = lengths[name]
        arr = np.frombuffer(blob, dtype=dt, count=count, offset=pos).copy()
        pos += arr.nbytes
        fields[name] = arr
    if pos + meta_len > len(blob):
        raise DataError(f"{path}: truncated snapshot metadata")
    meta = json.loads(blob[pos:pos + meta_len].decode())
    return LevelGraph(
        ids=fields["ids"],
        energies=fields["energies"],
        a_sums=fields["a_sums"],
        lifetimes=fields["lifetimes"],
        out_offsets=fields["out_offsets"],
        edge_upper=fields["edge_upper"],
        edge_lower=fields["edge_lower"],
        edge_a=fields["edge_a"],
        edge_br=fields["edge_br"],
        edge_lambda=fields["edge_lambda"],
        attrs=meta.get("attrs") or [],
        sentinel_lifetime_s=meta["sentinel_lifetime_s"],
        br_floor=meta["br_floor"],
        provenance=meta.get("provenance", {}),
    )
