"""Ranked tabular output, CSV/JSON export, laser grouping and DOT diagrams.

Two display modes exist. The default mirrors the reference result tables:
fixed roundings per column (half-up on the decimal representation, so the
printed strings are deterministic). ``full_precision`` emits raw doubles
via ``repr`` instead. CSV columns, in order:

    S1_id, S0_id, T_init, num_decays, n_cool, t_cool_ms,
    n_cool_n10_ratio, closure, lambda_list_nm, laser_count

The first nine match the reference table; ``laser_count`` (driven
transitions grouped by near-degenerate frequency) is appended. With the
4 K relaxation active, the temperature-dependent columns are renamed
``approx_T_init``, ``n_cool_4K``, ``t_cool_ms_4K``, ``n_cool_n10_ratio_4K``
so relaxed figures are never mistaken for standard ones.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Sequence

from .constants import LIGHT_M_PER_S
from .graph import DecayChannel
from .search import CoolingScheme, SearchParams

DEFAULT_LASER_TOLERANCE_GHZ = 1.0

STANDARD_COLUMNS = (
    "S1_id", "S0_id", "T_init", "num_decays", "n_cool", "t_cool_ms",
    "n_cool_n10_ratio", "closure", "lambda_list_nm", "laser_count",
)
RELAXED_COLUMNS = (
    "S1_id", "S0_id", "approx_T_init", "num_decays", "n_cool_4K", "t_cool_ms_4K",
    "n_cool_n10_ratio_4K", "closure", "lambda_list_nm", "laser_count",
)


def round_half_up(value: float, digits: int) -> float:
    """Round on the decimal representation, halves away from zero."""
    if math.isinf(value) or math.isnan(value):
        return value
    q = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


def _strip_zero(text: str) -> str:
    return text[:-2] if text.endswith(".0") else text


@dataclass(frozen=True)
class SchemeRow:
    """One display row; numeric fields already carry the display rounding."""

    s1_id: str
    s0_id: int
    t_init: float        # K, 1 decimal
    num_decays: int
    n_cool: int
    t_cool_ms: float     # 1 decimal
    ratio: float         # n_cool / n10, 3 decimals
    closure: float       # 8 decimals
    lambdas_nm: tuple[float, ...]  # ascending, 2 decimals each
    laser_count: int

    def cells(self) -> list[str]:
        return [
            self.s1_id,
            str(self.s0_id),
            f"{self.t_init:.1f}",
            str(self.num_decays),
            str(self.n_cool),
            _strip_zero(f"{self.t_cool_ms:.1f}"),
            f"{self.ratio:.3f}",
            f"{self.closure:.8f}",
            "[" + ", ".join(f"{x:.2f}" for x in self.lambdas_nm) + "]",
            str(self.laser_count),
        ]


@dataclass(frozen=True)
class FullPrecisionRow:
    s1_id: str
    s0_id: int
    t_init: float
    num_decays: int
    n_cool: float
    t_cool_ms: float
    ratio: float
    closure: float
    lambdas_nm: tuple[float, ...]
    laser_count: int

    def cells(self) -> list[str]:
        return [
            self.s1_id,
            str(self.s0_id),
            repr(self.t_init),
            str(self.num_decays),
            repr(self.n_cool),
            repr(self.t_cool_ms),
            repr(self.ratio),
            repr(self.closure),
            "[" + ", ".join(repr(x) for x in self.lambdas_nm) + "]",
            str(self.laser_count),
        ]


def group_lasers(
    channels: Sequence[DecayChannel],
    tolerance_ghz: float = DEFAULT_LASER_TOLERANCE_GHZ,
) -> list[list[DecayChannel]]:
    """Partition driven channels into laser groups by transition frequency.

    Channels whose frequencies chain within the tolerance share one laser.
    Reporting-only: the grouping never feeds back into the rate model.
    """
    if not channels:
        return []
    tol_hz = tolerance_ghz * 1e9
    ordered = sorted(channels, key=lambda c: (-c.wavelength_nm, c.lower_id, c.upper_id))
    freqs = [LIGHT_M_PER_S / (c.wavelength_nm * 1e-9) for c in ordered]
    groups = [[ordered[0]]]
    for prev, ch, f_prev, f in zip(ordered, ordered[1:], freqs, freqs[1:]):
        if f - f_prev < tol_hz:
            groups[-1].append(ch)
        else:
            groups.append([ch])
    return groups


def scheme_row(
    scheme: CoolingScheme,
    tolerance_ghz: float = DEFAULT_LASER_TOLERANCE_GHZ,
    full_precision: bool = False,
):
    fig = scheme.figures
    lasers = len(group_lasers(scheme.all_driven, tolerance_ghz))
    lambdas = sorted(c.wavelength_nm for c in scheme.all_driven)
    t_cool_ms = fig.t_cool_s * 1e3
    if full_precision:
        return FullPrecisionRow(
            s1_id=scheme.s1_label,
            s0_id=scheme.s0_id,
            t_init=fig.t_init_k,
            num_decays=scheme.num_decays,
            n_cool=fig.n_cool,
            t_cool_ms=t_cool_ms,
            ratio=fig.ratio,
            closure=fig.closure_p,
            lambdas_nm=tuple(lambdas),
            laser_count=lasers,
        )
    return SchemeRow(
        s1_id=scheme.s1_label,
        s0_id=scheme.s0_id,
        t_init=round_half_up(fig.t_init_k, 1),
        num_decays=scheme.num_decays,
        n_cool=int(round_half_up(fig.n_cool, 0)),
        t_cool_ms=round_half_up(t_cool_ms, 1),
        ratio=round_half_up(fig.ratio, 3),
        closure=round_half_up(fig.closure_p, 8),
        lambdas_nm=tuple(round_half_up(x, 2) for x in lambdas),
        laser_count=lasers,
    )


def sort_schemes(schemes: Iterable[CoolingScheme]) -> list[CoolingScheme]:
    """Ranking used for display: rounded cooling time, laser budget, rounded
    retention ratio, then excited- and starting-state ids for stability."""

    def key(s: CoolingScheme):
        fig = s.figures
        s1 = s.s1_id if isinstance(s.s1_id, tuple) else (s.s1_id,)
        return (
            round_half_up(fig.t_cool_s * 1e3, 1),
            s.num_decays,
            round_half_up(fig.ratio, 3),
            s1,
            s.s0_id,
        )

    return sorted(schemes, key=key)


def rows_for(
    schemes: Iterable[CoolingScheme],
    tolerance_ghz: float = DEFAULT_LASER_TOLERANCE_GHZ,
    full_precision: bool = False,
) -> list:
    return [
        scheme_row(s, tolerance_ghz, full_precision) for s in sort_schemes(schemes)
    ]


def _columns(relaxed: bool) -> tuple[str, ...]:
    return RELAXED_COLUMNS if relaxed else STANDARD_COLUMNS


def render_csv(rows: Sequence, relaxed: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_columns(relaxed))
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()


def parse_csv(text: str) -> list[SchemeRow]:
    """Read back a (display-mode) CSV produced by :func:`render_csv`."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if len(header) != len(STANDARD_COLUMNS):
        raise ValueError(f"unexpected column count {len(header)}")
    rows = []
    for rec in reader:
        lam = rec[8].strip("[]")
        rows.append(
            SchemeRow(
                s1_id=rec[0],
                s0_id=int(rec[1]),
                t_init=float(rec[2]),
                num_decays=int(rec[3]),
                n_cool=int(rec[4]),
                t_cool_ms=float(rec[5]),
                ratio=float(rec[6]),
                closure=float(rec[7]),
                lambdas_nm=tuple(float(x) for x in lam.split(", ")) if lam else (),
                laser_count=int(rec[9]),
            )
        )
    return rows


def render_table(rows: Sequence, relaxed: bool = False) -> str:
    cols = _columns(relaxed)
    table = [list(cols)] + [row.cells() for row in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(cols))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip()
             for r in table]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def scheme_json(
    schemes: Sequence[CoolingScheme],
    params: SearchParams,
    tolerance_ghz: float = DEFAULT_LASER_TOLERANCE_GHZ,
) -> dict:
    """Machine-readable export: display row plus full-precision detail."""
    out = []
    for scheme in sort_schemes(schemes):
        row = scheme_row(scheme, tolerance_ghz)
        fig = scheme.figures
        out.append(
            {
                "row": dict(zip(_columns(params.relaxed_4k), row.cells())),
                "kind": scheme.kind,
                "S1_id": list(scheme.s1_id) if scheme.kind == "double" else scheme.s1_id,
                "S0_id": scheme.s0_id,
                "figures": {
                    "closure": fig.closure_p,
                    "n10": None if math.isinf(fig.n10) else fig.n10,
                    "inv_rate_s": fig.inv_rate_s,
                    "t10_s": None if math.isinf(fig.t10_s) else fig.t10_s,
                    "T_init_K": fig.t_init_k,
                    "cooled_from_K": fig.cooled_from_k,
                    "n_cool": fig.n_cool,
                    "t_cool_s": fig.t_cool_s,
                    "min_tau_br_ratio_s": fig.min_tau_br_ratio_s,
                },
                "channels": [
                    {
                        "upper_id": c.upper_id,
                        "lower_id": c.lower_id,
                        "einstein_a": c.einstein_a,
                        "branching_ratio": c.branching_ratio,
                        "wavelength_nm": c.wavelength_nm,
                    }
                    for c in scheme.all_driven
                ],
            }
        )
    return {
        "params": {
            "g_max": params.g_max,
            "lambda_min_nm": params.lambda_min_nm,
            "lambda_max_nm": params.lambda_max_nm,
            "t0_k": params.t0_k,
            "mass_u": params.mass_u,
            "intensity_mw_cm2": params.intensity_mw_cm2,
            "br_floor": params.br_floor,
            "min_starting_lifetime_s": params.min_starting_lifetime_s,
            "relaxed_4k": params.relaxed_4k,
        },
        "schemes": out,
    }


def export_diagram(scheme: CoolingScheme) -> str:
    """DOT digraph of one scheme: starting states red, excited purple,
    remaining reachable states blue; edges labeled wavelength and BR."""
    s1_ids = list(scheme.s1_id) if scheme.kind == "double" else [scheme.s1_id]
    lowers = sorted({c.lower_id for c in scheme.all_driven})
    lines = ["digraph cooling_scheme {", "  rankdir=TB;",
             '  node [style=filled, fontcolor=white];']
    for sid in s1_ids:
        lines.append(f'  "{sid}" [fillcolor=purple];')
    for lid in lowers:
        color = "red" if lid in scheme.s0_ids else "blue"
        lines.append(f'  "{lid}" [fillcolor={color}];')
    for c in sorted(scheme.all_driven, key=lambda c: (c.upper_id, c.lower_id)):
        label = f"{c.wavelength_nm:.2f} nm\\nBR {c.branching_ratio:.3g}"
        lines.append(f'  "{c.upper_id}" -> "{c.lower_id}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_text_atomic(text: str, path: str | Path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)
