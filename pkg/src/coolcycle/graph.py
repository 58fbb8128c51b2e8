"""Immutable directed decay graph over molecular states.

Construction takes two streaming passes over the transition source: the
first accumulates per-upper-state Einstein-A sums (and validates edge
direction against the level energies), the second materializes the edge
arrays. Edges are stored in compact per-node spans (CSR layout) sorted by
descending branching ratio, ties broken by ascending lower-state id, so the
whole structure is deterministic and safe for unsynchronized concurrent
reads.

Derived quantities:
  lifetime  = 1 / sum(A)          (childless states get the sentinel)
  BR_i      = A_i / sum(A)        (sum over all channels, pruned or not)
  lambda_i  = 1e7 / (E_up - E_lo) [nm]
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .constants import wavelength_nm
from .errors import DataError
from .exomol import LevelDataset

log = logging.getLogger(__name__)

DEFAULT_SENTINEL_LIFETIME_S = 1e4
NU_MISMATCH_TOLERANCE_CM = 0.01


@dataclass(frozen=True)
class MolecularState:
    id: int
    energy: float
    lifetime_s: float
    attrs: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True, order=True)
class DecayChannel:
    upper_id: int
    lower_id: int
    einstein_a: float
    branching_ratio: float
    wavelength_nm: float


class LevelGraph:
    """Read-only adjacency over states and decay channels.

    Not constructed directly; use :func:`build_graph` or
    :func:`coolcycle.snapshot.load_graph`.
    """

    def __init__(self, *, ids, energies, a_sums, lifetimes, out_offsets,
                 edge_upper, edge_lower, edge_a, edge_br, edge_lambda,
                 attrs, sentinel_lifetime_s, br_floor, provenance):
        self.ids = ids
        self.energies = energies
        self.a_sums = a_sums
        self.lifetimes = lifetimes
        self.out_offsets = out_offsets
        self.edge_upper = edge_upper
        self.edge_lower = edge_lower
        self.edge_a = edge_a
        self.edge_br = edge_br
        self.edge_lambda = edge_lambda
        self.attrs = attrs
        self.sentinel_lifetime_s = sentinel_lifetime_s
        self.br_floor = br_floor
        self.provenance = provenance

        order = np.argsort(ids, kind="stable")
        self._ids_sorted = ids[order]
        self._sorted_to_idx = order.astype(np.int64)
        # Incoming adjacency: edge indices grouped by lower state.
        self.in_offsets = np.zeros(len(ids) + 1, dtype=np.int64)
        np.cumsum(np.bincount(edge_lower, minlength=len(ids)), out=self.in_offsets[1:])
        self.in_edges = np.argsort(edge_lower, kind="stable").astype(np.int64)
        for arr in (self.ids, self.energies, self.a_sums, self.lifetimes,
                    self.out_offsets, self.edge_upper, self.edge_lower,
                    self.edge_a, self.edge_br, self.edge_lambda,
                    self.in_offsets, self.in_edges):
            arr.flags.writeable = False

    @property
    def n_states(self) -> int:
        return len(self.ids)

    @property
    def n_edges(self) -> int:
        return len(self.edge_lower)

    @property
    def n_computed_lifetimes(self) -> int:
        """States whose lifetime came from 1/sum(A) rather than the sentinel."""
        return int(np.count_nonzero(self.a_sums > 0))

    def index_of(self, state_id: int) -> int:
        pos = int(np.searchsorted(self._ids_sorted, state_id))
        if pos >= len(self._ids_sorted) or self._ids_sorted[pos] != state_id:
            raise KeyError(f"unknown state id {state_id}")
        return int(self._sorted_to_idx[pos])

    def has_state(self, state_id: int) -> bool:
        pos = int(np.searchsorted(self._ids_sorted, state_id))
        return pos < len(self._ids_sorted) and self._ids_sorted[pos] == state_id

    def state(self, state_id: int) -> MolecularState:
        i = self.index_of(state_id)
        return MolecularState(
            id=int(self.ids[i]),
            energy=float(self.energies[i]),
            lifetime_s=float(self.lifetimes[i]),
            attrs=self.attrs[i] if self.attrs else {},
        )

    def out_span(self, idx: int) -> slice:
        return slice(int(self.out_offsets[idx]), int(self.out_offsets[idx + 1]))

    def channel(self, edge: int) -> DecayChannel:
        return DecayChannel(
            upper_id=int(self.ids[self.edge_upper[edge]]),
            lower_id=int(self.ids[self.edge_lower[edge]]),
            einstein_a=float(self.edge_a[edge]),
            branching_ratio=float(self.edge_br[edge]),
            wavelength_nm=float(self.edge_lambda[edge]),
        )

    def out_channels(self, state_id: int) -> list[DecayChannel]:
        span = self.out_span(self.index_of(state_id))
        return [self.channel(e) for e in range(span.start, span.stop)]

    def top_channels(
        self,
        upper_id: int,
        g: int,
        band: tuple[float, float],
        br_floor: float = 0.0,
    ) -> list[DecayChannel]:
        """The strongest in-band channels of a state, ties at the cut included.

        Returns every channel with wavelength strictly inside ``band`` and
        branching ratio strictly above ``br_floor`` whose BR is >= the g-th
        largest such BR. Because of ties the result may hold more than ``g``
        channels; it is sorted by descending BR, then ascending lower id.
        """
        if g < 1:
            raise ValueError(f"g must be >= 1, got {g}")
        lam_min, lam_max = band
        if not lam_min < lam_max:
            raise ValueError(f"empty wavelength band {band}")
        idx = self.index_of(upper_id)
        edges = self.top_edges(idx, g, lam_min, lam_max, br_floor)
        return [self.channel(int(e)) for e in edges]

    def top_edges(self, idx, g, lam_min, lam_max, br_floor) -> np.ndarray:
        """Edge indices of the top-g in-band channels (ties included).

        Relies on the per-node (descending BR, ascending lower id) edge order.
        """
        span = self.out_span(idx)
        lam = self.edge_lambda[span]
        br = self.edge_br[span]
        keep = (lam > lam_min) & (lam < lam_max) & (br > br_floor)
        cand = np.flatnonzero(keep)
        if cand.size == 0:
            return cand
        kept_br = br[cand]
        threshold = kept_br[min(g, cand.size) - 1]
        return cand[kept_br >= threshold] + span.start


def build_graph(
    dataset: LevelDataset,
    br_floor: float = 0.0,
    lifetime_sentinel_s: float = DEFAULT_SENTINEL_LIFETIME_S,
) -> LevelGraph:
    """Build the decay graph from a referentially-checked dataset.

    ``br_floor`` > 0 drops channels with a smaller branching ratio from the
    adjacency; they still count toward Einstein-A sums, so lifetimes and the
    surviving BRs are unaffected by pruning.
    """
    if lifetime_sentinel_s <= 0:
        raise ValueError("lifetime sentinel must be positive")
    n = len(dataset.states)
    ids = np.fromiter((s.id for s in dataset.states), dtype=np.int64, count=n)
    energies = np.fromiter((s.energy for s in dataset.states), dtype=np.float64, count=n)
    attrs = [s.attrs for s in dataset.states]

    ids_sorted_order = np.argsort(ids, kind="stable")
    ids_sorted = ids[ids_sorted_order]

    def to_idx(col: np.ndarray) -> np.ndarray:
        return ids_sorted_order[np.searchsorted(ids_sorted, col)].astype(np.int32)

    # Pass 1: Einstein-A sums per upper state; direction and wavenumber checks.
    a_sums = np.zeros(n, dtype=np.float64)
    nu_mismatches = 0
    nu_example = None
    for chunk in dataset.iter_chunks():
        up = to_idx(chunk.upper)
        lo = to_idx(chunk.lower)
        diff = energies[up] - energies[lo]
        wrong = np.flatnonzero(diff <= 0)
        if wrong.size:
            i = int(wrong[0])
            raise DataError(
                f"edge {chunk.upper[i]}->{chunk.lower[i]} has E_upper "
                f"({energies[up[i]]}) <= E_lower ({energies[lo[i]]})"
            )
        a_sums += np.bincount(up, weights=chunk.einstein_a, minlength=n)
        with np.errstate(invalid="ignore"):
            off = np.abs(chunk.wavenumber - diff) > NU_MISMATCH_TOLERANCE_CM
        bad = np.flatnonzero(off & ~np.isnan(chunk.wavenumber))
        if bad.size:
            nu_mismatches += int(bad.size)
            if nu_example is None:
                i = int(bad[0])
                nu_example = (int(chunk.upper[i]), int(chunk.lower[i]),
                              float(chunk.wavenumber[i]), float(diff[i]))
    if nu_mismatches:
        log.warning(
            "%d transition wavenumbers differ from level energy differences "
            "by > %g cm^-1 (e.g. edge %d->%d: file %g vs levels %g); "
            "wavelengths are computed from the level energies",
            nu_mismatches, NU_MISMATCH_TOLERANCE_CM, *nu_example,
        )

    lifetimes = np.full(n, lifetime_sentinel_s, dtype=np.float64)
    has_out = a_sums > 0
    lifetimes[has_out] = 1.0 / a_sums[has_out]

    # Pass 2: materialize (optionally pruned) edges, then order per node.
    up_parts, lo_parts, a_parts = [], [], []
    for chunk in dataset.iter_chunks():
        up = to_idx(chunk.upper)
        lo = to_idx(chunk.lower)
        if br_floor > 0.0:
            keep = chunk.einstein_a / a_sums[up] >= br_floor
            up, lo, a = up[keep], lo[keep], chunk.einstein_a[keep]
        else:
            a = chunk.einstein_a
        up_parts.append(up)
        lo_parts.append(lo)
        a_parts.append(np.asarray(a, dtype=np.float64))

    if up_parts:
        edge_upper = np.concatenate(up_parts)
        edge_lower = np.concatenate(lo_parts)
        edge_a = np.concatenate(a_parts)
    else:
        edge_upper = np.empty(0, dtype=np.int32)
        edge_lower = np.empty(0, dtype=np.int32)
        edge_a = np.empty(0, dtype=np.float64)
    del up_parts, lo_parts, a_parts

    edge_br = edge_a / a_sums[edge_upper]
    order = np.lexsort((ids[edge_lower], -edge_br, edge_upper))
    edge_upper = np.ascontiguousarray(edge_upper[order])
    edge_lower = np.ascontiguousarray(edge_lower[order])
    edge_a = np.ascontiguousarray(edge_a[order])
    edge_br = np.ascontiguousarray(edge_br[order])
    edge_lambda = 1e7 / (energies[edge_upper] - energies[edge_lower])

    out_offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(edge_upper, minlength=n), out=out_offsets[1:])

    return LevelGraph(
        ids=ids,
        energies=energies,
        a_sums=a_sums,
        lifetimes=lifetimes,
        out_offsets=out_offsets,
        edge_upper=edge_upper,
        edge_lower=edge_lower,
        edge_a=edge_a,
        edge_br=edge_br,
        edge_lambda=edge_lambda,
        attrs=attrs,
        sentinel_lifetime_s=lifetime_sentinel_s,
        br_floor=br_floor,
        provenance=dict(dataset.provenance),
    )


__all__ = [
    "DecayChannel",
    "LevelGraph",
    "MolecularState",
    "build_graph",
    "DEFAULT_SENTINEL_LIFETIME_S",
    "wavelength_nm",
]
