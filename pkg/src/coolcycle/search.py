"""Enumeration of viable photon-cycling schemes over a decay graph.

The single-excited-state search runs in four steps:

1. starting states: energy below the thermal-occupancy cutoff for the
   preset maximum gas temperature, lifetime above the pumping floor;
2. reachable excited states: upper ends of in-band decay channels into any
   starting state (the decay channel implies a drivable excitation);
3. reachable lower states: in-band decay targets of the excited states;
4. per excited state, drive the strongest ``g`` in-band channels (ties at
   the cut included, short-lived targets dropped) and keep the scheme iff
   cooling finishes before 10% retention runs out and every driven target
   outlives its expected dwell time.

Cutoffs are strict inequalities throughout, matching the reference query
semantics the golden fixtures were produced with.

The two-excited-state search first reruns step 4 with the retention bound
relaxed by the best-case factor of two, then pairs excited states that share
a starting state, decay to exactly the same lower states, and have lifetimes
within a configurable ratio.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .constants import (
    NCOOL_COEFF,
    REFERENCE_INTENSITY_MW_CM2,
    SATURATION_COEFF,
    thermal_energy_cutoff_cm,
)
from .graph import DecayChannel, LevelGraph
from . import rates

DEFAULT_T0_K = 500.0
DEFAULT_BR_FLOOR = 1e-8
DEFAULT_MIN_STARTING_LIFETIME_S = 1e-6


@dataclass(frozen=True)
class SearchParams:
    """User-preset knobs of the scheme search."""

    g_max: int
    lambda_min_nm: float
    lambda_max_nm: float
    mass_u: float
    t0_k: float = DEFAULT_T0_K
    intensity_mw_cm2: float = 1e3
    br_floor: float = DEFAULT_BR_FLOOR
    min_starting_lifetime_s: float = DEFAULT_MIN_STARTING_LIFETIME_S
    lifetime_sentinel_s: float = 1e4
    relaxed_4k: bool = False
    double_lifetime_ratio_max: float = 1.5
    workers: int = 1

    def __post_init__(self):
        if self.g_max < 1:
            raise ValueError(f"g_max must be >= 1, got {self.g_max}")
        if not self.lambda_min_nm < self.lambda_max_nm:
            raise ValueError(
                f"need lambda_min < lambda_max, got "
                f"[{self.lambda_min_nm}, {self.lambda_max_nm}]"
            )
        if self.t0_k <= 0:
            raise ValueError(f"t0_k must be positive, got {self.t0_k}")
        if self.mass_u <= 0:
            raise ValueError(f"mass_u must be positive, got {self.mass_u}")
        if self.intensity_mw_cm2 <= 0:
            raise ValueError(f"intensity must be positive, got {self.intensity_mw_cm2}")
        if self.br_floor < 0:
            raise ValueError(f"br_floor must be >= 0, got {self.br_floor}")
        if self.min_starting_lifetime_s <= 0:
            raise ValueError("min_starting_lifetime_s must be positive")
        if self.double_lifetime_ratio_max < 1:
            raise ValueError("double_lifetime_ratio_max must be >= 1")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    @property
    def band(self) -> tuple[float, float]:
        return (self.lambda_min_nm, self.lambda_max_nm)


@dataclass(frozen=True)
class SchemeFigures:
    """Every closed-form figure of merit attached to an emitted scheme.

    ``t_init_k`` is the occupancy-derived starting temperature;
    ``cooled_from_k`` is the temperature the cooling columns were computed
    at (equal to ``t_init_k`` normally, pinned to 4 K in relaxed mode).
    """

    closure_p: float
    n10: float
    inv_rate_s: float
    t10_s: float
    t_init_k: float
    cooled_from_k: float
    n_cool: float
    t_cool_s: float
    min_tau_br_ratio_s: float

    @property
    def ratio(self) -> float:
        return 0.0 if math.isinf(self.n10) else self.n_cool / self.n10

    def viable(self) -> bool:
        return self.n_cool < self.n10 and self.t_cool_s < self.min_tau_br_ratio_s


@dataclass(frozen=True)
class CoolingScheme:
    kind: str  # "single" | "double"
    s1_id: int | tuple[int, int]
    s0_ids: tuple[int, ...]
    driven: tuple[DecayChannel, ...]
    figures: SchemeFigures
    driven_b: tuple[DecayChannel, ...] = ()

    @property
    def s0_id(self) -> int:
        return self.s0_ids[0]

    @property
    def all_driven(self) -> tuple[DecayChannel, ...]:
        return self.driven + self.driven_b

    @property
    def num_decays(self) -> int:
        return len(self.all_driven)

    @property
    def s1_label(self) -> str:
        if self.kind == "double":
            return f"{self.s1_id[0]}+{self.s1_id[1]}"
        return str(self.s1_id)

    def dedup_key(self):
        lowers = frozenset((c.upper_id, c.lower_id) for c in self.all_driven)
        return (self.s1_label, self.s0_id, lowers)

    def sort_key(self):
        s1 = self.s1_id if isinstance(self.s1_id, tuple) else (self.s1_id,)
        return (self.figures.t_cool_s, self.num_decays, self.figures.ratio, s1, self.s0_id)


def find_starting_states(graph: LevelGraph, params: SearchParams) -> set[int]:
    """Step 1: thermally occupied, long-enough-lived states (ids)."""
    cutoff = thermal_energy_cutoff_cm(params.t0_k)
    mask = (graph.energies < cutoff) & (graph.lifetimes > params.min_starting_lifetime_s)
    return {int(i) for i in graph.ids[mask]}


def _excitation_pairs(
    graph: LevelGraph, s0_ids: set[int], params: SearchParams
) -> dict[int, list[int]]:
    """Step 2 with bookkeeping: upper-state index -> admitting starting indices.

    A starting state admits an excited state when a decay channel from the
    excited state into it has an in-band wavelength (the laser floor on
    branching ratio is deliberately not applied here).
    """
    lam_min, lam_max = params.band
    pairs: dict[int, list[int]] = {}
    for s0 in sorted(s0_ids):
        i0 = graph.index_of(s0)
        edges = graph.in_edges[graph.in_offsets[i0]: graph.in_offsets[i0 + 1]]
        lam = graph.edge_lambda[edges]
        for e in edges[(lam > lam_min) & (lam < lam_max)]:
            pairs.setdefault(int(graph.edge_upper[e]), []).append(i0)
    return pairs


def find_reachable_excited(
    graph: LevelGraph, s0_ids: set[int], params: SearchParams
) -> set[int]:
    """Step 2: states that decay into a starting state within the laser band."""
    return {int(graph.ids[i]) for i in _excitation_pairs(graph, s0_ids, params)}


def find_reachable(
    graph: LevelGraph, s1_ids: set[int], params: SearchParams
) -> set[int]:
    """Step 3: in-band, above-floor decay targets of the excited states.

    Every starting state that admitted one of ``s1_ids`` must reappear among
    the band-filtered decay targets (the return channel may legitimately sit
    below the laser floor, so the containment is checked floor-free); this
    guards the adjacency wiring.
    """
    lam_min, lam_max = params.band
    out: set[int] = set()
    band_only: set[int] = set()
    for s1 in s1_ids:
        i1 = graph.index_of(s1)
        span = graph.out_span(i1)
        lam = graph.edge_lambda[span]
        br = graph.edge_br[span]
        in_band = (lam > lam_min) & (lam < lam_max)
        keep = in_band & (br > params.br_floor)
        lowers = graph.edge_lower[span]
        out.update(int(graph.ids[j]) for j in lowers[keep])
        band_only.update(int(graph.ids[j]) for j in lowers[in_band])
    s0_ids = find_starting_states(graph, params)
    pairs = _excitation_pairs(graph, s0_ids, params)
    admitted = {
        int(graph.ids[i0])
        for s1_idx, idxs in pairs.items()
        if int(graph.ids[s1_idx]) in s1_ids
        for i0 in idxs
    }
    stray = admitted - band_only
    assert not stray, f"starting states {sorted(stray)} unreachable by decay"
    return out


def _driven_edges(graph: LevelGraph, s1_idx: int, g: int, params: SearchParams):
    """Step 4 channel selection: top-g in band, ties kept, short-lived dropped."""
    top = graph.top_edges(
        s1_idx, g, params.lambda_min_nm, params.lambda_max_nm, params.br_floor
    )
    if top.size == 0:
        return top
    alive = graph.lifetimes[graph.edge_lower[top]] > params.min_starting_lifetime_s
    return top[alive]


def _figures(
    graph: LevelGraph,
    s1_idx: int,
    edges: np.ndarray,
    s0_idx: int,
    params: SearchParams,
) -> SchemeFigures:
    br = graph.edge_br[edges]
    lam = graph.edge_lambda[edges]
    tau_lower = graph.lifetimes[graph.edge_lower[edges]]

    p = float(math.fsum(br))
    n10 = rates.n_ten_percent(p)
    lifetime = float(graph.lifetimes[s1_idx])
    inv_rate = lifetime * (len(edges) + 1) + (
        SATURATION_COEFF
        * (REFERENCE_INTENSITY_MW_CM2 / params.intensity_mw_cm2)
        * math.fsum(1.0 / x**3 for x in lam)
    )
    t_init = rates.initial_temperature(float(graph.energies[s0_idx]))
    cooled_from = 4.0 if params.relaxed_4k else t_init
    br_over_lambda = math.fsum(b / x for b, x in zip(br, lam))
    n_cool = NCOOL_COEFF * math.sqrt(cooled_from * params.mass_u) / (
        (1.0 / p) * br_over_lambda
    )
    min_tau_br = float(np.min(tau_lower / br))
    t_cool = n_cool * inv_rate
    return SchemeFigures(
        closure_p=p,
        n10=n10,
        inv_rate_s=inv_rate,
        t10_s=n10 * inv_rate,
        t_init_k=t_init,
        cooled_from_k=cooled_from,
        n_cool=n_cool,
        t_cool_s=t_cool,
        min_tau_br_ratio_s=min_tau_br,
    )


def _emit(figures: SchemeFigures, relax_half: bool) -> bool:
    if relax_half:
        # Pairing prefilter: a second excited state can at best double the
        # scattering rate, so only the retention bound is applied, at half
        # strength; dwell-time limits are rechecked on the combined scheme.
        return 0.5 * figures.n_cool < figures.n10
    return figures.viable()


def enumerate_single_schemes(
    graph: LevelGraph,
    params: SearchParams,
    g: int,
    _relax_half: bool = False,
) -> list[CoolingScheme]:
    """One pass of step 4 at a fixed laser budget ``g``."""
    if g < 1:
        raise ValueError(f"g must be >= 1, got {g}")
    s0_ids = find_starting_states(graph, params)
    pairs = _excitation_pairs(graph, s0_ids, params)
    s1_order = sorted(pairs)

    def schemes_for(s1_idx: int) -> list[CoolingScheme]:
        edges = _driven_edges(graph, s1_idx, g, params)
        if edges.size == 0:
            return []
        channels = tuple(graph.channel(int(e)) for e in edges)
        out = []
        for s0_idx in pairs[s1_idx]:
            figures = _figures(graph, s1_idx, edges, s0_idx, params)
            if _emit(figures, _relax_half):
                out.append(
                    CoolingScheme(
                        kind="single",
                        s1_id=int(graph.ids[s1_idx]),
                        s0_ids=(int(graph.ids[s0_idx]),),
                        driven=channels,
                        figures=figures,
                    )
                )
        return out

    if params.workers > 1:
        with ThreadPoolExecutor(max_workers=params.workers) as pool:
            chunks = pool.map(schemes_for, s1_order)
    else:
        chunks = map(schemes_for, s1_order)

    schemes: list[CoolingScheme] = []
    seen = set()
    for chunk in chunks:
        for scheme in chunk:
            key = scheme.dedup_key()
            if key not in seen:
                seen.add(key)
                schemes.append(scheme)
    return schemes


def sweep(graph: LevelGraph, params: SearchParams) -> list[CoolingScheme]:
    """Union of the single-scheme search over g = 1..g_max, deduplicated."""
    schemes: list[CoolingScheme] = []
    seen = set()
    for g in range(1, params.g_max + 1):
        for scheme in enumerate_single_schemes(graph, params, g):
            key = scheme.dedup_key()
            if key not in seen:
                seen.add(key)
                schemes.append(scheme)
    schemes.sort(key=CoolingScheme.sort_key)
    return schemes


def assemble_single(
    graph: LevelGraph, s1_id: int, s0_id: int, g: int, params: SearchParams
) -> CoolingScheme:
    """Build one explicit scheme (no viability filtering); for inspection."""
    s1_idx = graph.index_of(s1_id)
    edges = _driven_edges(graph, s1_idx, g, params)
    if edges.size == 0:
        raise ValueError(f"state {s1_id} has no drivable in-band channels")
    figures = _figures(graph, s1_idx, edges, graph.index_of(s0_id), params)
    return CoolingScheme(
        kind="single",
        s1_id=s1_id,
        s0_ids=(s0_id,),
        driven=tuple(graph.channel(int(e)) for e in edges),
        figures=figures,
    )


def _double_figures(
    graph: LevelGraph,
    a: CoolingScheme,
    b: CoolingScheme,
    s0_idx: int,
    params: SearchParams,
) -> SchemeFigures:
    by_lower_a = {c.lower_id: c for c in a.driven}
    by_lower_b = {c.lower_id: c for c in b.driven}
    lowers = sorted(by_lower_a)
    paired = [(by_lower_a[l], by_lower_b[l]) for l in lowers]

    p_a = a.figures.closure_p
    p_b = b.figures.closure_p
    p = rates.double_closure(p_a, p_b)
    n10 = rates.n_ten_percent(p)
    tau_avg = rates.double_lifetime(
        float(graph.lifetimes[graph.index_of(a.s1_id)]),
        float(graph.lifetimes[graph.index_of(b.s1_id)]),
    )
    inv_rate = rates.double_inverse_rate(tau_avg, paired, params.intensity_mw_cm2)
    t_init = rates.initial_temperature(float(graph.energies[s0_idx]))
    cooled_from = 4.0 if params.relaxed_4k else t_init
    n_cool = rates.double_n_cool(
        p_a, p_b, a.driven, b.driven, cooled_from, params.mass_u
    )
    # Expected dwell time per shared lower state uses the mean of the two
    # branching ratios feeding it (each subscheme hosts half the population).
    min_tau_br = min(
        float(graph.lifetimes[graph.index_of(l)])
        / ((ca.branching_ratio + cb.branching_ratio) / 2.0)
        for l, (ca, cb) in zip(lowers, paired)
    )
    t_cool = n_cool * inv_rate
    return SchemeFigures(
        closure_p=p,
        n10=n10,
        inv_rate_s=inv_rate,
        t10_s=n10 * inv_rate,
        t_init_k=t_init,
        cooled_from_k=cooled_from,
        n_cool=n_cool,
        t_cool_s=t_cool,
        min_tau_br_ratio_s=min_tau_br,
    )


def enumerate_double_schemes(graph: LevelGraph, params: SearchParams) -> list[CoolingScheme]:
    """Pairing search for schemes driven through two excited states."""
    candidates: list[CoolingScheme] = []
    seen_single = set()
    for g in range(1, params.g_max + 1):
        for scheme in enumerate_single_schemes(graph, params, g, _relax_half=True):
            key = scheme.dedup_key()
            if key not in seen_single:
                seen_single.add(key)
                candidates.append(scheme)

    # Group candidate subschemes by excited state and driven set; remember
    # which starting states admitted each.
    by_s1: dict[tuple[int, frozenset[int]], dict] = {}
    for scheme in candidates:
        lowers = frozenset(c.lower_id for c in scheme.driven)
        entry = by_s1.setdefault(
            (scheme.s1_id, lowers), {"scheme": scheme, "s0": set()}
        )
        entry["s0"].add(scheme.s0_id)

    keys = sorted(by_s1, key=lambda k: (k[0], tuple(sorted(k[1]))))
    results: list[CoolingScheme] = []
    seen = set()
    for i, key_a in enumerate(keys):
        for key_b in keys[i + 1:]:
            if key_a[0] == key_b[0]:
                continue  # same excited state
            if key_a[1] != key_b[1]:
                continue  # must cover the same lower states
            a = by_s1[key_a]
            b = by_s1[key_b]
            shared_s0 = a["s0"] & b["s0"]
            if not shared_s0:
                continue
            tau_a = float(graph.lifetimes[graph.index_of(key_a[0])])
            tau_b = float(graph.lifetimes[graph.index_of(key_b[0])])
            if max(tau_a, tau_b) / min(tau_a, tau_b) > params.double_lifetime_ratio_max:
                continue
            for s0 in sorted(shared_s0):
                figures = _double_figures(
                    graph, a["scheme"], b["scheme"], graph.index_of(s0), params
                )
                if not figures.viable():
                    continue
                scheme = CoolingScheme(
                    kind="double",
                    s1_id=(key_a[0], key_b[0]),
                    s0_ids=(s0,),
                    driven=a["scheme"].driven,
                    driven_b=b["scheme"].driven,
                    figures=figures,
                )
                k = scheme.dedup_key()
                if k not in seen:
                    seen.add(k)
                    results.append(scheme)
    results.sort(key=CoolingScheme.sort_key)
    return results


def assemble_double(
    graph: LevelGraph,
    s1_a: int,
    s1_b: int,
    s0_id: int,
    g: int,
    params: SearchParams,
) -> CoolingScheme:
    """Build one explicit two-excited-state scheme; lower sets must match."""
    a = assemble_single(graph, s1_a, s0_id, g, params)
    b = assemble_single(graph, s1_b, s0_id, g, params)
    lowers_a = {c.lower_id for c in a.driven}
    lowers_b = {c.lower_id for c in b.driven}
    if lowers_a != lowers_b:
        raise ValueError(
            f"excited states {s1_a} and {s1_b} do not decay to the same "
            f"lower states ({sorted(lowers_a ^ lowers_b)} differ)"
        )
    figures = _double_figures(graph, a, b, graph.index_of(s0_id), params)
    return CoolingScheme(
        kind="double",
        s1_id=(s1_a, s1_b),
        s0_ids=(s0_id,),
        driven=a.driven,
        driven_b=b.driven,
        figures=figures,
    )


def cycling_inputs(scheme: CoolingScheme, graph: LevelGraph):
    """Arrays for the stochastic cycling simulator: the full branching
    distribution of the scheme's excited state with the driven subset marked.

    Only defined for single schemes (the simulator models one excited state).
    """
    if scheme.kind != "single":
        raise ValueError("cycling simulation supports single-excited-state schemes")
    span = graph.out_span(graph.index_of(scheme.s1_id))
    brs = np.array(graph.edge_br[span], dtype=np.float64)
    lams = np.array(graph.edge_lambda[span], dtype=np.float64)
    driven_lowers = {c.lower_id for c in scheme.driven}
    driven = np.array(
        [int(graph.ids[l]) in driven_lowers for l in graph.edge_lower[span]], dtype=bool
    )
    return brs, driven, lams
