"""Shared fixtures: toy datasets, random graph generation, real-data lookup.

Dataset-bound tests (NH golden numbers, YO / OH+ spot checks) need the real
ExoMol files on disk; point COOLCYCLE_DATA_DIR at a directory containing
them (see README) or drop them under tests/data/. Those tests skip cleanly
when the files are absent.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from coolcycle.exomol import LevelDataset, RawState, RawTransition, StatesSchema
from coolcycle.graph import build_graph
from coolcycle.search import SearchParams

DATA_DIR = Path(os.environ.get("COOLCYCLE_DATA_DIR", Path(__file__).parent / "data"))

NH_SCHEMA = StatesSchema.from_header("id,energy,gtot,J,N,F,parity,v,state")


def dataset_file(*names: str) -> Path:
    """First existing file among ``names`` in the data dir, else skip."""
    for name in names:
        path = DATA_DIR / name
        if path.exists():
            return path
    pytest.skip(f"real dataset file not found: {names[0]} (set COOLCYCLE_DATA_DIR)")


def nh_paths() -> tuple[Path, Path]:
    states = dataset_file("14N-1H__MoLLIST.states.bz2", "14N-1H__MoLLIST.states")
    trans = dataset_file("14N-1H__MoLLIST.trans.bz2", "14N-1H__MoLLIST.trans")
    return states, trans


def two_level_dataset() -> LevelDataset:
    states = [RawState(1, 0.0), RawState(2, 20000.0)]
    trans = [RawTransition(2, 1, 1.0e7)]
    return LevelDataset.from_records(states, trans)


@pytest.fixture
def two_level_graph():
    return build_graph(two_level_dataset())


def star_dataset(branch_a: dict[int, float], energies: dict[int, float]) -> LevelDataset:
    """One excited state (highest energy) decaying to every other state."""
    s1 = max(energies, key=lambda k: energies[k])
    states = [RawState(i, e) for i, e in sorted(energies.items())]
    trans = [RawTransition(s1, lo, a) for lo, a in sorted(branch_a.items())]
    return LevelDataset.from_records(states, trans)


def default_params(**overrides) -> SearchParams:
    base = dict(g_max=4, lambda_min_nm=100.0, lambda_max_nm=1.0e6, mass_u=15.0)
    base.update(overrides)
    return SearchParams(**base)


def random_dataset(seed: int, max_states: int = 30, max_edges: int = 100) -> LevelDataset:
    """Random toy line list: ids non-contiguous, energies ascending with id."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, max_states + 1))
    ids = np.cumsum(rng.integers(1, 4, size=n)).astype(int)
    energies = np.concatenate([[0.0], np.sort(rng.uniform(5.0, 40000.0, n - 1))])
    energies += np.arange(n) * 1e-6  # keep strictly increasing
    states = [RawState(int(i), float(e)) for i, e in zip(ids, energies)]

    m_target = int(rng.integers(3, max_edges + 1))
    pairs = set()
    while len(pairs) < m_target:
        j = int(rng.integers(1, n))
        i = int(rng.integers(0, j))
        pairs.add((j, i))
        if len(pairs) >= n * (n - 1) // 2:
            break
    trans = [
        RawTransition(int(ids[j]), int(ids[i]), float(10.0 ** rng.uniform(2.0, 7.5)))
        for j, i in sorted(pairs)
    ]
    return LevelDataset.from_records(states, trans)
