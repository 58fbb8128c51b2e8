"""Stochastic photon-cycling simulator, used as an independent test oracle.

A molecule sits in the scheme's excited state and repeatedly decays: each
scatter draws one channel from the state's full branching distribution. A
decay onto an undriven channel is an absorbing loss (no recapture); decays
onto driven channels are followed by instantaneous re-excitation.

This module deliberately implements nothing in closed form and must not
import the analytic rate functions; tests compare its estimates against
them from the outside.

Randomness: numpy's PCG64 via ``default_rng(seed)``. Draws are consumed
step-major, one uniform per still-bright molecule per scatter, so every run
with the same seed is bit-reproducible. :func:`split` partitions trials
across workers; worker ``i`` gets the 64-bit seed drawn from
``SeedSequence(seed).spawn(k)[i]``, so partitioned runs are reproducible
too (though not draw-for-draw identical to the serial run).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .constants import PLANCK_J_S


@dataclass(frozen=True)
class CyclingRun:
    """One simulation setup over a single excited state's decay channels.

    ``branching_ratios`` is the full outgoing distribution (driven and
    undriven together, summing to one); ``driven`` marks the channels
    addressed by lasers.
    """

    branching_ratios: np.ndarray
    driven: np.ndarray
    wavelengths_nm: np.ndarray
    trials: int
    seed: int
    max_scatters: int

    def __post_init__(self):
        br = np.asarray(self.branching_ratios, dtype=np.float64)
        driven = np.asarray(self.driven, dtype=bool)
        lam = np.asarray(self.wavelengths_nm, dtype=np.float64)
        if br.ndim != 1 or br.size == 0:
            raise ValueError("branching_ratios must be a non-empty 1-d array")
        if driven.shape != br.shape or lam.shape != br.shape:
            raise ValueError("driven mask and wavelengths must match branching_ratios")
        if np.any(br <= 0) or np.any(lam <= 0):
            raise ValueError("branching ratios and wavelengths must be positive")
        if abs(float(br.sum()) - 1.0) > 1e-6:
            raise ValueError("branching ratios must cover the full distribution")
        if self.trials < 1 or self.max_scatters < 1:
            raise ValueError("trials and max_scatters must be >= 1")
        object.__setattr__(self, "branching_ratios", br)
        object.__setattr__(self, "driven", driven)
        object.__setattr__(self, "wavelengths_nm", lam)


def split(run: CyclingRun, workers: int) -> list[CyclingRun]:
    """Partition a run's trials across workers with derived child seeds."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    children = np.random.SeedSequence(run.seed).spawn(workers)
    base, extra = divmod(run.trials, workers)
    out = []
    for i, child in enumerate(children):
        n = base + (1 if i < extra else 0)
        if n:
            seed = int(child.generate_state(1, dtype=np.uint64)[0])
            out.append(replace(run, trials=n, seed=seed))
    return out


def _draw_channels(rng, cum: np.ndarray, count: int) -> np.ndarray:
    draws = rng.random(count)
    return np.minimum(np.searchsorted(cum, draws, side="right"), cum.size - 1)


def simulate_survival(run: CyclingRun) -> np.ndarray:
    """Empirical bright-state survival fraction after 0..max_scatters scatters."""
    rng = np.random.default_rng(run.seed)
    cum = np.cumsum(run.branching_ratios)
    survival = np.empty(run.max_scatters + 1, dtype=np.float64)
    survival[0] = 1.0
    alive = run.trials
    for n in range(1, run.max_scatters + 1):
        if alive:
            channel = _draw_channels(rng, cum, alive)
            alive = int(np.count_nonzero(run.driven[channel]))
        survival[n] = alive / run.trials
    return survival


def estimate_mean_photon_momentum(run: CyclingRun) -> float:
    """Empirical mean momentum (kg m/s) of photons emitted on driven channels.

    Molecules cycle until loss or the scatter cap; only driven-channel
    emissions contribute, mirroring the momentum budget of the cooling push.
    """
    rng = np.random.default_rng(run.seed)
    cum = np.cumsum(run.branching_ratios)
    inv_lambda_m = 1.0 / (run.wavelengths_nm * 1e-9)
    total_inv_lambda = 0.0
    emitted = 0
    alive = run.trials
    for _ in range(run.max_scatters):
        if not alive:
            break
        channel = _draw_channels(rng, cum, alive)
        bright = run.driven[channel]
        total_inv_lambda += float(inv_lambda_m[channel[bright]].sum())
        alive = int(np.count_nonzero(bright))
        emitted += alive
    if emitted == 0:
        raise ValueError("no driven emissions observed; increase trials or scatters")
    return PLANCK_J_S * total_inv_lambda / emitted
