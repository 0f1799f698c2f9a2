"""Simulated-annealing search for small stabilizer decompositions.

The search space is r-subsets of a state catalog; the energy of a subset
is its least-squares residual against the target, so the coefficients are
always optimal and only the membership is annealed.  Chains are
independent, seeded from one master seed, and the first chain to reach the
residual tolerance short-circuits the rest.  A successful subset is
snapped to exact cyclotomic coefficients when possible; search output is a
candidate only and is always replayed through the independent verifiers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decomposition import Decomposition, best_fit, exact_coefficients
from .stabilizer import Catalog, TargetState

__all__ = ["AnnealConfig", "AnnealResult", "anneal_search"]


@dataclass(frozen=True)
class AnnealConfig:
    target: TargetState
    rank: int
    catalog: Catalog
    steps: int = 20_000
    chains: int = 32
    t_initial: float | None = None
    cooling: float = 0.995
    tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not 0.0 < self.cooling < 1.0:
            raise ValueError("cooling factor must lie in (0, 1)")
        if self.rank >= len(self.catalog):
            raise ValueError("rank must be smaller than the catalog")


@dataclass
class AnnealResult:
    subset: tuple[int, ...]
    residual: float
    success: bool
    decomposition: Decomposition | None
    chain_traces: list[dict]


class _VectorCache:
    """Catalog state vectors, eager for small catalogs, on demand for large."""

    def __init__(self, catalog: Catalog, eager_limit: int = 100_000):
        self._catalog = catalog
        if len(catalog) <= eager_limit:
            dim = catalog.p**catalog.n
            self._all = np.empty((len(catalog), dim), dtype=np.complex128)
            for i in range(len(catalog)):
                self._all[i] = catalog.get(i).complex_vector()
            self._lazy = None
        else:
            self._all = None
            self._lazy: dict[int, np.ndarray] = {}

    def __call__(self, i: int) -> np.ndarray:
        if self._all is not None:
            return self._all[i]
        v = self._lazy.get(i)
        if v is None:
            v = self._catalog.get(i).complex_vector()
            self._lazy[i] = v
        return v


def _residual(vecs: list[np.ndarray], target_vec: np.ndarray) -> float:
    A = np.column_stack(vecs)
    G = A.conj().T @ A
    b = A.conj().T @ target_vec
    try:
        c = np.linalg.solve(G, b)
    except np.linalg.LinAlgError:
        c, _, _, _ = np.linalg.lstsq(A, target_vec, rcond=None)
    return float(np.linalg.norm(A @ c - target_vec))


def _run_chain(cfg: AnnealConfig, vec_of, target_vec, rng, count):
    r = cfg.rank
    subset = [int(i) for i in rng.choice(count, size=r, replace=False)]
    members = set(subset)
    vecs = [vec_of(i) for i in subset]
    energy = _residual(vecs, target_vec)
    best_subset = tuple(subset)
    best_energy = energy
    trace = [energy]

    def propose():
        pos = int(rng.integers(r))
        while True:
            j = int(rng.integers(count))
            if j not in members:
                return pos, j

    if cfg.t_initial is not None:
        temp = cfg.t_initial
    else:
        # calibrate so the median uphill move is accepted with probability 1/2
        uphill = []
        for _ in range(100):
            pos, j = propose()
            held = vecs[pos]
            vecs[pos] = vec_of(j)
            delta = _residual(vecs, target_vec) - energy
            vecs[pos] = held
            if delta > 0:
                uphill.append(delta)
        temp = float(np.median(uphill)) / math.log(2) if uphill else 0.1

    accepted = 0
    steps_run = 0
    for _ in range(cfg.steps):
        steps_run += 1
        pos, j = propose()
        held_idx, held_vec = subset[pos], vecs[pos]
        vecs[pos] = vec_of(j)
        new_energy = _residual(vecs, target_vec)
        delta = new_energy - energy
        if delta <= 0 or (temp > 0 and rng.random() < math.exp(max(-delta / temp, -745.0))):
            subset[pos] = j
            members.discard(held_idx)
            members.add(j)
            energy = new_energy
            accepted += 1
            if energy < best_energy:
                best_energy = energy
                best_subset = tuple(subset)
                trace.append(energy)
                if best_energy <= cfg.tol:
                    break
        else:
            vecs[pos] = held_vec
        temp *= cfg.cooling
    return best_subset, best_energy, trace, accepted, steps_run


def anneal_search(cfg: AnnealConfig) -> AnnealResult:
    """Run independent annealing chains and report the best subset found.

    Deterministic given (config, seed, catalog); stops early once a chain
    reaches the residual tolerance.  The reported residual is recomputed
    with the least-squares fitter on the final subset.
    """
    catalog = cfg.catalog
    count = len(catalog)
    vec_of = _VectorCache(catalog)
    target_vec = cfg.target.complex_vector()
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.chains)

    best_subset: tuple[int, ...] | None = None
    best_energy = math.inf
    traces: list[dict] = []
    for c in range(cfg.chains):
        rng = np.random.default_rng(seeds[c])
        subset, energy, trace, accepted, steps_run = _run_chain(
            cfg, vec_of, target_vec, rng, count
        )
        traces.append(
            {
                "chain": c,
                "best_residual": energy,
                "accepted": accepted,
                "steps": steps_run,
                "trace": trace,
            }
        )
        if energy < best_energy:
            best_energy = energy
            best_subset = subset
        if best_energy <= cfg.tol:
            break

    subset = tuple(sorted(best_subset))
    states = [catalog.get(i) for i in subset]
    A = np.column_stack([vec_of(i) for i in subset])
    _, residual = best_fit(A, target_vec)
    success = residual <= cfg.tol

    decomposition = None
    if success:
        exact = exact_coefficients(states, cfg.target)
        if exact is not None:
            candidate = Decomposition(cfg.target, states, exact)
            if not candidate.verify_exact():
                decomposition = candidate
    return AnnealResult(
        subset=subset,
        residual=residual,
        success=success,
        decomposition=decomposition,
        chain_traces=traces,
    )
