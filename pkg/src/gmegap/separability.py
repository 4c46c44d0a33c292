"""Minimum energy over k-separable pure states by alternating eigenvector updates.

For a fixed k-partition the energy of a product state is minimised one block
at a time: with all other factors frozen, the best factor for a block is the
ground eigenvector of the effective operator obtained by contracting the
Hamiltonian with the frozen factors. Each update is an exact sub-minimisation,
so the energy within one restart never increases. Multiple Haar-random
restarts per partition hedge against local minima; the result is an upper
bound on the true k-separable minimum.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .numeric import TOL
from .tensor import Operator, PureState, SystemShape, eig_hermitian

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Partition:
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = [tuple(sorted(int(s) for s in b)) for b in self.blocks]
        if any(not b for b in blocks):
            raise ValueError("partition blocks must be non-empty")
        flat = [s for b in blocks for s in b]
        if len(flat) != len(set(flat)):
            raise ValueError(f"partition blocks overlap: {blocks}")
        if sorted(flat) != list(range(len(flat))):
            raise ValueError(f"blocks {blocks} do not cover sites 0..{len(flat) - 1}")
        object.__setattr__(self, "blocks", tuple(sorted(blocks, key=lambda b: b[0])))

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def n_sites(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def site_order(self) -> list[int]:
        return [s for b in self.blocks for s in b]

    def refines(self, coarser: "Partition") -> bool:
        """True if every block of ``self`` sits inside a block of ``coarser``."""
        owner = {s: i for i, b in enumerate(coarser.blocks) for s in b}
        return all(len({owner[s] for s in b}) == 1 for b in self.blocks)

    def __str__(self) -> str:
        return "|".join("".join(str(s) for s in b) if max(b) < 10 else ",".join(map(str, b)) for b in self.blocks)


def _restricted_growth(n: int, k: int) -> Iterator[list[int]]:
    """Restricted growth strings of length n using exactly k labels."""
    a = [0] * n

    def rec(i: int, used: int) -> Iterator[list[int]]:
        remaining = n - i
        if remaining < k - used:
            return
        if i == n:
            if used == k:
                yield list(a)
            return
        for lab in range(min(used + 1, k)):
            a[i] = lab
            yield from rec(i + 1, max(used, lab + 1))

    if n == 0:
        return
    yield from rec(0, 0)


def enumerate_partitions(n: int, k: int) -> list[Partition]:
    """All set partitions of sites 0..n-1 into exactly k non-empty blocks."""
    if not 1 <= k <= n:
        raise ValueError(f"block count k={k} out of range for n={n}")
    out = []
    for rgs in _restricted_growth(n, k):
        blocks = [[] for _ in range(k)]
        for site, lab in enumerate(rgs):
            blocks[lab].append(site)
        out.append(Partition(tuple(tuple(b) for b in blocks)))
    return out


@dataclass(frozen=True, eq=False)
class ProductState:
    partition: Partition
    factors: tuple[np.ndarray, ...]
    shape: SystemShape

    def __post_init__(self):
        if len(self.factors) != self.partition.k:
            raise ValueError("one factor per block required")
        fs = []
        for b, f in zip(self.partition.blocks, self.factors):
            f = np.asarray(f, dtype=complex).ravel()
            if f.size != self.shape.sub(b).total_dim:
                raise ValueError(f"factor for block {b} has wrong dimension {f.size}")
            if abs(np.linalg.norm(f) - 1) > TOL.norm:
                raise ValueError(f"factor for block {b} is not normalized")
            fs.append(f)
        object.__setattr__(self, "factors", tuple(fs))

    def assemble(self) -> PureState:
        vec = np.ones(1, dtype=complex)
        for f in self.factors:
            vec = np.kron(vec, f)
        order = self.partition.site_order
        dims_in_order = [self.shape.local_dims[s] for s in order]
        t = np.transpose(vec.reshape(dims_in_order), np.argsort(order))
        return PureState.normalized(t.ravel(), self.shape)

    def coarsen(self, coarser: Partition) -> "ProductState":
        """Same global state expressed on a coarser partition."""
        if not self.partition.refines(coarser):
            raise ValueError(f"{self.partition} does not refine {coarser}")
        factors = []
        for cb in coarser.blocks:
            inner = [(b, f) for b, f in zip(self.partition.blocks, self.factors) if b[0] in cb]
            vec = np.ones(1, dtype=complex)
            order: list[int] = []
            for b, f in inner:
                vec = np.kron(vec, f)
                order.extend(b)
            local = [cb.index(s) for s in order]
            dims = [self.shape.local_dims[s] for s in order]
            t = np.transpose(vec.reshape(dims), np.argsort(local))
            factors.append(t.ravel())
        return ProductState(coarser, tuple(factors), self.shape)


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 50
    max_sweeps: int = 1000
    rel_energy_tol: float = 1e-10
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if not self.rel_energy_tol > 0:
            raise ValueError("rel_energy_tol must be > 0")


@dataclass
class PartitionRun:
    partition: Partition
    energy: float
    state: ProductState
    converged: bool
    restart_energies: list[float]
    histories: list[list[float]] = field(default_factory=list, repr=False)

    @property
    def consensus(self) -> float:
        e = np.asarray(self.restart_energies)
        return float(np.mean(e <= self.energy + TOL.consensus_energy))


@dataclass
class KsepResult:
    k: int
    energy: float
    argmin: ProductState
    per_partition: dict[Partition, float]
    converged: bool
    consensus: float = 1.0
    corroborated: bool = False
    runs: dict[Partition, PartitionRun] = field(default_factory=dict, repr=False)

    @property
    def caveat(self) -> Optional[str]:
        if self.corroborated or self.consensus >= TOL.consensus_fraction:
            return None
        return f"heuristic threshold: {self.consensus:.0%} restart consensus"


class _BlockContractor:
    """Effective single-block operators of a Hamiltonian for one partition, batched over restarts."""

    def __init__(self, h: Operator, partition: Partition):
        dims = h.shape.local_dims
        n = len(dims)
        order = partition.site_order
        self.block_dims = [int(np.prod([dims[s] for s in b])) for b in partition.blocks]
        k = len(self.block_dims)
        t = h.matrix.reshape(dims + dims)
        t = np.transpose(t, order + [n + s for s in order]).reshape(self.block_dims * 2)
        self.per_block = []
        for j in range(k):
            others = [i for i in range(k) if i != j]
            tj = np.transpose(t, others + [j] + [k + i for i in others] + [k + j])
            r = int(np.prod([self.block_dims[i] for i in others]))
            dj = self.block_dims[j]
            self.per_block.append(np.ascontiguousarray(tj.reshape(r, dj, r, dj)))

    def effective(self, j: int, factors: Sequence[np.ndarray]) -> np.ndarray:
        """Stack of effective operators, one per row of the (batch, dim) factor arrays."""
        batch = factors[0].shape[0]
        phi = np.ones((batch, 1), dtype=complex)
        for i, f in enumerate(factors):
            if i != j:
                phi = (phi[:, :, None] * f[:, None, :]).reshape(batch, -1)
        hj = self.per_block[j]
        r, dj = hj.shape[0], hj.shape[1]
        tmp = (phi.conj() @ hj.reshape(r, -1)).reshape(batch, dj, r, dj)
        heff = np.einsum("bisj,bs->bij", tmp, phi)
        return 0.5 * (heff + np.conj(np.swapaxes(heff, 1, 2)))


def _haar_vector(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


@dataclass
class SeesawRuns:
    energies: np.ndarray
    factors: list[np.ndarray]
    converged: np.ndarray
    history: list[list[float]]


def _seesaw(con: _BlockContractor, factors: list[np.ndarray], cfg: OptimizerConfig) -> SeesawRuns:
    """Alternating updates for a batch of independent starts.

    Each start is frozen once its own sweep-to-sweep change drops below the
    tolerance, so its result does not depend on the rest of the batch.
    """
    k = len(factors)
    batch = factors[0].shape[0]
    factors = [f.copy() for f in factors]
    energy = np.full(batch, np.inf)
    converged = np.zeros(batch, dtype=bool)
    history: list[list[float]] = [[] for _ in range(batch)]
    active = np.arange(batch)
    for _ in range(cfg.max_sweeps):
        sub = [f[active] for f in factors]
        for j in range(k):
            w, v = np.linalg.eigh(con.effective(j, sub))
            # first column: deterministic tie-break within degenerate blocks
            vec = v[:, :, 0]
            sub[j] = vec / np.linalg.norm(vec, axis=1, keepdims=True)
            e = w[:, 0]
        for f, s in zip(factors, sub):
            f[active] = s
        for idx, val in zip(active, e):
            history[idx].append(float(val))
        done = np.abs(energy[active] - e) <= cfg.rel_energy_tol * np.maximum(1.0, np.abs(e))
        energy[active] = e
        converged[active[done]] = True
        active = active[~done]
        if active.size == 0:
            break
    return SeesawRuns(energy, factors, converged, history)


def _item_rng(cfg: OptimizerConfig, k: int, pidx: int, restart: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, k, pidx, restart]))


def _optimize_partition(
    h: Operator,
    partition: Partition,
    cfg: OptimizerConfig,
    pidx: int = 0,
    warm: Optional[ProductState] = None,
) -> PartitionRun:
    con = _BlockContractor(h, partition)
    starts: list[list[np.ndarray]] = []
    for r in range(cfg.restarts):
        rng = _item_rng(cfg, partition.k, pidx, r)
        starts.append([_haar_vector(rng, d) for d in con.block_dims])
    if warm is not None:
        starts.append(list(warm.coarsen(partition).factors))
    stacked = [np.array([s[j] for s in starts]) for j in range(partition.k)]
    runs = _seesaw(con, stacked, cfg)
    best = int(np.argmin(runs.energies))
    state = ProductState(partition, tuple(f[best] for f in runs.factors), h.shape)
    # report the expectation of the assembled state, not the last eigenvalue
    psi = state.assemble().amplitudes
    energy = float(np.vdot(psi, h.matrix @ psi).real)
    restart_energies = [float(e) for e in runs.energies[: cfg.restarts]]
    return PartitionRun(partition, energy, state, bool(runs.converged[best]), restart_energies, runs.history)


def min_energy_for_partition(
    h: Operator, partition: Partition, cfg: OptimizerConfig = OptimizerConfig()
) -> tuple[float, ProductState]:
    if not h.is_hermitian():
        raise ValueError("Hamiltonian must be Hermitian")
    if partition.n_sites != h.shape.n_sites:
        raise ValueError(f"partition covers {partition.n_sites} sites, operator has {h.shape.n_sites}")
    run = _optimize_partition(h, partition, cfg)
    if not run.converged:
        log.warning("see-saw did not converge for partition %s", partition)
    return run.energy, run.state


def ksep_energy(
    h: Operator,
    k: int,
    cfg: OptimizerConfig = OptimizerConfig(),
    warm_start: Optional[ProductState] = None,
) -> KsepResult:
    """Estimate of the minimum energy over k-separable states.

    ``warm_start`` is an optional product state on a finer partition; it seeds
    one extra run for every partition it refines, which makes the estimate no
    larger than the warm start's own energy.
    """
    if not h.is_hermitian():
        raise ValueError("Hamiltonian must be Hermitian")
    n = h.shape.n_sites
    parts = enumerate_partitions(n, k)

    def work(item):
        pidx, p = item
        warm = warm_start if warm_start is not None and warm_start.partition.refines(p) else None
        return _optimize_partition(h, p, cfg, pidx, warm)

    if cfg.workers > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            runs = list(ex.map(work, enumerate(parts)))
    else:
        runs = [work(item) for item in enumerate(parts)]

    best = min(runs, key=lambda r: r.energy)
    return KsepResult(
        k=k,
        energy=best.energy,
        argmin=best.state,
        per_partition={r.partition: r.energy for r in runs},
        converged=all(r.converged for r in runs),
        consensus=best.consensus,
        runs={r.partition: r for r in runs},
    )


def ksep_chain(
    h: Operator, levels: Optional[Sequence[int]] = None, cfg: OptimizerConfig = OptimizerConfig()
) -> dict[int, KsepResult]:
    """k-separable minima for several levels, finest first, each warm-started from the next finer level.

    Warm starting makes the estimates obey E_2 <= E_3 <= ... <= E_n by construction.
    """
    n = h.shape.n_sites
    wanted = sorted(set(levels if levels is not None else range(1, n + 1)))
    if any(not 1 <= k <= n for k in wanted):
        raise ValueError(f"levels {wanted} out of range for n={n}")
    out: dict[int, KsepResult] = {}
    warm = None
    for k in range(max(wanted), min(wanted) - 1, -1):
        res = ksep_energy(h, k, cfg, warm_start=warm)
        warm = res.argmin
        if k in wanted:
            out[k] = res
    return dict(sorted(out.items()))


def entanglement_gap(h: Operator, k: int, cfg: OptimizerConfig = OptimizerConfig()) -> float:
    e0 = eig_hermitian(h).ground_energy
    return gap_from_energies(ksep_energy(h, k, cfg).energy, e0)


def gap_from_energies(e_ksep: float, e0: float) -> float:
    gap = e_ksep - e0
    return 0.0 if gap < TOL.gap_clamp else float(gap)


def max_energy_variant(h: Operator, k: int, cfg: OptimizerConfig = OptimizerConfig()) -> KsepResult:
    """Maximum energy over k-separable states (top eigenvector in each update)."""
    res = ksep_energy(-h, k, cfg)
    res.energy = -res.energy
    res.per_partition = {p: -e for p, e in res.per_partition.items()}
    for run in res.runs.values():
        run.energy = -run.energy
        run.restart_energies = [-e for e in run.restart_energies]
    return res


def random_product_min(h: Operator, partition: Partition, n_samples: int, seed: int = 0, batch: int = 20000) -> float:
    """Lowest energy among Haar-random product states on ``partition`` (sampling bound)."""
    rng = np.random.default_rng(seed)
    order = partition.site_order
    n = h.shape.n_sites
    dims = h.shape.local_dims
    bdims = [int(np.prod([dims[s] for s in b])) for b in partition.blocks]
    t = np.transpose(h.matrix.reshape(dims + dims), order + [n + s for s in order])
    hm = t.reshape(h.dim, h.dim)
    best = np.inf
    done = 0
    while done < n_samples:
        m = min(batch, n_samples - done)
        vec = np.ones((m, 1), dtype=complex)
        for d in bdims:
            f = rng.normal(size=(m, d)) + 1j * rng.normal(size=(m, d))
            f /= np.linalg.norm(f, axis=1, keepdims=True)
            vec = (vec[:, :, None] * f[:, None, :]).reshape(m, -1)
        e = np.einsum("mi,ij,mj->m", vec.conj(), hm, vec).real
        best = min(best, float(e.min()))
        done += m
    return best


def corroborate(h: Operator, result: KsepResult, n_samples: int = 100_000, seed: int = 0) -> KsepResult:
    """Mark ``result`` corroborated if no random product state (n <= 3) beats it."""
    if h.shape.n_sites > 3:
        return result
    ok = all(
        result.per_partition[p] <= random_product_min(h, p, n_samples, seed) + 1e-6 for p in result.per_partition
    )
    result.corroborated = ok
    return result
