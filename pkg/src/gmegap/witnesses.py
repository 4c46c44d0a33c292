"""Entanglement criteria: energy-gap witnesses, the Q density-matrix
inequalities, pure-state gme-concurrence and the relative-entropy criterion."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize
from scipy.stats import unitary_group

from .numeric import TOL
from .separability import KsepResult, OptimizerConfig, Partition, enumerate_partitions, ksep_energy
from .tensor import (
    DensityState,
    Operator,
    PureState,
    basis_state,
    kron,
    reduced_density_matrix,
    two_copy_matrix_element,
)
from .thermal import energy_expectation, vn_entropy


@dataclass
class DetectionVerdict:
    """Outcome of one criterion.

    ``direction`` is ``"below"`` when small values detect (energy, entropy) and
    ``"above"`` when large values detect (Q). ``detected`` requires the value to
    clear the threshold by more than ``margin``.
    """

    criterion: str
    value: float
    threshold: float
    k: int = 2
    direction: str = "below"
    caveat: Optional[str] = None
    margin: float = TOL.detection_margin
    extras: dict = field(default_factory=dict)

    @property
    def excess(self) -> float:
        """Signed distance past the threshold; positive means detected (before the margin)."""
        if self.direction == "below":
            return self.threshold - self.value
        return self.value - self.threshold

    @property
    def detected(self) -> bool:
        return self.excess > self.margin

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "value": self.value,
            "threshold": self.threshold,
            "detected": self.detected,
            "k": self.k,
            "caveat": self.caveat,
            **self.extras,
        }


def gap_witness(rho: DensityState, h: Operator, ksep: KsepResult) -> DetectionVerdict:
    value = energy_expectation(rho, h)
    return DetectionVerdict(
        criterion=f"gap-k{ksep.k}",
        value=value,
        threshold=ksep.energy,
        k=ksep.k,
        direction="below",
        caveat=ksep.caveat,
    )


# --- Q criteria -------------------------------------------------------------

def _levels(rho: DensityState) -> tuple[list[int], list[int]]:
    """Per-site low and high levels used in place of |0> and |1> (|0> and |d-1>)."""
    return [0] * rho.shape.n_sites, [d - 1 for d in rho.shape.local_dims]


def _digits(n: int, ones, lo, hi) -> tuple[int, ...]:
    return tuple(hi[i] if i in ones else lo[i] for i in range(n))


def _bipartition_firsts(n: int) -> list[tuple[int, ...]]:
    return [p.blocks[0] for p in enumerate_partitions(n, 2)]


def _neighbour_pairs(n: int, m: int):
    """Ordered pairs (alpha, beta) of m-subsets sharing exactly m-1 sites."""
    subsets = list(itertools.combinations(range(n), m))
    for a in subsets:
        for b in subsets:
            if len(set(a) & set(b)) == m - 1:
                yield a, b


def q0(rho: DensityState, method: str = "diagonal") -> float:
    n = rho.shape.n_sites
    lo, hi = _levels(rho)
    dims = rho.shape.local_dims
    m = rho.matrix
    idx = lambda digits: int(np.ravel_multi_index(digits, dims))  # noqa: E731
    coherence = abs(m[idx(lo), idx(hi)])
    total = 0.0
    if method == "diagonal":
        for first in _bipartition_firsts(n):
            a = idx(_digits(n, set(first), lo, hi))
            b = idx(_digits(n, set(range(n)) - set(first), lo, hi))
            total += np.sqrt(max(m[a, a].real, 0.0) * max(m[b, b].real, 0.0))
    elif method == "two-copy":
        both = kron(basis_state(rho.shape, lo), basis_state(rho.shape, hi))
        for first in _bipartition_firsts(n):
            total += np.sqrt(two_copy_matrix_element(rho, both, both, first))
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(coherence - total)


def qm(rho: DensityState, m: int, method: str = "diagonal") -> float:
    n = rho.shape.n_sites
    if not 1 <= m <= n / 2:
        raise ValueError(f"m={m} outside 1..{n // 2}")
    lo, hi = _levels(rho)
    dims = rho.shape.local_dims
    mat = rho.matrix
    idx = lambda ones: int(np.ravel_multi_index(_digits(n, set(ones), lo, hi), dims))  # noqa: E731
    total = 0.0
    for a, b in _neighbour_pairs(n, m):
        total += abs(mat[idx(a), idx(b)])
        if method == "diagonal":
            # swapping alpha between copies maps |d_a>|d_b> to |d_{a&b}>|d_{a|b}>
            lo_i, hi_i = idx(set(a) & set(b)), idx(set(a) | set(b))
            total -= np.sqrt(max(mat[lo_i, lo_i].real, 0.0) * max(mat[hi_i, hi_i].real, 0.0))
        elif method == "two-copy":
            both = kron(
                basis_state(rho.shape, _digits(n, set(a), lo, hi)),
                basis_state(rho.shape, _digits(n, set(b), lo, hi)),
            )
            total -= np.sqrt(two_copy_matrix_element(rho, both, both, a))
        else:
            raise ValueError(f"unknown method {method!r}")
    diag = sum(mat[idx(a), idx(a)].real for a in itertools.combinations(range(n), m))
    return float(total - m * (n - m - 1) * diag)


def q_values(rho: DensityState, method: str = "diagonal") -> dict[str, float]:
    n = rho.shape.n_sites
    out = {"Q0": q0(rho, method)}
    for m in range(1, n // 2 + 1):
        out[f"Q{m}"] = qm(rho, m, method)
    return out


def random_local_unitary(shape, rng: np.random.Generator) -> np.ndarray:
    u = np.ones((1, 1), dtype=complex)
    for d in shape.local_dims:
        u = np.kron(u, unitary_group.rvs(d, random_state=rng))
    return u


def q_witness(rho: DensityState, lu_trials: int = 0, seed: int = 0) -> DetectionVerdict:
    """Combined Q criteria: detected if any Q_i > 0.

    With ``lu_trials > 0`` the state is also rotated by seeded random local
    unitaries and the largest value is kept; local rotations cannot create GME,
    so detection stays sound.
    """
    best = q_values(rho)
    rng = np.random.default_rng(seed)
    for _ in range(lu_trials):
        u = random_local_unitary(rho.shape, rng)
        m = u @ rho.matrix @ u.conj().T
        vals = q_values(DensityState(0.5 * (m + m.conj().T), rho.shape))
        if max(vals.values()) > max(best.values()):
            best = vals
    name, value = max(best.items(), key=lambda kv: kv[1])
    return DetectionVerdict(
        criterion="Q",
        value=value,
        threshold=0.0,
        k=2,
        direction="above",
        extras={"best": name, **best},
    )


# --- gme-concurrence --------------------------------------------------------

@dataclass(frozen=True)
class GmeConcurrenceReport:
    value: float
    minimizing_bipartition: Partition


def gme_concurrence_pure(psi: PureState) -> GmeConcurrenceReport:
    n = psi.shape.n_sites
    if n < 2:
        raise ValueError("gme-concurrence needs at least two sites")
    best = None
    for p in enumerate_partitions(n, 2):
        r = reduced_density_matrix(psi, p.blocks[0])
        purity = float(np.real(np.vdot(r, r)))
        c = float(np.sqrt(max(0.0, 2.0 * (1.0 - purity))))
        if best is None or c < best.value:
            best = GmeConcurrenceReport(c, p)
    return best


# --- relative entropy criterion --------------------------------------------

def relative_entropy(rho: DensityState, sigma: DensityState) -> float:
    """S(rho|sigma) in nats; +inf when rho is not supported inside sigma."""
    if rho.shape != sigma.shape:
        raise ValueError("shape mismatch")
    lam, u = np.linalg.eigh(rho.matrix)
    mu, v = np.linalg.eigh(sigma.matrix)
    lam = np.where(lam > TOL.zero_eigenvalue, lam, 0.0)
    overlap = np.abs(u.conj().T @ v) ** 2  # overlap[i, j] = |<r_i|s_j>|^2
    weight = lam @ overlap  # weight on each sigma eigenvector
    zero_mu = mu <= TOL.zero_eigenvalue
    if np.any(weight[zero_mu] > 1e-12):
        return float("inf")
    nz = lam > 0
    s_rho = float((lam[nz] * np.log(lam[nz])).sum())
    cross = float((weight[~zero_mu] * np.log(mu[~zero_mu])).sum())
    return s_rho - cross


class _MixtureObjective:
    """-<psi| ln omega |psi> for omega a weighted mixture of product states.

    Components are dealt round-robin over the k-partitions; parameters are the
    weight logits followed, per partition group, by the real and imaginary
    parts of every block factor.
    """

    def __init__(self, psi: PureState, parts: list[Partition], n_components: int):
        self.psi = psi.amplitudes
        shape = psi.shape
        self.n = n_components
        self.groups = []  # (component indices, block dims, gather index)
        for g, p in enumerate(parts):
            members = np.arange(g, n_components, len(parts))
            if members.size == 0:
                continue
            order = p.site_order
            dims = [shape.local_dims[s] for s in order]
            gather = np.arange(shape.total_dim).reshape(dims).transpose(np.argsort(order)).ravel()
            self.groups.append((members, [shape.sub(b).total_dim for b in p.blocks], gather))
        self.size = n_components + sum(2 * len(m) * sum(bd) for m, bd, _ in self.groups)

    def unpack(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        logits = x[: self.n]
        w = np.exp(logits - logits.max())
        w /= w.sum()
        vecs = np.empty((self.n, self.psi.size), dtype=complex)
        pos = self.n
        for members, bd, gather in self.groups:
            c = len(members)
            vec = np.ones((c, 1), dtype=complex)
            for d in bd:
                raw = x[pos:pos + 2 * c * d].reshape(2, c, d)
                pos += 2 * c * d
                f = raw[0] + 1j * raw[1]
                f = f / np.maximum(np.linalg.norm(f, axis=1, keepdims=True), 1e-300)
                vec = (vec[:, :, None] * f[:, None, :]).reshape(c, -1)
            vecs[members] = vec[:, gather]
        return w, vecs

    def omega(self, x: np.ndarray) -> np.ndarray:
        w, vecs = self.unpack(x)
        return (vecs.T * w) @ vecs.conj()

    def __call__(self, x: np.ndarray) -> float:
        mu, v = np.linalg.eigh(self.omega(x))
        ov = np.abs(v.conj().T @ self.psi) ** 2
        return float(-(ov * np.log(np.maximum(mu, 1e-300))).sum())


def entropy_threshold_ksep(
    ground: PureState,
    k: int,
    cfg: OptimizerConfig = OptimizerConfig(),
    n_components: int = 32,
    restarts: int = 4,
    maxfev: int = 20_000,
) -> float:
    """Heuristic min of S(|E0><E0| | omega) over k-separable mixtures omega.

    The value is an upper bound on the true minimum, so detections against it
    are indicative only.
    """
    if k == 1:
        return 0.0
    n = ground.shape.n_sites
    proj = Operator(-np.outer(ground.amplitudes, ground.amplitudes.conj()), ground.shape)
    best_fidelity = -ksep_energy(proj, k, OptimizerConfig(restarts=min(cfg.restarts, 10), seed=cfg.seed)).energy
    if best_fidelity >= 1 - 1e-12:
        return 0.0

    obj = _MixtureObjective(ground, enumerate_partitions(n, k), n_components)
    best = np.inf
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, k, r]))
        x0 = rng.normal(size=obj.size)
        x0[:n_components] = 0.0
        res = minimize(obj, x0, method="Powell", options={"maxfev": maxfev, "xtol": 1e-6, "ftol": 1e-10})
        best = min(best, float(res.fun))
    return best


def entropy_witness(
    sigma_thermal: DensityState, ground: PureState, k: int, threshold: float
) -> DetectionVerdict:
    if sigma_thermal.shape != ground.shape:
        raise ValueError("thermal state and ground state live on different systems")
    s = vn_entropy(sigma_thermal)
    rel = relative_entropy(ground.density(), sigma_thermal)
    return DetectionVerdict(
        criterion=f"entropy-k{k}",
        value=s,
        threshold=threshold,
        k=k,
        direction="below",
        caveat="heuristic threshold (upper bound on the k-separable minimum)",
        extras={"relative_entropy_ground": rel},
    )
