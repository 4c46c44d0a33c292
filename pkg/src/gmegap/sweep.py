"""Parameter sweeps over (h, gamma, kT, ...) with per-point verdicts from every criterion."""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import __version__
from .models import (
    HeisenbergParams,
    Spin1ChainParams,
    heisenberg_hamiltonian,
    make_lattice,
    spin1_chain_hamiltonian,
)
from .separability import OptimizerConfig, gap_from_energies, ksep_chain
from .tensor import Operator, eig_hermitian
from .thermal import thermal_state
from .witnesses import (
    DetectionVerdict,
    entropy_threshold_ksep,
    entropy_witness,
    gap_witness,
    gme_concurrence_pure,
    q_witness,
)

CRITERION_RE = re.compile(r"^(gap-k(?P<gap>\d+)|Q|concurrence|entropy(-k(?P<ent>\d+))?)$")


class ConfigError(ValueError):
    """Invalid sweep configuration; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LatticeSpec(_Strict):
    kind: Literal["chain", "square"] = "square"
    dims: list[Annotated[int, Field(gt=0)]] = [2, 2]
    boundary: Literal["open", "periodic"] = "open"


class HeisenbergModel(_Strict):
    kind: Literal["heisenberg"] = "heisenberg"
    J: float = 1.0
    gamma: float = 0.0
    delta: float = 1.0
    h: float = 0.0
    lattice: LatticeSpec = LatticeSpec()

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.lattice.dims))

    def hamiltonian(self, **overrides) -> Operator:
        p = HeisenbergParams(**{**{"J": self.J, "gamma": self.gamma, "delta": self.delta, "h": self.h}, **overrides})
        lat = make_lattice(self.lattice.kind, self.lattice.dims, self.lattice.boundary)
        return heisenberg_hamiltonian(lat, p)


class Spin1ChainModel(_Strict):
    kind: Literal["spin1-chain"] = "spin1-chain"
    n: int = Field(3, ge=2)
    beta: float = 1.0
    h: float = 0.0
    boundary: Literal["open", "periodic"] = "open"

    @property
    def n_sites(self) -> int:
        return self.n

    def hamiltonian(self, **overrides) -> Operator:
        p = {"n": self.n, "beta": self.beta, "h": self.h, "boundary": self.boundary, **overrides}
        return spin1_chain_hamiltonian(Spin1ChainParams(**p))


SWEEPABLE = {"heisenberg": {"J", "gamma", "delta", "h", "kT"}, "spin1-chain": {"beta", "h", "kT"}}


class Axis(_Strict):
    name: str
    min: float
    max: float
    steps: int = Field(ge=1)

    @model_validator(mode="after")
    def _ordered(self):
        if self.max < self.min:
            raise ValueError("max must not be below min")
        return self


class OptimizerSpec(_Strict):
    restarts: int = Field(50, ge=1)
    max_sweeps: int = Field(1000, ge=1)
    rel_energy_tol: float = Field(1e-10, gt=0)
    seed: int = Field(0, ge=0)


class ThermalSpec(_Strict):
    epsilon: float = Field(0.01, gt=0, description="smallest kT on a swept kT axis")
    include_zero: bool = Field(False, description="prepend an exact kT = 0 point to a swept kT axis")
    kT: Optional[float] = Field(None, ge=0, description="fixed kT when kT is not swept; null means kT = 0")


class OutputSpec(_Strict):
    path: Optional[str] = None
    format: Literal["csv", "json"] = "csv"


class SweepConfig(_Strict):
    model: Annotated[Union[HeisenbergModel, Spin1ChainModel], Field(discriminator="kind")]
    axes: list[Axis] = Field(min_length=1, max_length=2)
    criteria: list[str] = ["gap-k2"]
    optimizer: OptimizerSpec = OptimizerSpec()
    thermal: ThermalSpec = ThermalSpec()
    output: OutputSpec = OutputSpec()
    q_lu_trials: Optional[int] = Field(None, ge=0, description="local-unitary trials for Q; default 0 for qubits, 20 otherwise")
    entropy_components: int = Field(32, ge=1)
    entropy_restarts: int = Field(4, ge=1)
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _consistent(self):
        allowed = SWEEPABLE[self.model.kind]
        names = [a.name for a in self.axes]
        for i, name in enumerate(names):
            if name not in allowed:
                raise ConfigError(f"unknown parameter {name!r} for {self.model.kind}; allowed {sorted(allowed)}", f"axes.{i}.name")
        if len(set(names)) != len(names):
            raise ConfigError("axis names must be distinct", "axes")
        n = self.model.n_sites
        for i, c in enumerate(self.criteria):
            m = CRITERION_RE.match(c)
            if not m:
                raise ConfigError(f"unknown criterion {c!r}", f"criteria.{i}")
            k = m.group("gap") or m.group("ent")
            if k is not None and not 2 <= int(k) <= n:
                raise ConfigError(f"level k={k} outside 2..{n}", f"criteria.{i}")
        return self

    @property
    def gap_levels(self) -> list[int]:
        return sorted(int(m.group("gap")) for c in self.criteria if (m := CRITERION_RE.match(c)) and m.group("gap"))

    @property
    def entropy_levels(self) -> list[int]:
        out = []
        for c in self.criteria:
            m = CRITERION_RE.match(c)
            if c.startswith("entropy"):
                out.append(int(m.group("ent") or 2))
        return sorted(out)

    def axis_values(self, axis: Axis) -> list[float]:
        lo = axis.min
        if axis.name == "kT":
            lo = max(lo, self.thermal.epsilon)
        vals = [float(lo)] if axis.steps == 1 else [float(v) for v in np.linspace(lo, max(axis.max, lo), axis.steps)]
        if axis.name == "kT" and self.thermal.include_zero:
            vals = [0.0] + vals
        return vals


def load_config(doc: Union[dict, str]) -> SweepConfig:
    """Validate a config mapping (or JSON text), raising ConfigError with a field path."""
    try:
        if isinstance(doc, str):
            return SweepConfig.model_validate_json(doc)
        return SweepConfig.model_validate(doc)
    except ValidationError as exc:
        err = exc.errors()[0]
        ctx_err = err.get("ctx", {}).get("error")
        if isinstance(ctx_err, ConfigError):
            raise ConfigError(ctx_err.message, ctx_err.path) from None
        path = ".".join(str(p) for p in err["loc"])
        raise ConfigError(err["msg"], path) from None


def config_schema() -> dict:
    return SweepConfig.model_json_schema()


@dataclass
class SweepRow:
    params: dict[str, float]
    kT: float
    E0: float
    degeneracy: int
    ksep: dict[int, float]
    energy: float
    concurrence: float
    verdicts: dict[str, DetectionVerdict]
    caveats: list[str] = field(default_factory=list)

    def detected(self, criterion: str) -> bool:
        return self.verdicts[criterion].detected

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "kT": self.kT,
            "E0": self.E0,
            "degeneracy": self.degeneracy,
            "ksep": {str(k): v for k, v in self.ksep.items()},
            "gaps": {str(k): gap_from_energies(v, self.E0) for k, v in self.ksep.items()},
            "energy": self.energy,
            "concurrence": self.concurrence,
            "verdicts": {c: v.to_dict() for c, v in self.verdicts.items()},
            "caveats": self.caveats,
        }


def _item_seed(base: int, hparams: dict) -> int:
    key = json.dumps([base, sorted((k, repr(float(v))) for k, v in hparams.items())])
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:4], "little")


def _evaluate_group(cfg: SweepConfig, hparams: dict, points: list[dict]) -> list[SweepRow]:
    """All rows sharing one Hamiltonian; E_k-sep and entropy thresholds are computed once."""
    h = cfg.model.hamiltonian(**hparams)
    spec = eig_hermitian(h)
    ground = spec.ground_state()
    conc = gme_concurrence_pure(ground).value
    seed = _item_seed(cfg.optimizer.seed, hparams)
    ocfg = OptimizerConfig(
        restarts=cfg.optimizer.restarts,
        max_sweeps=cfg.optimizer.max_sweeps,
        rel_energy_tol=cfg.optimizer.rel_energy_tol,
        seed=seed,
    )
    ksep = ksep_chain(h, cfg.gap_levels, ocfg) if cfg.gap_levels else {}
    ent_thr = {
        k: entropy_threshold_ksep(
            ground, k, ocfg, n_components=cfg.entropy_components, restarts=cfg.entropy_restarts
        )
        for k in cfg.entropy_levels
    }
    lu = cfg.q_lu_trials
    if lu is None:
        lu = 0 if all(d == 2 for d in h.shape.local_dims) else 20

    base_caveats = []
    if spec.degeneracy > 1:
        base_caveats.append(f"degenerate ground manifold (x{spec.degeneracy})")
    for k, res in ksep.items():
        if not res.converged:
            base_caveats.append(f"gap-k{k}: optimizer not converged")
        if res.caveat:
            base_caveats.append(f"gap-k{k}: {res.caveat}")

    rows = []
    for pt in points:
        kT = pt.get("kT", cfg.thermal.kT if cfg.thermal.kT is not None else 0.0)
        tp = thermal_state(spec, kT)
        rho = tp.state
        verdicts: dict[str, DetectionVerdict] = {}
        for c in cfg.criteria:
            m = CRITERION_RE.match(c)
            if m.group("gap"):
                verdicts[c] = gap_witness(rho, h, ksep[int(m.group("gap"))])
            elif c == "Q":
                verdicts[c] = q_witness(rho, lu_trials=lu, seed=seed)
            elif c == "concurrence":
                verdicts[c] = DetectionVerdict("concurrence", conc, 0.0, k=2, direction="above",
                                               extras={"applies_to": "ground state"})
            else:
                k = int(m.group("ent") or 2)
                verdicts[c] = entropy_witness(rho, ground, k, ent_thr[k])
        rows.append(
            SweepRow(
                params=dict(pt),
                kT=float(kT),
                E0=spec.ground_energy,
                degeneracy=spec.degeneracy,
                ksep={k: r.energy for k, r in ksep.items()},
                energy=tp.energy,
                concurrence=conc,
                verdicts=verdicts,
                caveats=list(base_caveats),
            )
        )
    return rows


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list[SweepRow]
    provenance: dict

    @property
    def axis_names(self) -> list[str]:
        return [a.name for a in self.config.axes]

    def columns(self) -> list[str]:
        cols = list(self.axis_names)
        if "kT" not in cols:
            cols.append("kT")
        cols += ["E0", "degeneracy"]
        cols += [f"E_{k}sep" for k in self.config.gap_levels]
        cols += ["energy", "C_gme"]
        for c in self.config.criteria:
            cols += [f"{c}_value", f"{c}_threshold", f"{c}_detected"]
        cols.append("caveats")
        return cols

    def _record(self, row: SweepRow) -> list:
        out = [repr(float(row.params[a])) for a in self.axis_names]
        if "kT" not in self.axis_names:
            out.append(repr(row.kT))
        out += [repr(row.E0), str(row.degeneracy)]
        out += [repr(row.ksep[k]) for k in self.config.gap_levels]
        out += [repr(row.energy), repr(row.concurrence)]
        for c in self.config.criteria:
            v = row.verdicts[c]
            out += [repr(float(v.value)), repr(float(v.threshold)), str(int(v.detected))]
        out.append(";".join(row.caveats))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns())
        for r in self.rows:
            w.writerow(self._record(r))
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "config": self.config.model_dump(),
                "rows": [r.to_dict() for r in self.rows],
                "provenance": self.provenance,
            },
            indent=1,
        )

    def write(self, path: str, fmt: Optional[str] = None) -> None:
        fmt = fmt or self.config.output.format
        text = self.to_csv() if fmt == "csv" else self.to_json()
        with open(path, "w", newline="") as fh:
            fh.write(text)


def grid_points(cfg: SweepConfig) -> list[dict[str, float]]:
    axes = cfg.axes
    values = [cfg.axis_values(a) for a in axes]
    return [dict(zip((a.name for a in axes), combo)) for combo in itertools.product(*values)]


def run_sweep(cfg: SweepConfig, cache: bool = True, workers: Optional[int] = None) -> SweepResult:
    """Evaluate every grid point; rows come back in grid order (first axis outermost).

    With ``cache`` the k-separable energies are shared by all points with the
    same Hamiltonian (they differ only in kT). Each Hamiltonian gets an
    optimizer seed derived from the base seed and its parameters, so cached and
    uncached runs agree.
    """
    t0 = time.perf_counter()
    points = grid_points(cfg)
    groups: dict[tuple, list[int]] = {}
    for i, pt in enumerate(points):
        hkey = tuple((k, v) for k, v in pt.items() if k != "kT")
        key = hkey if cache else (i,) + hkey
        groups.setdefault(key, []).append(i)

    tasks = []
    for idxs in groups.values():
        hparams = {k: v for k, v in points[idxs[0]].items() if k != "kT"}
        tasks.append((hparams, [points[i] for i in idxs]))

    workers = workers or cfg.workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_evaluate_group, itertools.repeat(cfg), *zip(*tasks)))
    else:
        results = [_evaluate_group(cfg, hp, pts) for hp, pts in tasks]

    rows: list[Optional[SweepRow]] = [None] * len(points)
    for idxs, group_rows in zip(groups.values(), results):
        for i, r in zip(idxs, group_rows):
            rows[i] = r
    return SweepResult(
        config=cfg,
        rows=rows,
        provenance={
            "seed": cfg.optimizer.seed,
            "version": __version__,
            "wall_time_s": time.perf_counter() - t0,
            "n_points": len(points),
        },
    )


@dataclass
class RegionBoundary:
    criterion: str
    x_axis: str
    y_axis: str
    points: list[tuple[float, float]]
    violations: list[float]

    @property
    def monotone(self) -> bool:
        return not self.violations


def classify_regions(rows: list[SweepRow], criterion: str, x_axis: Optional[str] = None,
                     y_axis: Optional[str] = None) -> RegionBoundary:
    """Per x column, the largest y at which ``criterion`` still detects.

    The crossing between the last detected and first undetected grid value is
    located by linear interpolation of the verdict's excess over its margin.
    Columns whose detected set is not a prefix in y are reported in
    ``violations``.
    """
    if not rows:
        raise ValueError("no rows")
    names = list(rows[0].params)
    if x_axis is None or y_axis is None:
        if len(names) != 2:
            raise ValueError("rows do not form a 2-D grid")
        x_axis, y_axis = names
    xs = sorted({r.params[x_axis] for r in rows})
    ys = sorted({r.params[y_axis] for r in rows})
    cells = {}
    for r in rows:
        key = (r.params[x_axis], r.params[y_axis])
        if key in cells:
            raise ValueError(f"duplicate grid point {key}")
        cells[key] = r.verdicts[criterion]
    if len(cells) != len(xs) * len(ys):
        raise ValueError(f"incomplete grid: {len(cells)} of {len(xs) * len(ys)} points")

    points, violations = [], []
    for x in xs:
        col = [cells[(x, y)] for y in ys]
        det = [v.detected for v in col]
        n_det = sum(det)
        if any(det[n_det:]) or not all(det[:n_det]):
            violations.append(x)
        if n_det == 0:
            continue
        last = max(i for i, d in enumerate(det) if d)
        if last == len(ys) - 1:
            points.append((x, ys[-1]))
            continue
        e0 = col[last].excess - col[last].margin
        e1 = col[last + 1].excess - col[last + 1].margin
        frac = e0 / (e0 - e1) if e0 != e1 else 0.0
        points.append((x, ys[last] + frac * (ys[last + 1] - ys[last])))
    return RegionBoundary(criterion, x_axis, y_axis, points, violations)


def nesting_violations(rows: list[SweepRow]) -> list[int]:
    """Indices of rows where gap-ki detects but some gap-kj (j > i) does not.

    Thresholds satisfy E_2 <= E_3 <= ..., so an energy below E_i is below
    every larger-k threshold too: GME detection implies k-inseparability
    detection for every k.
    """
    bad = []
    for idx, r in enumerate(rows):
        levels = sorted(int(c[5:]) for c in r.verdicts if c.startswith("gap-k"))
        flags = [r.verdicts[f"gap-k{k}"].detected for k in levels]
        if any(flags[i] and not flags[j] for i in range(len(flags)) for j in range(i + 1, len(flags))):
            bad.append(idx)
    return bad
