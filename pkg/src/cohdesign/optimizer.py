"""Iterative inverse design: place one dielectric block per iteration at the
argmax of the merit field, re-simulate, repeat; plus the non-iterative
"single pass" variant that fills every site where the analytic vacuum merit
is positive and evaluates the result with one simulation.

The trace records the coherence of the geometry *entering* each iteration,
so iteration 1 is the analytic baseline scenario (bare backplate or vacuum)
and the best iteration is selected post hoc; placement happens even when the
best available merit is non-positive, since the coherence trace is allowed
to dip and recover.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adjoint import analytic_vacuum_merit, merit_field_over_region
from .coherence import rates_from_greens, steady_coherence
from .core import UNITS, DipolePair, standard_dipoles
from .fdtd import FdtdConfig, _cell_range, greens_field
from .geometry import OptimizationRegion, VoxelGeometry, read_geometry, write_geometry

__all__ = [
    "FIRST_ANTINODE",
    "OptimizationConfig",
    "TraceRecord",
    "OptimizationTrace",
    "iterate_once",
    "run_optimization",
    "single_pass",
    "write_trace",
    "read_trace",
]

FIRST_ANTINODE = 0.76268  # first |coherence| maximum above a perfect reflector

_SCENARIOS = ("backplate", "freestanding")
_ROTATIONS = ("perpendicular", "parallel")


@dataclass(frozen=True)
class OptimizationConfig:
    """Scenario, atom placement, iteration budget and solver settings."""

    scenario: str = "backplate"
    rotation: str = "perpendicular"
    atom_zeta: float = FIRST_ANTINODE
    max_iterations: int = 20
    fdtd: FdtdConfig = field(default_factory=FdtdConfig)
    region: OptimizationRegion = field(default_factory=OptimizationRegion)
    dipole_d: float = 1.0
    dipole_mu: float = 1.0

    def __post_init__(self):
        if self.scenario not in _SCENARIOS:
            raise ValueError(f"scenario must be one of {_SCENARIOS}")
        if self.rotation not in _ROTATIONS:
            raise ValueError(f"rotation must be one of {_ROTATIONS}")
        if self.atom_zeta <= 0:
            raise ValueError("atom_zeta must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")

    def dipole_pair(self) -> DipolePair:
        return standard_dipoles(self.rotation, self.dipole_d, self.dipole_mu)

    def initial_geometry(self) -> VoxelGeometry:
        return VoxelGeometry(
            region=self.region,
            backplate=(self.scenario == "backplate"),
            atom_zeta=self.atom_zeta,
        )


@dataclass(frozen=True)
class TraceRecord:
    """One iteration: the coherence of the entering geometry and the block
    then placed."""

    iteration: int
    block: tuple[int, int, int]
    delta_f_max: float
    rho12: complex
    gamma1: float
    gamma2: float
    kappa12: complex
    wall_time: float = 0.0


@dataclass
class OptimizationTrace:
    """Full run record: per-iteration entries plus the initial geometry the
    placement sequence started from."""

    config: OptimizationConfig
    initial_geometry: VoxelGeometry
    records: list

    @property
    def best_index(self) -> int:
        """0-based index of the record with the largest |rho12|."""
        if not self.records:
            raise ValueError("empty trace")
        return int(np.argmax([abs(r.rho12) for r in self.records]))

    @property
    def best_iteration(self) -> int:
        return self.records[self.best_index].iteration

    @property
    def peak_coherence(self) -> float:
        return abs(self.records[self.best_index].rho12)

    def geometry_at(self, n_blocks: int) -> VoxelGeometry:
        """Geometry after the first n_blocks placements."""
        geom = self.initial_geometry
        for rec in self.records[:n_blocks]:
            geom = geom.with_block(rec.block)
        return geom

    def best_geometry(self) -> VoxelGeometry:
        """The geometry whose coherence was the trace maximum (the blocks
        placed before the best record was evaluated)."""
        return self.geometry_at(self.best_index)

    def final_geometry(self) -> VoxelGeometry:
        return self.geometry_at(len(self.records))


def iterate_once(geometry: VoxelGeometry, config: OptimizationConfig,
                 iteration: int = 1):
    """One design step: simulate the current geometry, record its coherence,
    and place a block at the merit-field argmax over the unoccupied sites.

    Returns (updated geometry, TraceRecord).  A block is placed even when
    the best merit is non-positive.
    """
    free = geometry.free_indices()
    if not free:
        raise RuntimeError("optimization region exhausted: no free candidate sites")
    t0 = time.perf_counter()
    pair = config.dipole_pair()
    gf = greens_field(geometry, config.fdtd)
    g_eq = gf.equal_point()
    sym = 0.5 * (g_eq + g_eq.T)
    rho = steady_coherence(sym.imag, pair)
    rates = rates_from_greens(sym.imag, pair)
    mf = merit_field_over_region(gf, sym, pair, geometry.region, candidates=free)
    block = mf.argmax()
    rec = TraceRecord(
        iteration=iteration,
        block=block,
        delta_f_max=float(mf.values.max()),
        rho12=complex(rho),
        gamma1=rates.gamma1,
        gamma2=rates.gamma2,
        kappa12=rates.kappa12,
        wall_time=time.perf_counter() - t0,
    )
    return geometry.with_block(block), rec


_TRACE_COLUMNS = (
    "iteration bx by bz deltaF_max re_rho im_rho abs_rho gamma1 gamma2 abs_kappa12"
)


def write_trace(path, trace: OptimizationTrace):
    lines = _trace_header(trace.config)
    for rec in trace.records:
        lines.append(_trace_row(rec))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def _trace_header(config: OptimizationConfig) -> list:
    return [
        "# cohdesign trace v1",
        f"# scenario = {config.scenario}",
        f"# rotation = {config.rotation}",
        f"# atom_zeta = {config.atom_zeta:.17g}",
        f"# resolution = {config.fdtd.resolution}",
        f"# columns: {_TRACE_COLUMNS}",
    ]


def _trace_row(rec: TraceRecord) -> str:
    return (
        f"{rec.iteration} {rec.block[0]} {rec.block[1]} {rec.block[2]} "
        f"{rec.delta_f_max:.12e} {rec.rho12.real:.12e} {rec.rho12.imag:.12e} "
        f"{abs(rec.rho12):.12e} {rec.gamma1:.12e} {rec.gamma2:.12e} "
        f"{abs(rec.kappa12):.12e}"
    )


def read_trace(path) -> list:
    """Trace rows back as TraceRecord objects (kappa12 phase is not stored;
    its magnitude is recovered as a real value)."""
    records = []
    with open(path) as f:
        first = f.readline()
        if not first.startswith("# cohdesign trace"):
            raise ValueError(f"{path}: not a cohdesign trace file")
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            p = line.split()
            if len(p) != 11:
                raise ValueError(f"{path}: malformed trace row {line!r}")
            records.append(
                TraceRecord(
                    iteration=int(p[0]),
                    block=(int(p[1]), int(p[2]), int(p[3])),
                    delta_f_max=float(p[4]),
                    rho12=complex(float(p[5]), float(p[6])),
                    gamma1=float(p[8]),
                    gamma2=float(p[9]),
                    kappa12=complex(float(p[10])),
                )
            )
    return records


def run_optimization(
    config: OptimizationConfig,
    workdir=None,
    progress=None,
) -> OptimizationTrace:
    """Run the placement loop for config.max_iterations iterations.

    With a workdir, the trace file and a geometry checkpoint are updated
    after every iteration and an interrupted run resumes from the checkpoint
    (re-deriving all state from the placed-block list).  `progress` is an
    optional callable receiving each TraceRecord as it is produced.
    """
    geometry = config.initial_geometry()
    records = []
    start = 0
    trace_path = ckpt_path = None
    if workdir is not None:
        workdir = Path(workdir)
        workdir.mkdir(parents=True, exist_ok=True)
        trace_path = workdir / "trace.txt"
        ckpt_path = workdir / "checkpoint.geom.txt"
        if ckpt_path.exists():
            geometry = read_geometry(ckpt_path)
            records = read_trace(trace_path) if trace_path.exists() else []
            start = len(records)
            if len(geometry.blocks) != start:
                raise ValueError(
                    f"checkpoint inconsistent: {len(geometry.blocks)} blocks "
                    f"vs {start} trace rows"
                )
        else:
            with open(trace_path, "w") as f:
                f.write("\n".join(_trace_header(config)) + "\n")

    for it in range(start + 1, config.max_iterations + 1):
        geometry, rec = iterate_once(geometry, config, iteration=it)
        records.append(rec)
        if workdir is not None:
            with open(trace_path, "a") as f:
                f.write(_trace_row(rec) + "\n")
            write_geometry(ckpt_path, geometry, extra_header={"iteration": it})
        if progress is not None:
            progress(rec)
    return OptimizationTrace(
        config=config, initial_geometry=config.initial_geometry(), records=records
    )


def analytic_block_merit(
    index, region: OptimizationRegion, atom_position, pair: DipolePair,
    fdtd: FdtdConfig,
) -> float:
    """Vacuum-analytic merit of one candidate block: closed-form vacuum
    merit density summed over the block's voxel centers, in atom-relative
    zeta coordinates."""
    bounds = region.block_bounds(index)
    ranges = [_cell_range(lo, hi, fdtd) for lo, hi in bounds]
    atom = np.asarray(atom_position, dtype=float)
    total = 0.0
    for i in range(*ranges[0]):
        for j in range(*ranges[1]):
            for k in range(*ranges[2]):
                center = (np.array([i, j, k]) + 0.5) * fdtd.dx - fdtd.half_extent
                total += analytic_vacuum_merit(UNITS.zeta(center - atom), pair)
    return total


def single_pass(config: OptimizationConfig):
    """Fill every candidate whose vacuum-analytic merit is positive, then
    evaluate the coherence with a single simulation.

    Returns (geometry, TraceRecord) where the record holds the evaluated
    coherence and the largest block merit among the filled sites (or the
    global maximum when nothing is filled, with block index (-1,-1,-1)).
    """
    t0 = time.perf_counter()
    pair = config.dipole_pair()
    geometry = config.initial_geometry()
    atom = geometry.atom_position
    merits = {
        idx: analytic_block_merit(idx, config.region, atom, pair, config.fdtd)
        for idx in config.region.all_indices()
    }
    filled = [idx for idx, m in merits.items() if m > 0.0]
    for idx in filled:
        geometry = geometry.with_block(idx)

    gf = greens_field(geometry, config.fdtd)
    g_eq = gf.equal_point()
    sym = 0.5 * (g_eq + g_eq.T)
    rho = steady_coherence(sym.imag, pair)
    rates = rates_from_greens(sym.imag, pair)
    best = max(filled, key=merits.get) if filled else (-1, -1, -1)
    rec = TraceRecord(
        iteration=1,
        block=tuple(best),
        delta_f_max=max(merits.values()),
        rho12=complex(rho),
        gamma1=rates.gamma1,
        gamma2=rates.gamma2,
        kappa12=rates.kappa12,
        wall_time=time.perf_counter() - t0,
    )
    return geometry, rec
