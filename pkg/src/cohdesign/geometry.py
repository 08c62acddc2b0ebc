"""Discretized dielectric environments: the candidate-block lattice of the
optimization region, placed blocks, the reflecting backplate, and the
tabular geometry-file format.

All coordinates handed to users are dimensionless zeta values; internal
arithmetic is in simulation length units (lambda0 = 1).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from .core import UNITS

__all__ = ["OptimizationRegion", "VoxelGeometry", "write_geometry", "read_geometry"]

BLOCK_SIDE = 1.0 / 6.0  # lambda/6 cube placed at each step
BLOCK_PERMITTIVITY = 3.0
BACKPLATE_DEPTH = 0.5  # half a wavelength; immaterial for a perfect reflector


@dataclass(frozen=True)
class OptimizationRegion:
    """Candidate-block lattice: an nx x ny x nz grid of lambda/6 cubes.

    The region is centered at the origin; the default is the 3x3 wavelength,
    one-block-deep slab.
    """

    nx: int = 18
    ny: int = 18
    nz: int = 1

    @property
    def extent(self) -> tuple[float, float, float]:
        return (self.nx * BLOCK_SIDE, self.ny * BLOCK_SIDE, self.nz * BLOCK_SIDE)

    @property
    def origin(self) -> tuple[float, float, float]:
        ex, ey, ez = self.extent
        return (-0.5 * ex, -0.5 * ey, -0.5 * ez)

    @property
    def z_top(self) -> float:
        return self.origin[2] + self.nz * BLOCK_SIDE

    @property
    def z_bottom(self) -> float:
        return self.origin[2]

    def all_indices(self) -> list[tuple[int, int, int]]:
        """All candidate indices in lexicographic order (the tie-break order)."""
        return [
            (i, j, k)
            for i in range(self.nx)
            for j in range(self.ny)
            for k in range(self.nz)
        ]

    def block_bounds(self, index):
        """((xlo, xhi), (ylo, yhi), (zlo, zhi)) of the block, length units."""
        ox, oy, oz = self.origin
        i, j, k = index
        if not (0 <= i < self.nx and 0 <= j < self.ny and 0 <= k < self.nz):
            raise IndexError(f"block index {index} outside region lattice")
        return (
            (ox + i * BLOCK_SIDE, ox + (i + 1) * BLOCK_SIDE),
            (oy + j * BLOCK_SIDE, oy + (j + 1) * BLOCK_SIDE),
            (oz + k * BLOCK_SIDE, oz + (k + 1) * BLOCK_SIDE),
        )

    def block_center(self, index):
        (xl, xh), (yl, yh), (zl, zh) = self.block_bounds(index)
        return np.array([0.5 * (xl + xh), 0.5 * (yl + yh), 0.5 * (zl + zh)])


@dataclass(frozen=True)
class VoxelGeometry:
    """A concrete environment: optional PEC backplate plus placed blocks.

    atom_zeta is the dimensionless atom height on the z axis; for backplate
    geometries it is measured from the vacuum/backplate interface (the top of
    the backplate), for freestanding ones from the region mid-plane.
    backplate_full_footprint extends the backplate across the whole grid
    (into the absorbers), which emulates an infinite half-space for
    validation runs.
    """

    region: OptimizationRegion = field(default_factory=OptimizationRegion)
    backplate: bool = False
    blocks: frozenset = frozenset()
    atom_zeta: float = 0.7627
    backplate_full_footprint: bool = False

    def __post_init__(self):
        blocks = frozenset(tuple(int(v) for v in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        for b in blocks:
            self.region.block_bounds(b)  # raises if outside the lattice
        if self.atom_zeta <= 0 and self.backplate:
            raise ValueError("atom must sit above the backplate (atom_zeta > 0)")

    @property
    def atom_position(self) -> np.ndarray:
        """Atom position in simulation length units, on the z axis."""
        z = float(UNITS.length(self.atom_zeta))
        if self.backplate:
            z += self.region.z_bottom  # interface at the bottom of the slab
        return np.array([0.0, 0.0, z])

    @property
    def backplate_z(self) -> tuple[float, float]:
        top = self.region.z_bottom
        return (top - BACKPLATE_DEPTH, top)

    def with_block(self, index) -> "VoxelGeometry":
        index = tuple(int(v) for v in index)
        if index in self.blocks:
            raise ValueError(f"block {index} already placed")
        return replace(self, blocks=self.blocks | {index})

    def free_indices(self) -> list[tuple[int, int, int]]:
        return [b for b in self.region.all_indices() if b not in self.blocks]

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(
            repr(
                (
                    self.region.nx,
                    self.region.ny,
                    self.region.nz,
                    self.backplate,
                    self.backplate_full_footprint,
                    round(self.atom_zeta, 12),
                    sorted(self.blocks),
                )
            ).encode()
        )
        return h.hexdigest()[:16]


def write_geometry(path, geometry: VoxelGeometry, extra_header: dict | None = None):
    """Tabular geometry file: '#'-prefixed metadata, then one row per block."""
    lines = [
        "# cohdesign geometry v1",
        f"# backplate = {int(geometry.backplate)}",
        f"# backplate_full_footprint = {int(geometry.backplate_full_footprint)}",
        f"# atom_zeta = {geometry.atom_zeta:.17g}",
        f"# region = {geometry.region.nx} {geometry.region.ny} {geometry.region.nz}",
    ]
    for key, val in (extra_header or {}).items():
        lines.append(f"# {key} = {val}")
    lines.append("# columns: bx by bz zeta_cx zeta_cy zeta_cz")
    for b in sorted(geometry.blocks):
        c = UNITS.zeta(geometry.region.block_center(b))
        lines.append(f"{b[0]} {b[1]} {b[2]} {c[0]:.10f} {c[1]:.10f} {c[2]:.10f}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_geometry(path) -> VoxelGeometry:
    meta = {}
    blocks = []
    with open(path) as f:
        first = f.readline()
        if not first.startswith("# cohdesign geometry"):
            raise ValueError(f"{path}: not a cohdesign geometry file")
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = val.strip()
                continue
            parts = line.split()
            if len(parts) != 6:
                raise ValueError(f"{path}: malformed block row {line!r}")
            blocks.append(tuple(int(p) for p in parts[:3]))
    try:
        nx, ny, nz = (int(v) for v in meta["region"].split())
        geom = VoxelGeometry(
            region=OptimizationRegion(nx=nx, ny=ny, nz=nz),
            backplate=bool(int(meta["backplate"])),
            backplate_full_footprint=bool(
                int(meta.get("backplate_full_footprint", "0"))
            ),
            atom_zeta=float(meta["atom_zeta"]),
            blocks=frozenset(blocks),
        )
    except KeyError as exc:
        raise ValueError(f"{path}: missing header field {exc}") from exc
    return geom
