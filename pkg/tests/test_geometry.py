import numpy as np
import pytest

from cohdesign import (
    OptimizationRegion,
    VoxelGeometry,
    read_geometry,
    write_geometry,
)
from cohdesign.geometry import BACKPLATE_DEPTH, BLOCK_SIDE


def test_region_lattice_layout():
    region = OptimizationRegion()  # 18 x 18 x 1 default
    assert region.extent == (3.0, 3.0, pytest.approx(BLOCK_SIDE))
    assert region.origin == (-1.5, -1.5, pytest.approx(-BLOCK_SIDE / 2))
    assert region.z_top == pytest.approx(BLOCK_SIDE / 2)
    assert len(region.all_indices()) == 324
    # lexicographic candidate order
    assert region.all_indices()[0] == (0, 0, 0)
    assert region.all_indices()[1] == (0, 1, 0)


def test_region_block_bounds_and_center():
    region = OptimizationRegion(nx=4, ny=2, nz=1)
    (xl, xh), (yl, yh), (zl, zh) = region.block_bounds((0, 0, 0))
    assert xh - xl == pytest.approx(BLOCK_SIDE)
    assert xl == pytest.approx(region.origin[0])
    center = region.block_center((3, 1, 0))
    assert center[0] == pytest.approx(region.origin[0] + 3.5 * BLOCK_SIDE)
    for bad in ((-1, 0, 0), (4, 0, 0), (0, 2, 0), (0, 0, 1)):
        with pytest.raises(IndexError):
            region.block_bounds(bad)


def test_geometry_blocks_validated_and_frozen():
    region = OptimizationRegion(nx=2, ny=2, nz=1)
    geom = VoxelGeometry(region=region, blocks={(0, 1, 0)})
    with pytest.raises(IndexError):
        VoxelGeometry(region=region, blocks={(2, 0, 0)})
    with pytest.raises(ValueError):
        geom.with_block((0, 1, 0))  # already placed
    grown = geom.with_block((1, 0, 0))
    assert grown.blocks == {(0, 1, 0), (1, 0, 0)}
    assert geom.blocks == {(0, 1, 0)}  # original untouched
    assert set(grown.free_indices()) == {(0, 0, 0), (1, 1, 0)}


def test_atom_position_conventions():
    # freestanding: height measured from the region mid-plane
    free = VoxelGeometry(backplate=False, atom_zeta=0.8)
    assert free.atom_position[2] == pytest.approx(0.4)
    # backplate: height measured from the vacuum/backplate interface
    back = VoxelGeometry(backplate=True, atom_zeta=0.8)
    assert back.atom_position[2] == pytest.approx(0.4 - BLOCK_SIDE / 2)
    zl, zh = back.backplate_z
    assert zh == pytest.approx(-BLOCK_SIDE / 2)
    assert zh - zl == pytest.approx(BACKPLATE_DEPTH)
    with pytest.raises(ValueError):
        VoxelGeometry(backplate=True, atom_zeta=-0.1)


def test_geometry_file_round_trip(tmp_path):
    geom = VoxelGeometry(
        region=OptimizationRegion(nx=5, ny=3, nz=2),
        backplate=True,
        atom_zeta=0.76268,
        blocks={(0, 0, 0), (4, 2, 1), (2, 1, 0)},
    )
    path = tmp_path / "g.txt"
    write_geometry(path, geom, extra_header={"note": "test"})
    loaded = read_geometry(path)
    assert loaded == geom
    assert loaded.content_hash() == geom.content_hash()


def test_content_hash_sensitivity():
    a = VoxelGeometry(blocks={(0, 0, 0)})
    assert a.content_hash() == VoxelGeometry(blocks={(0, 0, 0)}).content_hash()
    assert a.content_hash() != VoxelGeometry(blocks={(0, 1, 0)}).content_hash()
    assert a.content_hash() != VoxelGeometry(
        blocks={(0, 0, 0)}, backplate=True
    ).content_hash()
    assert a.content_hash() != VoxelGeometry(
        blocks={(0, 0, 0)}, atom_zeta=0.9
    ).content_hash()


def test_read_geometry_rejects_malformed(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("just some text\n1 2 3\n")
    with pytest.raises(ValueError):
        read_geometry(bad)
    # right magic, malformed row
    bad.write_text("# cohdesign geometry v1\n# region = 2 2 1\n0 0\n")
    with pytest.raises(ValueError):
        read_geometry(bad)
    # missing header field
    bad.write_text("# cohdesign geometry v1\n# region = 2 2 1\n")
    with pytest.raises(ValueError):
        read_geometry(bad)


def test_full_footprint_flag_round_trip(tmp_path):
    geom = VoxelGeometry(backplate=True, backplate_full_footprint=True,
                         atom_zeta=1.0)
    path = tmp_path / "g.txt"
    write_geometry(path, geom)
    assert read_geometry(path) == geom


def test_block_center_zeta_columns(tmp_path):
    geom = VoxelGeometry(region=OptimizationRegion(nx=2, ny=2, nz=1),
                         blocks={(1, 1, 0)})
    path = tmp_path / "g.txt"
    write_geometry(path, geom)
    row = [l for l in path.read_text().splitlines() if not l.startswith("#")][0]
    vals = row.split()
    assert vals[:3] == ["1", "1", "0"]
    # center of block (1,1,0) in a 2x2 region: +BLOCK_SIDE/2 in x and y,
    # quoted in zeta units (twice the length value)
    assert float(vals[3]) == pytest.approx(BLOCK_SIDE, abs=1e-9)
    assert float(vals[4]) == pytest.approx(BLOCK_SIDE, abs=1e-9)
    assert float(vals[5]) == pytest.approx(0.0, abs=1e-9)
