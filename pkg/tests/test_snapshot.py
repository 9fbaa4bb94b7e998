import struct

import numpy as np
import pytest

from lpverify import TorusGrid, snapshot_read, snapshot_write
from lpverify.errors import SnapshotFormatError
from lpverify.snapshot import HEADER_BYTES
from lpverify import forge


def test_round_trip_bit_identical(tmp_path, grid32):
    u = forge.generate(grid32, forge.SpectrumSpec("white-band", seed=5, band=(1, 3)))
    path = tmp_path / "field.lpf"
    snapshot_write(u, path)
    v = snapshot_read(path)
    assert v.grid.n == 32 and v.grid.box_length == grid32.box_length
    assert v.div_free
    for a, b in zip(u.components, v.components):
        assert np.array_equal(a.coeffs, b.coeffs)
        assert b.real_valued and b.mean_zero


def test_file_size_formula(tmp_path):
    g = TorusGrid(64)
    u = forge.taylor_green(g)
    path = tmp_path / "tg.lpf"
    snapshot_write(u, path)
    assert path.stat().st_size == HEADER_BYTES + 3 * 64**3 * 16


def test_bad_magic_rejected(tmp_path, grid16):
    u = forge.taylor_green(grid16)
    path = tmp_path / "bad.lpf"
    snapshot_write(u, path)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"NOPE"
    path.write_bytes(raw)
    with pytest.raises(SnapshotFormatError, match="magic"):
        snapshot_read(path)


def test_unknown_version_rejected(tmp_path, grid16):
    u = forge.taylor_green(grid16)
    path = tmp_path / "v9.lpf"
    snapshot_write(u, path)
    raw = bytearray(path.read_bytes())
    raw[4:8] = struct.pack("<I", 9)
    path.write_bytes(raw)
    with pytest.raises(SnapshotFormatError, match="version"):
        snapshot_read(path)


def test_truncated_payload_rejected(tmp_path, grid16):
    u = forge.taylor_green(grid16)
    path = tmp_path / "trunc.lpf"
    snapshot_write(u, path)
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) - 7])
    with pytest.raises(SnapshotFormatError, match="truncated"):
        snapshot_read(path)


def test_trailing_garbage_rejected(tmp_path, grid16):
    u = forge.taylor_green(grid16)
    path = tmp_path / "trail.lpf"
    snapshot_write(u, path)
    with open(path, "ab") as fh:
        fh.write(b"x")
    with pytest.raises(SnapshotFormatError, match="trailing"):
        snapshot_read(path)
