import math

import numpy as np
import pytest

from rosar.formats import (
    FormatError,
    read_img1,
    read_rif1,
    read_wgt1,
    table_hash,
    write_img1,
    write_pgm,
    write_report,
    write_rif1,
    write_wgt1,
)
from rosar.geometry import RadarConfig, TargetPolar
from rosar.imaging import ImageGrid, SarImage, matched_filter_table
from rosar.signal import JitterModel, PointScene, range_fft, simulate_if

CFG = RadarConfig()


def test_rif1_round_trip(tmp_path):
    d = simulate_if(CFG, PointScene([(TargetPolar(1.0, 2.0), 1 + 1j)], 0.1),
                    JitterModel.from_degrees(0.05, seed=2), n_pulses=30)
    for m in (d, range_fft(d, CFG)):
        path = tmp_path / "d.rif"
        write_rif1(path, m, CFG, seed=2)
        back, cfg, meta = read_rif1(path)
        assert cfg == CFG and meta == {"seed": "2"}
        assert back.kind == m.kind
        assert np.array_equal(back.data, m.data)
        assert np.array_equal(back.pulse_azimuths, m.pulse_azimuths)


def test_wgt1_round_trip(tmp_path):
    table = matched_filter_table(CFG, [45, 46])
    w = table[45].weights.copy()
    w[::2] = 0
    table[45].weights = w
    table[46].verified = False
    table[46].error = "solver gave up"
    path = tmp_path / "t.wgt"
    write_wgt1(path, table)
    back = read_wgt1(path)
    assert back.cfg == table.cfg and back.params == table.params
    assert back.bins() == [45, 46]
    for b in (45, 46):
        assert np.array_equal(back[b].weights, table[b].weights)
        assert back[b].window == table[b].window
        assert back[b].verified == table[b].verified
        assert back[b].error == table[b].error
    assert table_hash(back) == table_hash(table)


@pytest.mark.parametrize("grid", [
    ImageGrid.polar([1.0, 1.1, 1.2], [2.0, 2.5]),
    ImageGrid.cartesian(0.3, 0.2, 0.1, centre_x=0.5, centre_y=-1.0),
])
def test_img1_round_trip(tmp_path, grid):
    rng = np.random.default_rng(0)
    px = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    img = SarImage(grid, px, "FFT_SAS", seconds=1.5, preprocess_seconds=0.25, threads=3,
                   table_hash="ab" * 32)
    write_img1(tmp_path / "i.img", img)
    back = read_img1(tmp_path / "i.img")
    assert np.array_equal(back.pixels, px)
    assert back.grid.shape == grid.shape
    np.testing.assert_array_equal(back.grid.pixel_coords()[1], grid.pixel_coords()[1])
    assert (back.backend, back.seconds, back.preprocess_seconds, back.threads, back.table_hash) == \
        ("FFT_SAS", 1.5, 0.25, 3, "ab" * 32)


def test_readers_reject_wrong_format_and_version(tmp_path):
    table = matched_filter_table(CFG, [45])
    path = tmp_path / "t.wgt"
    write_wgt1(path, table)
    raw = path.read_bytes()
    with pytest.raises(FormatError):
        read_rif1(path)
    (tmp_path / "v.wgt").write_bytes(raw.replace(b"version=1", b"version=2", 1))
    with pytest.raises(FormatError):
        read_wgt1(tmp_path / "v.wgt")
    (tmp_path / "x.wgt").write_bytes(raw[:-8])
    with pytest.raises(FormatError):
        read_wgt1(tmp_path / "x.wgt")
    (tmp_path / "h.wgt").write_bytes(b"format=WGT1")
    with pytest.raises(FormatError):
        read_wgt1(tmp_path / "h.wgt")


def test_pgm(tmp_path):
    px = np.array([[1.0, 0.1], [0.01, 0.0]])
    write_pgm(tmp_path / "a.pgm", px, floor_db=-40)
    raw = (tmp_path / "a.pgm").read_bytes()
    head, body = raw[:11], raw[11:]
    assert head == b"P5\n2 2\n255\n"
    # rows flipped so that larger y is at the top
    assert list(body) == [0, 0, 255, round(255 * 0.5)]
    with pytest.raises(ValueError):
        write_pgm(tmp_path / "b.pgm", px, floor_db=0)


def test_report(tmp_path):
    write_report(tmp_path / "r.txt", tmp_path / "r.csv",
                 [("entropy", "BPA", 1.5, "nats"), ("time", "SAS", math.pi, "s")])
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "metric,backend,value,units"
    assert float(lines[2].split(",")[2]) == math.pi
    assert "entropy" in (tmp_path / "r.txt").read_text()
