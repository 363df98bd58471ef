import csv
import math

import numpy as np
import pytest

from rosar import formats
from rosar.cli import main
from rosar.config import RunConfig
from rosar.signal import bin_range

SMALL = """
[radar]
pulses_per_turn = 64

[synthesis]
half_mainlobe_deg = 8
sidelobe_ratio = 0.05
grid_step_deg = 3
min_mainlobe_power = 1
error_radius = 0.0

[scene]
targets = 90 0.88 1.0

[grid]
mode = polar
azimuths_deg = 73.125 78.75 84.375 90 95.625 101.25 106.875
ranges_m = {r}

[run]
threads = 1

[output]
data = {d}/scene.rif1
table = {d}/table.wgt1
images = {d}/images
report = {d}/report
deltas = {d}/deltas.csv
"""


@pytest.fixture
def small_ini(tmp_path):
    path = tmp_path / "run.ini"
    rc = RunConfig.parse(SMALL.format(r=0.88, d=tmp_path))
    ranges = " ".join(repr(bin_range(rc.radar, b)) for b in (19, 20, 21))
    path.write_text(SMALL.format(r=ranges, d=tmp_path))
    return path


def test_config_round_trip_is_fixed_point(tmp_path, capsys):
    assert main(["config"]) == 0
    first = capsys.readouterr().out
    (tmp_path / "a.ini").write_text(first)
    assert main(["config", "-c", str(tmp_path / "a.ini"), "-o", str(tmp_path / "b.ini")]) == 0
    assert (tmp_path / "b.ini").read_text() == first


def test_unknown_key_and_bad_usage_exit_one(tmp_path, capsys):
    (tmp_path / "bad.ini").write_text("[radar]\nwavelength = 5\n")
    assert main(["simulate", "-c", str(tmp_path / "bad.ini")]) == 1
    assert "wavelength" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["image", "--backend", "BPA"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["image", "--data", "x", "--backend", "MUSIC"])
    assert exc.value.code == 1


def test_simulate_is_deterministic(tmp_path):
    a, b = tmp_path / "a.rif1", tmp_path / "b.rif1"
    assert main(["simulate", "-o", str(a), "--pulses", "40"]) == 0
    assert main(["simulate", "-o", str(b), "--pulses", "40"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert main(["simulate", "-o", str(a)]) == 0
    data, cfg, _ = formats.read_rif1(a)
    assert data.n_pulses == cfg.N == 800


def test_empty_scene_simulates_zeros(tmp_path):
    (tmp_path / "e.ini").write_text("[scene]\ntargets =\n")
    out = tmp_path / "e.rif1"
    assert main(["simulate", "-c", str(tmp_path / "e.ini"), "-o", str(out), "--pulses", "5"]) == 0
    data, _, _ = formats.read_rif1(out)
    assert not np.any(data.data)


def test_image_needs_table_and_valid_data(tmp_path, small_ini):
    ini = str(small_ini)
    assert main(["simulate", "-c", ini]) == 0
    assert main(["image", "-c", ini, "--data", str(tmp_path / "scene.rif1"), "--backend", "SAS"]) == 1
    assert main(["image", "-c", ini, "--data", str(tmp_path / "nothing.rif1"),
                 "--backend", "BPA"]) == 2
    # data recorded with the default 800-pulse radar does not match this config
    other = tmp_path / "other.rif1"
    assert main(["simulate", "-o", str(other), "--pulses", "3"]) == 0
    assert main(["image", "-c", ini, "--data", str(other), "--backend", "BPA"]) == 2


def test_calibrate_writes_csv(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["calibrate", "--bins", "44-46", "-o", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [int(r["range_bin"]) for r in rows] == [44, 45, 46]
    assert all(float(r["delta"]) > 0 for r in rows)
    assert main(["calibrate", "--bins", "0-2", "-o", str(out)]) == 1


def test_pipeline_end_to_end(tmp_path, small_ini, capsys):
    ini = str(small_ini)
    assert main(["simulate", "-c", ini]) == 0
    assert main(["synth", "-c", ini, "--bins", "19-21"]) == 0
    table = formats.read_wgt1(tmp_path / "table.wgt1")
    assert table.bins() == [19, 20, 21]
    for backend in ("BPA", "FFT_BPA", "SAS", "FFT_SAS", "RBPA"):
        args = ["image", "-c", ini, "--data", str(tmp_path / "scene.rif1"), "--backend", backend]
        if backend not in ("BPA", "FFT_BPA"):
            args += ["--table", str(tmp_path / "table.wgt1")]
        assert main(args) == 0
    img = formats.read_img1(tmp_path / "images" / "sas.img1")
    assert img.table_hash == formats.table_hash(table)
    assert (tmp_path / "images" / "sas.pgm").exists()
    capsys.readouterr()
    assert main(["eval", "-c", ini, str(tmp_path / "images" / "bpa.img1"),
                 str(tmp_path / "images" / "sas.img1"), "--table", str(tmp_path / "table.wgt1"),
                 "--pattern-bin", "20", "--pattern-out", str(tmp_path / "pat.csv")]) == 0
    report = capsys.readouterr().out
    assert "entropy" in report and "half_mainlobe_width" in report
    rows = list(csv.DictReader((tmp_path / "report.csv").open()))
    peak = {r["backend"]: float(r["value"]) for r in rows if r["metric"] == "peak_col"}
    assert peak == {"BPA": 3.0, "SAS": 3.0}
    az = [float(r["azimuth_deg"]) for r in csv.DictReader((tmp_path / "pat.csv").open())]
    assert az == sorted(az)


def test_eval_entropy_of_point_image(tmp_path, capsys):
    from rosar.imaging import ImageGrid, SarImage

    px = np.zeros((3, 3), complex)
    px[1, 1] = 2.0
    formats.write_img1(tmp_path / "p.img1", SarImage(ImageGrid.polar([1, 2, 3], [1, 2, 3]), px, "BPA"))
    assert main(["eval", str(tmp_path / "p.img1"), "-o", str(tmp_path / "r")]) == 0
    rows = list(csv.DictReader((tmp_path / "r.csv").open()))
    ent = [float(r["value"]) for r in rows if r["metric"] == "entropy"]
    assert ent == [0.0]
    assert main(["eval", str(tmp_path / "p.img1"), "--pattern-bin", "3"]) == 1
