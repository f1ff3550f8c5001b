"""Config parsing and CLI subcommand tests (in-process via main())."""
import json
import math

import pytest

from ratsemi.cli import main
from ratsemi.config import emit, parse, parse_file
from ratsemi.errors import ConfigError

import oracles


# ---------------------------------------------------------------------------
# config fixtures


def gen_poly(coeffs):
    """Multimap generator from ascending real coefficients."""
    return {"num": [[float(c), 0.0] for c in coeffs]}


Z2 = gen_poly([0, 0, 1])
Z3 = gen_poly([0, 0, 0, 1])


def family_similarity(vertices, lam=None):
    gens = []
    for p in vertices:
        gens.append(
            {
                "num": [[[-p.real, -p.imag], [p.real, p.imag]], [[1.0, 0.0]]],
                "den": [[[0.0, 0.0], [1.0, 0.0]]],
            }
        )
    fam = {
        "generators": gens,
        "domain": {"kind": "rect", "re_min": -0.99, "re_max": 0.99,
                   "im_min": -0.99, "im_max": 0.99},
        "excluded": [[0.0, 0.0]],
    }
    if lam is not None:
        fam["lam"] = [lam.real, lam.imag]
    return fam


def family_scaled_square(lam=None):
    fam = {
        "generators": [
            {"num": [[[0.0, 0.0]], [[0.0, 0.0]], [[1.0, 0.0]]]},
            {"num": [[[0.0, 0.0]], [[0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]},
        ],
        "domain": {"kind": "rect", "re_min": -0.99, "re_max": 0.99,
                   "im_min": -0.99, "im_max": 0.99},
    }
    if lam is not None:
        fam["lam"] = [lam.real, lam.imag]
    return fam


def write_cfg(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


# ---------------------------------------------------------------------------
# config parsing


def test_defaults_and_seed_propagation():
    cfg = parse(json.dumps({"multimap": {"generators": [Z2]}}))
    assert cfg.data["thermo"]["depth"] == 10
    assert cfg.data["thermo"]["rng_seed"] == 0
    assert cfg.data["julia"]["cap"] == 200_000
    assert cfg.data["render"]["out"] == "julia.ppm"
    assert cfg.data["region"] is None
    assert cfg.data["multimap"]["generators"][0]["den"] == [[1.0, 0.0]]

    cfg = parse(json.dumps({"rng_seed": 7, "multimap": {"generators": [Z2]}}))
    assert cfg.data["thermo"]["rng_seed"] == 7
    assert cfg.data["julia"]["rng_seed"] == 7

    cfg = parse(
        json.dumps(
            {"rng_seed": 7, "julia": {"rng_seed": 3}, "multimap": {"generators": [Z2]}}
        )
    )
    assert cfg.data["julia"]["rng_seed"] == 3
    assert cfg.data["thermo"]["rng_seed"] == 7


def test_round_trip_is_lossless():
    rich = {
        "rng_seed": 11,
        "family": family_similarity(oracles.TRIANGLE_UNIT, lam=complex(0.4, 0.1)),
        "thermo": {"depth": 8, "cap": 5000, "force": True, "basepoint": [1.0, 0.5]},
        "render": {"width": 100, "height": 80, "viewport": [-2.0, 2.0, -2.0, 2.0]},
        "region": {"kind": "triangle",
                   "vertices": [[0.0, 0.0], [1.0, 0.0], [0.5, 0.8]]},
        "osc": {"variant": "separating", "epsilon": 0.01, "grid_n": 128},
        "grid": {"re_min": 0.2, "re_max": 0.45, "re_n": 5,
                 "im_min": -0.1, "im_max": 0.1, "im_n": 5},
        "boxdim": {"scale_count": 4, "viewport": None},
        "t_values": [0.0, 2.5],
        "poincare_N": 5,
        "lyap_h": 1e-4,
        "sweep": {"out": "s.csv", "smooth_line": ["col", 2]},
    }
    cfg = parse(json.dumps(rich))
    again = parse(emit(cfg))
    assert again == cfg
    assert parse(emit(again)) == again


def test_config_rejections():
    ok = {"multimap": {"generators": [Z2]}}
    bad = [
        {"multimap": {"generators": [Z2]}, "typo_key": 1},
        {"multimap": {"generators": [Z2]}, "family": family_scaled_square()},
        {},
        {"multimap": {"generators": []}},
        {"multimap": {"generators": [{"num": [[1, 0, 3]]}]}},
        {**ok, "thermo": {"depth": 1}},
        {**ok, "thermo": {"depth": True}},
        {**ok, "osc": {"variant": "fuzzy"}},
        {**ok, "t_values": []},
        {**ok, "grid": {"re_min": 0.0}},
        {**ok, "sweep": {"smooth_line": ["diag", 0]}},
        {**ok, "render": {"viewport": [1.0, -1.0, 0.0, 1.0]}},
        {**ok, "region": {"kind": "square"}},
    ]
    parse(json.dumps(ok))
    for raw in bad:
        with pytest.raises(ConfigError):
            parse(json.dumps(raw))
    with pytest.raises(ConfigError):
        parse("not json {")
    with pytest.raises(ConfigError):
        parse("[1, 2]")


def test_builders():
    cfg = parse(json.dumps({
        "multimap": {"generators": [Z2, Z3]},
        "region": {"kind": "annulus", "center": [0.0, 0.0], "r1": 1.0, "r2": 2.0},
        "grid": {"re_min": 0.0, "re_max": 1.0, "re_n": 3,
                 "im_min": 0.0, "im_max": 0.0, "im_n": 1},
        "thermo": {"basepoint": [2.0, 0.0]},
    }))
    mm = cfg.multimap()
    assert mm.degrees == (2, 3)
    U = cfg.region()
    assert U.r1 == 1.0 and U.r2 == 2.0
    grid = cfg.grid_spec()
    assert grid.re_n == 3 and grid.im_n == 1
    assert cfg.basepoint() == complex(2.0, 0.0)
    tc = cfg.thermo_config()
    assert tc.depth == 10 and tc.cap == 200_000

    fam_cfg = parse(json.dumps({"family": family_scaled_square(lam=complex(0.5, 0))}))
    mm = fam_cfg.multimap()
    assert mm.map_for(2)(2.0).value == pytest.approx(2.0)

    no_lam = parse(json.dumps({"family": family_scaled_square()}))
    with pytest.raises(ConfigError, match="lam"):
        no_lam.multimap()
    with pytest.raises(ConfigError, match="region"):
        no_lam.region()
    with pytest.raises(ConfigError, match="grid"):
        no_lam.grid_spec()
    with pytest.raises(ConfigError, match="family"):
        parse(json.dumps({"multimap": {"generators": [Z2]}})).family_spec()

    collinear = parse(json.dumps({
        "multimap": {"generators": [Z2]},
        "region": {"kind": "triangle",
                   "vertices": [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]},
    }))
    with pytest.raises(ConfigError, match="collinear"):
        collinear.region()

    degenerate = parse(json.dumps({
        "multimap": {"generators": [{"num": [[1.0, 0.0]]}]},
    }))
    with pytest.raises(ConfigError, match="degree"):
        degenerate.multimap()


# ---------------------------------------------------------------------------
# CLI subcommands


def test_cli_bowen_power_pair(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "multimap": {"generators": [Z2, Z2]},
        "thermo": {"depth": 8, "cap": 20000, "hyper_depth": 5, "hyper_cap": 20000},
    })
    out_csv = str(tmp_path / "bowen.csv")
    assert main(["bowen", "--config", path, "--out", out_csv]) == 0
    out = capsys.readouterr().out
    delta_line = next(l for l in out.splitlines() if l.startswith("delta = "))
    delta = float(delta_line.split()[2])
    assert delta == pytest.approx(2.0, abs=5e-3)
    assert "hyperbolicity pass" in out
    assert "note:" not in out
    csv = open(out_csv).read()
    assert csv.startswith("delta,bracket_lo,bracket_hi,")
    assert float(csv.splitlines()[1].split(",")[0]) == pytest.approx(delta)


def test_cli_bowen_supercritical_note(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "multimap": {
            "generators": [Z2, gen_poly([0, 0, 0.25]), gen_poly([0, 0, 1.0 / 3.0])]
        },
        "thermo": {"depth": 8, "cap": 20000, "hyper_depth": 5, "hyper_cap": 20000},
    })
    assert main(["bowen", "--config", path]) == 0
    out = capsys.readouterr().out
    delta = float(next(l for l in out.splitlines() if l.startswith("delta"))
                  .split()[2])
    assert delta > 2.0
    assert "note: delta exceeds 2" in out


def test_cli_bowen_no_sign_change_exit_4(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "multimap": {"generators": [gen_poly([0, 2]), gen_poly([0, 0.5])]},
        "thermo": {"depth": 6, "cap": 5000},
    })
    assert main(["bowen", "--config", path]) == 4
    assert "error" in capsys.readouterr().err


def test_cli_bowen_hyperbolicity_exit_7_and_force(tmp_path, capsys):
    base = {
        "multimap": {"generators": [Z2, gen_poly([-2, 0, 1])]},
        "thermo": {"depth": 8, "cap": 20000, "hyper_depth": 5, "hyper_cap": 20000},
    }
    path = write_cfg(tmp_path, base)
    assert main(["bowen", "--config", path]) == 7
    out = capsys.readouterr().out
    assert "hyperbolicity" in out and "pass" not in out.split("hyperbolicity")[1][:10]

    base["thermo"]["force"] = True
    path2 = write_cfg(tmp_path, base, name="forced.json")
    assert main(["bowen", "--config", path2]) == 0
    assert "delta = " in capsys.readouterr().out


def test_cli_pressure_csv(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "multimap": {"generators": [Z2]},
        "t_values": [0.0, 1.0, 2.0],
        "thermo": {"depth": 6, "cap": 5000},
    })
    out_file = str(tmp_path / "p.csv")
    assert main(["pressure", "--config", path, "--out", out_file]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0] == "t,value,residual,depth"
    assert len(lines) == 4
    vals = [float(l.split(",")[1]) for l in lines[1:]]
    assert vals[0] == pytest.approx(math.log(2.0), abs=1e-9)
    assert vals[1] == pytest.approx(0.0, abs=1e-9)
    assert vals[2] == pytest.approx(-math.log(2.0), abs=1e-9)
    assert open(out_file).read() == out


def test_cli_pressure_critical_basepoint_exit_5(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "multimap": {"generators": [Z2]},
        "t_values": [1.0],
        "thermo": {"depth": 6, "cap": 5000, "basepoint": [0.0, 0.0]},
    })
    assert main(["pressure", "--config", path]) == 5
    assert "error" in capsys.readouterr().err


def test_cli_poincare_partial_sum(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "multimap": {"generators": [Z2]},
        "t_values": [1.5],
        "poincare_N": 4,
        "thermo": {"cap": 5000},
    })
    assert main(["poincare", "--config", path]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,value,residual,depth"
    t, value, residual, depth = lines[1].split(",")
    want = sum(2.0 ** (-0.5 * n) for n in range(1, 5))
    assert float(value) == pytest.approx(want, abs=1e-9)
    assert float(residual) < 1e-9
    assert depth == "4"


def test_cli_lyap_csv(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "multimap": {"generators": [Z2]},
        "t_values": [1.0],
        "thermo": {"depth": 6, "cap": 5000},
    })
    assert main(["lyap", "--config", path]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,value,residual,depth"
    assert float(lines[1].split(",")[1]) == pytest.approx(math.log(2.0), abs=1e-6)


def test_cli_osc_pass_and_fail(tmp_path, capsys):
    annulus_pass = write_cfg(tmp_path, {
        "multimap": {"generators": [Z3, gen_poly([0, 0, 0, 0.125])]},
        "region": {"kind": "annulus", "center": [0.0, 0.0], "r1": 0.99, "r2": 2.85},
        "osc": {"grid_n": 128},
    }, name="pass.json")
    assert main(["osc", "--config", annulus_pass]) == 0
    assert "osc pass" in capsys.readouterr().out

    annulus_fail = write_cfg(tmp_path, {
        "multimap": {"generators": [Z2, Z2]},
        "region": {"kind": "annulus", "center": [0.0, 0.0], "r1": 0.9, "r2": 1.1},
        "osc": {"grid_n": 64},
    }, name="fail.json")
    assert main(["osc", "--config", annulus_fail]) == 6
    out = capsys.readouterr().out
    assert "osc fail" in out
    assert "witness" in out


def test_cli_julia_render(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "family": family_scaled_square(lam=complex(0.5, 0)),
        "julia": {"depth": 8, "cap": 5000},
        "render": {"width": 64, "height": 64},
    })
    out = str(tmp_path / "annulus.ppm")
    assert main(["julia", "--config", path, "--out", out]) == 0
    text = capsys.readouterr().out
    assert "wrote" in text
    radial = next(l for l in text.splitlines() if l.startswith("radial range"))
    rmin, rmax = [float(x) for x in
                  radial.replace("radial range [", "").rstrip("]").split(",")]
    assert 0.99 <= rmin <= 1.01
    assert 1.9 <= rmax <= 2.01
    data = open(out, "rb").read()
    assert data.startswith(b"P6\n64 64\n255\n")
    assert len(data) == len(b"P6\n64 64\n255\n") + 64 * 64 * 3
    assert b"\x00" in data  # some black pixels exist


def test_cli_julia_deterministic_and_seed_sensitive(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "family": family_scaled_square(lam=complex(0.5, 0)),
        "julia": {"depth": 8, "cap": 5000},
        "render": {"width": 64, "height": 64,
                   "viewport": [-2.1, 2.1, -2.1, 2.1]},
    })
    a, b, c, d = (str(tmp_path / f"{n}.ppm") for n in "abcd")
    assert main(["julia", "--config", path, "--out", a]) == 0
    assert main(["julia", "--config", path, "--out", b, "--threads", "4"]) == 0
    assert main(["julia", "--config", path, "--out", c, "--seed", "0"]) == 0
    assert main(["julia", "--config", path, "--out", d, "--seed", "1"]) == 0
    capsys.readouterr()
    ba, bb, bc, bd = (open(p, "rb").read() for p in (a, b, c, d))
    assert ba == bb == bc
    assert bd != ba


def test_cli_julia_no_seed_exit_3(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "multimap": {"generators": [gen_poly([1, 1])]},
    })
    assert main(["julia", "--config", path]) == 3
    assert "error" in capsys.readouterr().err


def test_cli_sweep_similarity(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "family": family_similarity(oracles.TRIANGLE_UNIT),
        "grid": {"re_min": 0.3, "re_max": 0.42, "re_n": 3,
                 "im_min": 0.0, "im_max": 0.0, "im_n": 1},
        "thermo": {"depth": 8, "cap": 20000, "hyper_depth": 5, "hyper_cap": 20000},
    })
    out = str(tmp_path / "sweep.csv")
    assert main(["sweep", "--config", path, "--out", out]) == 0
    text = capsys.readouterr().out
    assert "submean" in text
    assert "smoothness" in text
    lines = open(out).read().splitlines()
    assert lines[0] == "re_lambda,im_lambda,delta,pressure_residual,depth,status"
    assert len(lines) == 4
    for line in lines[1:]:
        re_l, im_l, delta, resid, depth, status = line.split(",")
        assert status == "ok"
        want = math.log(3.0) / math.log(1.0 / abs(complex(float(re_l), float(im_l))))
        assert float(delta) == pytest.approx(want, abs=2e-2)


def test_cli_sweep_puncture_rows_still_written(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "family": family_scaled_square(),
        "grid": {"re_min": -0.2, "re_max": 0.2, "re_n": 3,
                 "im_min": 0.0, "im_max": 0.0, "im_n": 1},
        "thermo": {"depth": 6, "cap": 10000, "hyper_depth": 5, "hyper_cap": 10000},
    })
    out = str(tmp_path / "sweep.csv")
    assert main(["sweep", "--config", path, "--out", out]) == 0
    capsys.readouterr()
    lines = open(out).read().splitlines()
    assert len(lines) == 4
    mid = lines[2].split(",")
    assert mid[5] == "invalid-instance"
    assert mid[2] == "" and mid[3] == "" and mid[4] == ""
    assert lines[1].split(",")[5] == "ok"
    assert lines[3].split(",")[5] == "ok"


def test_cli_sweep_deterministic(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "family": family_scaled_square(),
        "grid": {"re_min": 0.4, "re_max": 0.5, "re_n": 2,
                 "im_min": 0.0, "im_max": 0.0, "im_n": 1},
        "thermo": {"depth": 6, "cap": 10000, "hyper_depth": 5, "hyper_cap": 10000},
    })
    a = str(tmp_path / "a.csv")
    b = str(tmp_path / "b.csv")
    assert main(["sweep", "--config", path, "--out", a]) == 0
    assert main(["sweep", "--config", path, "--out", b, "--threads", "8"]) == 0
    capsys.readouterr()
    assert open(a, "rb").read() == open(b, "rb").read()


def test_cli_boxdim_circle(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "multimap": {"generators": [Z2]},
        "julia": {"depth": 13},
        "boxdim": {"scale_count": 5},
    })
    assert main(["boxdim", "--config", path]) == 0
    out = capsys.readouterr().out
    slope = float(next(l for l in out.splitlines()
                       if l.startswith("box dimension slope")).split()[4])
    assert 0.9 <= slope <= 1.1
    assert "scale,count" in out


def test_cli_depth_flag_overrides(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "multimap": {"generators": [Z2, Z2]},
        "thermo": {"depth": 10, "cap": 20000, "hyper_depth": 5, "hyper_cap": 20000},
    })
    assert main(["bowen", "--config", path, "--depth", "6"]) == 0
    out = capsys.readouterr().out
    depth_line = next(l for l in out.splitlines() if l.startswith("depth = "))
    assert int(depth_line.split()[2].rstrip(",")) <= 6


def test_cli_config_error_exit_2(tmp_path, capsys):
    assert main(["bowen", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert main(["bowen", "--config", str(bad)]) == 2
    unknown = write_cfg(tmp_path, {"multimap": {"generators": [Z2]}, "zzz": 1},
                        name="unknown.json")
    assert main(["bowen", "--config", unknown]) == 2
    no_region = write_cfg(tmp_path, {"multimap": {"generators": [Z2]}},
                          name="noregion.json")
    assert main(["osc", "--config", no_region]) == 2
    mm_sweep = write_cfg(tmp_path, {"multimap": {"generators": [Z2]}},
                         name="mmsweep.json")
    assert main(["sweep", "--config", mm_sweep]) == 2
    no_lam = write_cfg(tmp_path, {"family": family_scaled_square()},
                       name="nolam.json")
    assert main(["julia", "--config", no_lam]) == 2
    err = capsys.readouterr().err
    assert "config error" in err


def test_demo_configs_parse_and_round_trip():
    import pathlib

    configs = sorted((pathlib.Path(__file__).parent.parent / "demos"
                      / "configs").glob("*.json"))
    assert len(configs) >= 5
    for path in configs:
        cfg = parse_file(str(path))
        assert parse(emit(cfg)) == cfg
        if "multimap" in cfg.data:
            cfg.multimap()
        else:
            cfg.family_spec()


def test_cli_verbose_echoes_normalized_config(tmp_path, capsys):
    path = write_cfg(tmp_path, {
        "multimap": {"generators": [Z2]},
        "t_values": [0.0],
        "thermo": {"depth": 6, "cap": 5000},
    })
    assert main(["pressure", "--config", path, "--verbose"]) == 0
    captured = capsys.readouterr()
    assert '"rng_seed"' in captured.err
    assert captured.out.startswith("t,value,residual,depth")
