import json

import numpy as np
import pytest

from secc import ConfigurationError, TwoGaussPrior
from secc.amp import decode_signal
from secc.channel import corrupt, gaussian_signal
from secc.cli import main
from secc.coding import SeedSpec, encode, homogeneous_profile, make_code
from secc.experiments import (
    ExperimentConfig,
    run_histogram,
    run_image_demo,
    run_instance,
    run_sweep,
    wilson_interval,
)
from secc.io import read_pgm, write_pgm
from secc.seeding import instance_seed


def small(**kw):
    base = dict(N=32, rates=(0.5,), instances=3, rho=0.1, eps=1e-6)
    base.update(kw)
    return ExperimentConfig(**base)


def test_wilson_interval():
    lo, hi = wilson_interval(0, 10)
    assert lo == 0.0 and 0.2 < hi < 0.35
    lo, hi = wilson_interval(10, 10)
    assert hi == 1.0 and 0.65 < lo < 0.8
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.4038, abs=1e-3) and hi == pytest.approx(0.5962, abs=1e-3)


@pytest.mark.parametrize(
    "kw",
    [dict(instances=0), dict(success_threshold=0.0), dict(method="lasso"), dict(rates=(1.2,)), dict(rho=0.0), dict(threads=0)],
)
def test_invalid_configs_fail_up_front(kw):
    with pytest.raises((ConfigurationError, ValueError)):
        small(**kw)


def test_sweep_summary_consistent_with_records():
    cfg = small(rates=(0.5, 0.75), method="both")
    rows, records = run_sweep(cfg)
    assert len(records) == 2 * 2 * cfg.instances
    for N, R, dec, n, k, frac, lo, hi in rows:
        sel = [r for r in records if r.rate == R and r.decoder == dec]
        assert n == len(sel)
        assert k == sum(r.status == "ok" and r.mse < cfg.success_threshold for r in sel)
        assert 0 <= lo <= frac <= hi <= 1


def test_instances_replay_in_isolation():
    cfg = small(instances=4)
    _, records = run_sweep(cfg)
    again = run_instance(cfg, cfg.N, 0.5, 2)[0]
    assert again.row() == records[2].row()
    assert again.instance_seed == instance_seed(cfg.seed, 2)


def test_decoders_share_the_channel_draw():
    cfg = small(instances=1, method="both")
    amp, l1 = run_instance(cfg, cfg.N, 0.5, 0)
    assert amp.instance_seed == l1.instance_seed


def test_fixed_matrix_flag_changes_only_the_code():
    a = run_instance(small(), 32, 0.5, 1)[0]
    b = run_instance(small(fixed_matrix=True), 32, 0.5, 1)[0]
    assert a.instance_seed == b.instance_seed
    assert a.mse != b.mse


def test_histogram_refuses_noiseless_channel():
    with pytest.raises(ConfigurationError, match="sweep"):
        run_histogram(small(eps=0.0))


def test_histogram_summary():
    records, summary = run_histogram(small(method="both"))
    for dec in ("amp", "l1"):
        vals = [r.rho_ideal for r in records if r.decoder == dec]
        assert summary[dec][0] == pytest.approx(np.mean(vals))
        assert summary[dec][1] == pytest.approx(np.std(vals))


def test_seeded_config_tracks_rate():
    spec = SeedSpec(L=4, W=1, J=0.2, alpha_seed=0.5, alpha_bulk=0.3)
    cfg = small(N=200, rates=(0.6,), seed_spec=spec)
    prof = cfg.profile(200, 0.6)
    assert prof.M == round(200 / 0.6) and prof.N == 200 and prof.L_c == 4


def gradient_image(h=32, w=48):
    y, x = np.mgrid[0:h, 0:w]
    return 100 + 50 * np.sin(x / 5.0) * np.cos(y / 3.0)


def test_image_demo_noiseless_is_faithful():
    img = gradient_image()
    res = run_image_demo(img, small(N=256, method="amp"), patch=16, noiseless=True)
    assert np.max(np.abs(res.reconstructed - img)) <= 1e-10 * np.abs(img).max()


def test_image_demo_constant_patches():
    img = np.full((32, 32), 77.0)
    res = run_image_demo(img, small(N=256), patch=16)
    assert all(r.status == "constant" for r in res.records)
    np.testing.assert_array_equal(res.reconstructed, img)


def test_image_demo_recovers_through_noise():
    img = gradient_image()
    res = run_image_demo(img, small(N=256), patch=16)
    assert np.median([r.mse for r in res.records]) <= 1e-4
    assert np.mean([r.naive_mse for r in res.records]) > 1e-2


def test_image_demo_dimension_check():
    with pytest.raises(ConfigurationError):
        run_image_demo(np.zeros((30, 32)), small(N=256), patch=16)


# ------------------------------------------------------------------- CLI


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_cli_pipeline_matches_library(tmp_path, capsys):
    d = tmp_path
    assert run_cli(capsys, "codegen", "--N", 64, "--rate", 0.5, "--seed", 1, "--out", d / "c.bin")[0] == 0
    assert run_cli(capsys, "encode", "--code", d / "c.bin", "--seed", 2, "--signal-out", d / "x.bin",
                   "--out", d / "y.bin")[0] == 0
    assert run_cli(capsys, "corrupt", "--in", d / "y.bin", "--rho", 0.1, "--eps", 1e-6, "--seed", 3,
                   "--out", d / "yt.bin", "--ideal-out", d / "yi.bin")[0] == 0
    code, out = run_cli(capsys, "decode", "--code", d / "c.bin", "--in", d / "yt.bin", "--rho", 0.1,
                        "--eps", 1e-6, "--truth", d / "x.bin", "--ideal", d / "yi.bin", "--method", "both")
    assert code == 0
    lines = [json.loads(s) for s in out.out.splitlines()]
    assert [r["method"] for r in lines] == ["amp", "l1"]

    prior = TwoGaussPrior(0.1, 1e-6)
    pair = make_code(homogeneous_profile(0.5, 128), 1)
    x = gaussian_signal(64, 2)
    draw = corrupt(encode(pair, x), prior, 3)
    x_hat, rep = decode_signal(pair, draw.y_tilde, prior)
    assert lines[0]["mse"] == float(np.mean((x_hat - x) ** 2))
    assert lines[0]["iterations"] == rep.iterations


def test_cli_sweep_is_byte_identical_across_threads(tmp_path, capsys):
    args = ["sweep", "--N", 32, "--rates", "0.5,0.7", "--instances", 4, "--method", "both", "--seed", 7]
    assert run_cli(capsys, *args, "--out", tmp_path / "a.csv", "--threads", 1)[0] == 0
    assert run_cli(capsys, *args, "--out", tmp_path / "b.csv", "--threads", 2)[0] == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.records.csv").read_bytes() == (tmp_path / "b.records.csv").read_bytes()
    assert (tmp_path / "a.csv").read_text().startswith("# config: {")


def test_cli_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("N = 32\nrates = 0.5\ninstances = 2\nrho = 0.1\neps = 1e-6\n")
    code, out = run_cli(capsys, "sweep", "--config", cfg)
    assert code == 0
    assert out.out.splitlines()[1].startswith("N,rate,decoder")


def test_cli_exit_codes(tmp_path, capsys):
    assert run_cli(capsys, "histogram", "--N", 32, "--rates", 0.5, "--eps", 0)[0] == 2
    assert run_cli(capsys, "sweep", "--N", 32, "--rates", 1.5)[0] == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("bogus_key = 3\n")
    assert run_cli(capsys, "sweep", "--config", bad)[0] == 2
    assert run_cli(capsys, "decode", "--code", tmp_path / "missing.bin", "--in", tmp_path / "x.bin")[0] == 2


def test_cli_strict_divergence(tmp_path, capsys):
    d = tmp_path
    run_cli(capsys, "codegen", "--N", 16, "--rate", 0.5, "--out", d / "c.bin")
    from secc.io import save_vector

    v = np.zeros(32)
    v[0] = np.nan
    save_vector(d / "y.bin", v)
    code, out = run_cli(capsys, "decode", "--code", d / "c.bin", "--in", d / "y.bin")
    assert code == 0 and json.loads(out.out)["status"] == "diverged"
    assert run_cli(capsys, "decode", "--code", d / "c.bin", "--in", d / "y.bin", "--strict")[0] == 3


def test_cli_se_trajectory(capsys):
    code, out = run_cli(capsys, "se", "--alpha", 0.3, "--rho", 0.1, "--eps", 0)
    lines = out.out.splitlines()
    assert code == 0 and lines[1] == "t,E_1" and lines[2] == "0,0.1"
    code, out = run_cli(capsys, "se", "--seeded", "--rho", 0.1, "--eps", 1e-6, "--max-iter", 5)
    assert out.out.splitlines()[1].startswith("t,E_1,E_2") and len(out.out.splitlines()) == 8


def test_cli_image_demo(tmp_path, capsys):
    write_pgm(tmp_path / "in.pgm", gradient_image(32, 32))
    code, out = run_cli(capsys, "image-demo", "--image", tmp_path / "in.pgm", "--patch", 16, "--rates", 0.5,
                        "--out", tmp_path / "demo")
    assert code == 0
    rec, _ = read_pgm(tmp_path / "demo.recon.pgm")
    assert rec.shape == (32, 32)
    assert (tmp_path / "demo.patches.csv").exists()
    assert json.loads(out.out)["patches"] == 4
