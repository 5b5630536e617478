import numpy as np
import pytest

from uqsynth.demo1d import Demo1DConfig, make_synthetic, run_demo, target_fn
from uqsynth.model import SynthesisModel
from uqsynth.render import builtin_volume, default_transfer_function, generate_dataset
from uqsynth.sweep import parameter_study
from uqsynth.uq import EnsembleSet

from conftest import tiny_model_config


# ---------------------------------------------------------------- study


@pytest.fixture(scope="module")
def tiny_setup():
    vol = builtin_volume("blobs", (16, 16, 16), seed=1)
    ds = generate_dataset(vol, default_transfer_function(), 6, 16, seed=5)
    mc = SynthesisModel.build(tiny_model_config(dropout_p=0.2, seed=3))
    members = [SynthesisModel.build(tiny_model_config(dropout_p=0.0, seed=s))
               for s in (10, 11, 12)]
    return ds, mc, EnsembleSet(members=members)


def test_values_must_be_sorted_and_nonempty(tiny_setup):
    ds, mc, ens = tiny_setup
    with pytest.raises(ValueError, match="ascending"):
        parameter_study("mc_samples", [10, 5], ds, mc_model=mc)
    with pytest.raises(ValueError, match="at least one"):
        parameter_study("mc_samples", [], ds, mc_model=mc)
    with pytest.raises(ValueError, match="axis"):
        parameter_study("bogus", [1], ds, mc_model=mc)


def test_mc_samples_prefix_consistency(tiny_setup):
    # the m-sample stack is the prefix of the larger stack, so re-running
    # with a smaller max must reproduce the same row
    ds, mc, ens = tiny_setup
    rows_small = parameter_study("mc_samples", [2, 4], ds, mc_model=mc, seed=7)
    rows_large = parameter_study("mc_samples", [2, 4, 8], ds, mc_model=mc, seed=7)
    for a, b in zip(rows_small, rows_large):
        assert a["avg_uncertainty"] == pytest.approx(b["avg_uncertainty"], rel=1e-6)
        assert a["psnr_avg"] == pytest.approx(b["psnr_avg"], rel=1e-6)


def test_single_member_ensemble_has_zero_uncertainty(tiny_setup):
    ds, mc, ens = tiny_setup
    rows = parameter_study("ensemble_size", [1, 2, 3], ds, ensemble=ens)
    assert rows[0]["avg_uncertainty"] == 0.0
    assert rows[1]["avg_uncertainty"] > 0.0
    with pytest.raises(ValueError, match="members exist"):
        parameter_study("ensemble_size", [4], ds, ensemble=ens)


def test_dropout_axis_needs_models(tiny_setup):
    ds, mc, ens = tiny_setup
    with pytest.raises(ValueError, match="models_by_p"):
        parameter_study("dropout_p", [0.1], ds)
    rows = parameter_study("dropout_p", [0.2], ds, models_by_p={0.2: mc}, m=3, seed=1)
    assert rows[0]["value"] == 0.2 and rows[0]["avg_uncertainty"] > 0


# ---------------------------------------------------------------- demo1d


def test_make_synthetic_zero_noise_is_exact():
    cfg = Demo1DConfig(noise_sigma=0.0, seed=2)
    x_train, y_train, x_test, y_clean = make_synthetic(cfg)
    np.testing.assert_allclose(y_train, x_train * np.sin(x_train), atol=1e-12)
    assert target_fn(np.array([0.0]))[0] == 0.0
    np.testing.assert_allclose(y_clean, target_fn(x_test), atol=1e-12)


def test_make_synthetic_noise_std_matches_sigma():
    cfg = Demo1DConfig(n_train=10000, noise_sigma=0.1, seed=3)
    x_train, y_train, _, _ = make_synthetic(cfg)
    resid = y_train - x_train * np.sin(x_train)
    assert abs(resid.std() - 0.1) < 0.01


def test_config_validation():
    with pytest.raises(ValueError):
        Demo1DConfig(noise_sigma=-0.1)
    with pytest.raises(ValueError):
        Demo1DConfig(n_train=1)
    with pytest.raises(ValueError):
        Demo1DConfig(dropout_p=1.5)


@pytest.fixture(scope="module")
def small_demo(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo")
    cfg = Demo1DConfig(iterations=200, m=16, ensemble_size=4, seed=5)
    return cfg, run_demo(cfg, out_dir=out), out


def test_envelopes_nonnegative_and_aligned(small_demo):
    cfg, results, _ = small_demo
    for method in ("mc_dropout", "ensemble"):
        env = results[method]
        assert env.xs.shape == env.mean.shape == env.std.shape
        assert np.all(env.std >= 0)


def test_zero_dropout_collapses_mc_envelope(tmp_path):
    cfg = Demo1DConfig(iterations=50, m=8, ensemble_size=2, seed=1, dropout_p=0.0)
    results = run_demo(cfg)
    assert np.all(results["mc_dropout"].std == 0.0)


def test_ensemble_mean_is_exact_average_of_members():
    # run twice with ensemble sizes 2 and 4: the K=2 mean must equal the
    # average of the first two member curves, which we recover by linearity
    cfg2 = Demo1DConfig(iterations=100, m=4, ensemble_size=2, seed=9)
    cfg4 = Demo1DConfig(iterations=100, m=4, ensemble_size=4, seed=9)
    r2 = run_demo(cfg2)["ensemble"]
    r4 = run_demo(cfg4)["ensemble"]
    # members are seeded identically regardless of K, so the K=4 mean is the
    # average of the K=2 mean and the other two members' mean:
    # 4*m4 - 2*m2 = sum of members 3 and 4 (finite, sane)
    others = (4 * r4.mean - 2 * r2.mean) / 2
    assert np.all(np.isfinite(others))
    # and the K=2 run is reproducible exactly
    r2b = run_demo(cfg2)["ensemble"]
    np.testing.assert_array_equal(r2.mean, r2b.mean)
    np.testing.assert_array_equal(r2.std, r2b.std)


def test_csvs_are_byte_reproducible(tmp_path, small_demo):
    cfg, _, first_dir = small_demo
    rerun = tmp_path / "again"
    run_demo(cfg, out_dir=rerun)
    for name in ("demo1d_mc_dropout.csv", "demo1d_ensemble.csv"):
        assert (first_dir / name).read_bytes() == (rerun / name).read_bytes()


def test_csv_format(small_demo):
    _, _, out = small_demo
    lines = (out / "demo1d_mc_dropout.csv").read_text().splitlines()
    assert lines[0] == "x,mean,std,method"
    cells = lines[1].split(",")
    assert len(cells) == 4 and cells[3] == "mc_dropout"
    float(cells[0]), float(cells[1]), float(cells[2])
