"""Acceptance suite.

Desk configuration: 64^3 synthetic blobs volume, 32x32 images, 512 train /
128 test views, MC model eta=0.1 with m=50, ensemble K=8, 36x18 sweep grid.
Each criterion prints one PASS/FAIL line (collected again in the terminal
summary). Criteria 1, 2, 8 and 9 run standalone; 3-7 share the trained desk
artifacts built once per session through the real CLI. The linked-view UI
criterion (10) lives in frontend/ and runs under its own test runner.
"""

import json
import math
import time

import numpy as np
import pytest

from uqsynth.autodiff import Graph, Tensor, backward, functional as F
from uqsynth.autodiff.rng import mix_seed
from uqsynth.images import RgbImage
from uqsynth.model import ModelConfig, SynthesisModel, load_checkpoint
from uqsynth.render import ViewPoint
from uqsynth.render.dataset import load_dataset
from uqsynth.service.cli import main as cli
from uqsynth.sweep import load_records, parameter_study, pearson
from uqsynth.sweep.stats import evaluate_models
from uqsynth.uq import EnsembleSet, SampleStack, compute_bundle
from uqsynth.uq.sensitivity import sensitivity_deterministic

from conftest import record_criterion
from oracles import (
    batch_norm_train_naive,
    bundle_stats_naive,
    conv2d_naive,
    finite_difference_grads,
    synthesis_replica_f64,
    upsample2_naive,
)

DESK_EPOCHS = "64"
DESK_LR = "4.5e-4"
MODEL_FLAGS = ["--epochs", DESK_EPOCHS, "--lr", DESK_LR, "--resolution", "32",
               "--fc-widths", "64,512", "--base-channels", "64",
               "--batch-size", "64"]


@pytest.fixture(scope="session")
def desk(tmp_path_factory):
    """Desk-scale artifacts built through the CLI; stage timings recorded."""
    root = tmp_path_factory.mktemp("desk")
    data = root / "data"
    stages = {}

    t = time.time()
    assert cli(["gen-data", "--out", str(data), "--volume", "blobs",
                "--dims", "64,64,64", "--resolution", "32", "--n-train", "512",
                "--n-test", "128", "--seed", "11"]) == 0
    stages["gen_data"] = time.time() - t

    t = time.time()
    assert cli(["train-mc", "--data", str(data), "--out", str(root / "mc.ckpt"),
                "--eta", "0.1", "--seed", "202", *MODEL_FLAGS]) == 0
    assert cli(["train-ensemble", "--data", str(data), "--out", str(root / "ens"),
                "--members", "8", "--jobs", "2", "--seed", "404", *MODEL_FLAGS]) == 0
    stages["train"] = time.time() - t

    t = time.time()
    for eta in ("0.3", "0.5"):
        assert cli(["train-mc", "--data", str(data),
                    "--out", str(root / f"mc_eta{eta}.ckpt"),
                    "--eta", eta, "--seed", "202", *MODEL_FLAGS]) == 0
    stages["train_eta_variants"] = time.time() - t

    t = time.time()
    assert cli(["sweep", "--data", str(data), "--mc", str(root / "mc.ckpt"),
                "--ensemble", str(root / "ens"), "--grid", "36x18", "--m", "50",
                "--seed", "77", "--out", str(root / "sw")]) == 0
    stages["sweep"] = time.time() - t

    mc_model, _ = load_checkpoint(root / "mc.ckpt")
    members = [load_checkpoint(p)[0] for p in sorted((root / "ens").glob("member_*.ckpt"))]
    return {
        "root": root,
        "data": data,
        "mc": mc_model,
        "ensemble": EnsembleSet(members=members),
        "test_ds": load_dataset(data / "test"),
        "stages": stages,
    }


# ---------------------------------------------------------------------------
# criterion 1: autodiff correctness


def _grad_close(ad, fd, rtol=1e-3, atol=1e-3):
    return abs(ad - fd) <= rtol * max(abs(ad), abs(fd)) + atol


def _check_layer_ops(seed):
    """Every layer op against its float64 oracle at h=1e-3."""
    rng = np.random.default_rng(seed)
    failures = 0

    def run(build, f64_loss, tensors):
        nonlocal failures
        g = Graph()
        loss = build(g)
        for t in tensors:
            t.zero_grad()
        backward(g, loss)
        numeric = finite_difference_grads(f64_loss, [t.data for t in tensors])
        for t, fd in zip(tensors, numeric):
            for a, b in zip(t.grad.ravel(), fd.ravel()):
                if not _grad_close(float(a), float(b)):
                    failures += 1

    proj_of = {}

    def proj(shape):
        if shape not in proj_of:
            proj_of[shape] = rng.standard_normal(shape)
        return proj_of[shape]

    def ploss(g, out):
        return F.sum_all(g, F.mul(g, out, Tensor(proj(out.data.shape).astype(np.float32))))

    # dense
    x = Tensor(rng.standard_normal((3, 4)).astype(np.float32), requires_grad=True)
    w = Tensor(rng.standard_normal((4, 5)).astype(np.float32), requires_grad=True)
    b = Tensor(rng.standard_normal(5).astype(np.float32), requires_grad=True)
    run(lambda g: ploss(g, F.dense(g, x, w, b)),
        lambda: float(((x.data.astype(np.float64) @ w.data.astype(np.float64)
                        + b.data.astype(np.float64)) * proj((3, 5))).sum()),
        [x, w, b])
    # conv2d
    xc = Tensor(rng.standard_normal((2, 2, 4, 4)).astype(np.float32), requires_grad=True)
    wc = Tensor((0.5 * rng.standard_normal((3, 2, 3, 3))).astype(np.float32),
                requires_grad=True)
    bc = Tensor(rng.standard_normal(3).astype(np.float32), requires_grad=True)
    run(lambda g: ploss(g, F.conv2d(g, xc, wc, bc)),
        lambda: float((conv2d_naive(xc.data, wc.data, bc.data) * proj((2, 3, 4, 4))).sum()),
        [xc, wc, bc])
    # batch norm (train)
    xb = Tensor(rng.standard_normal((4, 2, 3, 3)).astype(np.float32), requires_grad=True)
    gb = Tensor((1 + 0.1 * rng.standard_normal(2)).astype(np.float32), requires_grad=True)
    bb = Tensor(rng.standard_normal(2).astype(np.float32), requires_grad=True)
    run(lambda g: ploss(g, F.batch_norm2d(g, xb, gb, bb, F.BatchNormState(2), "train")),
        lambda: float((batch_norm_train_naive(xb.data, gb.data, bb.data)
                       * proj((4, 2, 3, 3))).sum()),
        [xb, gb, bb])
    # upsample
    xu = Tensor(rng.standard_normal((1, 2, 3, 3)).astype(np.float32), requires_grad=True)
    run(lambda g: ploss(g, F.upsample_nearest2(g, xu)),
        lambda: float((upsample2_naive(xu.data) * proj((1, 2, 6, 6))).sum()), [xu])
    # elementwise: relu probes keep |x| >= 0.1 so h=1e-3 cannot cross the kink
    raw = rng.standard_normal(30)
    xe = Tensor((raw + 0.1 * np.sign(raw)).astype(np.float32), requires_grad=True)
    run(lambda g: ploss(g, F.relu(g, xe)),
        lambda: float((np.maximum(xe.data.astype(np.float64), 0) * proj((30,))).sum()),
        [xe])
    run(lambda g: ploss(g, F.tanh(g, xe)),
        lambda: float((np.tanh(xe.data.astype(np.float64)) * proj((30,))).sum()), [xe])
    return failures


def _check_full_model(seed):
    """2-block model, every parameter, vs the float64 architecture replica.

    Entries failing at h=1e-3 are re-measured at h=1e-5 then 1e-7: a kink
    inside the interval vanishes, a real gradient bug stays. The probe
    input is redrawn if the f32 network and the replica disagree on any
    ReLU activation pattern (FD is ill-posed at such borderline points).
    """
    cfg = ModelConfig(image_resolution=16, n_res_blocks=2, fc_widths=(6, 12),
                      base_channels=4, dropout_p=0.0, seed=seed)
    model = SynthesisModel.build(cfg)
    rng = np.random.default_rng(1000 + seed)

    for _ in range(20):  # find a probe with a stable activation pattern
        x = rng.uniform(-1, 1, (2, 2)).astype(np.float32)
        pre = []
        synthesis_replica_f64(model, x.astype(np.float64), collect_preacts=pre)
        if min(float(np.abs(a).min()) for a in pre) > 1e-6:
            break
    proj = rng.standard_normal((2, 3, 16, 16))

    g = Graph()
    out = model.forward(Tensor(x), graph=g, dropout_mode="off", bn_mode="train")
    loss = F.sum_all(g, F.mul(g, out, Tensor(proj.astype(np.float32))))
    for t in model.parameters():
        t.zero_grad()
    backward(g, loss)

    def f64_loss():
        return float((synthesis_replica_f64(model, x.astype(np.float64)) * proj).sum())

    def fd_at(flat, i, h):
        orig = flat[i]
        flat[i] = orig + h
        hi = float(flat[i])
        fp = f64_loss()
        flat[i] = orig - h
        lo = float(flat[i])
        fm = f64_loss()
        flat[i] = orig
        return (fp - fm) / (hi - lo)

    checked = kinks = failures = 0
    for name, t in model.params.items():
        flat = t.data.reshape(-1)
        grad = t.grad.reshape(-1)
        for i in range(flat.size):
            checked += 1
            ad = float(grad[i])
            if _grad_close(ad, fd_at(flat, i, 1e-3)):
                continue
            if any(_grad_close(ad, fd_at(flat, i, h2)) for h2 in (1e-5, 1e-7)):
                kinks += 1  # nondifferentiable inside the h=1e-3 interval
            else:
                failures += 1
    return checked, kinks, failures


def test_criterion_1_autodiff_correctness():
    t0 = time.time()
    layer_failures = sum(_check_layer_ops(seed) for seed in range(10))
    total = kinks = model_failures = 0
    for seed in range(10):
        c, k, f = _check_full_model(seed)
        total += c
        kinks += k
        model_failures += f
    elapsed = time.time() - t0
    passed = layer_failures == 0 and model_failures == 0 and elapsed < 120
    record_criterion(
        1, "autodiff gradients match central FD (h=1e-3, rel<1e-3, 10 seeds)",
        passed,
        f"{total} model params x 10 seeds, {kinks} kink-excluded "
        f"({100 * kinks / total:.1f}%), {model_failures} failures, "
        f"{layer_failures} layer-op failures, {elapsed:.0f}s",
    )
    assert layer_failures == 0
    assert model_failures == 0
    assert elapsed < 120


# ---------------------------------------------------------------------------
# criterion 2: bundle oracle equivalence


def test_criterion_2_bundle_oracle():
    t0 = time.time()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for case in range(100):
        m = (2, 3, 10)[case % 3]
        samples = rng.uniform(-1, 1, (m, 6, 5, 3)).astype(np.float32)
        gt = RgbImage(rng.uniform(-1, 1, (6, 5, 3)).astype(np.float32))
        bundle = compute_bundle(SampleStack(samples=samples, source={}), gt)
        ref = bundle_stats_naive(samples, gt.data)
        for got, want in (
            (bundle.channel_uncertainty, ref["channel_uncertainty"]),
            (bundle.combined_uncertainty, ref["combined_uncertainty"]),
            (bundle.channel_error, ref["channel_error"]),
            (bundle.combined_error, ref["combined_error"]),
            (bundle.channel_error_std, ref["channel_error_std"]),
            (bundle.combined_error_std, ref["combined_error_std"]),
        ):
            worst = max(worst, float(np.abs(got - want).max()))
    # degenerate stacks: identical samples -> exactly zero spread
    img = rng.uniform(-1, 1, (6, 5, 3)).astype(np.float32)
    degen = compute_bundle(SampleStack(samples=np.stack([img] * 4), source={}),
                           RgbImage(rng.uniform(-1, 1, (6, 5, 3)).astype(np.float32)))
    exact_zero = (np.all(degen.combined_uncertainty == 0.0)
                  and np.all(degen.combined_error_std == 0.0))
    elapsed = time.time() - t0
    passed = worst < 1e-6 and exact_zero
    record_criterion(2, "bundle matches flat-loop oracle on 100 stacks (1e-6)",
                     passed, f"worst |diff| {worst:.2e}, degenerate zeros "
                             f"{'exact' if exact_zero else 'VIOLATED'}, {elapsed:.1f}s")
    assert worst < 1e-6
    assert exact_zero


# ---------------------------------------------------------------------------
# criterion 3: sensitivity vs finite differences (trained model)


def test_criterion_3_sensitivity_fd(desk):
    """FD oracle on the float64 architecture replica at h=1e-6.

    The trained model's L1 norm is piecewise linear with kink spacing
    around 1e-4 in normalized view units (ReLU and |.| crossings), so a
    float32 secant at coarse h measures interval-average slope, not the
    derivative (median gap ~0.7%, tail to 9%). The float64 replica removes
    the noise floor so h can sit below the kink spacing; a per-axis
    one-sided symmetry screen redraws the rare probe that still straddles
    a kink.
    """
    t0 = time.time()
    model = desk["mc"]
    rng = np.random.default_rng(33)

    def l1_64(nv):
        out = synthesis_replica_f64(model, nv.reshape(1, 2), bn_mode="eval")
        return float(np.abs(out).sum())

    h = 1e-6
    worst = 0.0
    valid = redraws = 0
    while valid < 20:
        assert redraws < 100, "too many kink-adjacent probes"
        view = ViewPoint(float(rng.uniform(0, 360)), float(rng.uniform(-90, 90)))
        nv = np.array([view.theta / 180.0 - 1.0, view.phi / 90.0])
        fd_total = 0.0
        smooth = True
        for axis in range(2):
            e = np.zeros(2)
            e[axis] = h
            s0 = l1_64(nv)
            d_plus = (l1_64(nv + e) - s0) / h
            d_minus = (s0 - l1_64(nv - e)) / h
            if abs(d_plus - d_minus) > 0.003 * max(abs(d_plus), abs(d_minus), 1e-6):
                smooth = False
                break
            fd_total += abs(0.5 * (d_plus + d_minus))
        if not smooth:
            redraws += 1
            continue
        res = sensitivity_deterministic(model, view)
        worst = max(worst, abs(res.mean_sensitivity - fd_total) / fd_total)
        valid += 1
    elapsed = time.time() - t0
    passed = worst < 0.01 and elapsed < 60
    record_criterion(3, "dropout-off sensitivity matches FD of the L1 norm (<1%)",
                     passed, f"worst relative error {worst:.4%} over 20 views "
                             f"({redraws} kink redraws), {elapsed:.0f}s")
    assert worst < 0.01
    assert elapsed < 60


# ---------------------------------------------------------------------------
# criterion 4: MC sample-count saturation


def test_criterion_4_mc_saturation(desk):
    t0 = time.time()
    rows = parameter_study("mc_samples", [100, 200], desk["test_ds"],
                           mc_model=desk["mc"], seed=505)
    u100, u200 = rows[0]["avg_uncertainty"], rows[1]["avg_uncertainty"]
    rel = abs(u200 - u100) / u100
    elapsed = time.time() - t0
    passed = rel <= 0.05 and elapsed < 600
    record_criterion(4, "MC uncertainty saturates: |U(200)-U(100)| <= 5% U(100)",
                     passed, f"U(100)={u100:.5f} U(200)={u200:.5f} rel {rel:.3%}, "
                             f"{elapsed:.0f}s")
    assert rel <= 0.05
    assert elapsed < 600


# ---------------------------------------------------------------------------
# criterion 5: ensemble superiority direction


def test_criterion_5_ensemble_superiority(desk):
    table = evaluate_models(desk["mc"], desk["ensemble"], desk["test_ds"],
                            m=50, seed=606)
    ens_psnr = table["ensemble"]["psnr_avg"]
    mc_psnr = table["mc_dropout"]["psnr_avg"]

    # each member individually, aggregate-MSE PSNR over the test set
    member_psnrs = []
    for member in desk["ensemble"].members:
        acc = np.zeros(3)
        for view, gt in desk["test_ds"].entries:
            pred = member.predict(view)
            d = (pred.data.astype(np.float64) - gt.data.astype(np.float64)) * 0.5
            acc += [float(np.mean(d[:, :, c] ** 2)) for c in range(3)]
        mse_c = acc / len(desk["test_ds"])
        member_psnrs.append(float(np.mean([10 * math.log10(1 / m) for m in mse_c])))

    train_time = desk["stages"]["train"]
    passed = (all(ens_psnr >= p for p in member_psnrs) and ens_psnr >= mc_psnr
              and train_time < 900)
    record_criterion(
        5, "ensemble PSNR >= every member and >= MC-Dropout mean",
        passed,
        f"ensemble {ens_psnr:.2f} dB, members "
        f"[{min(member_psnrs):.2f}..{max(member_psnrs):.2f}], MC {mc_psnr:.2f}, "
        f"training {train_time:.0f}s",
    )
    assert all(ens_psnr >= p for p in member_psnrs)
    assert ens_psnr >= mc_psnr
    assert train_time < 900


# ---------------------------------------------------------------------------
# criterion 6: correlation structure on the desk sweep


def test_criterion_6_correlation_structure(desk):
    records = load_records(desk["root"] / "sw")
    r_mc = pearson(records["mc_unc"], records["mc_err"])
    r_ens = pearson(records["ens_unc"], records["ens_err"])
    r_cross = pearson(records["mc_unc"], records["ens_unc"])
    sweep_time = desk["stages"]["sweep"]
    passed = r_mc > 0.3 and r_ens > 0.3 and r_cross > 0.3 and sweep_time < 1200
    record_criterion(
        6, "Pearson r(uncertainty, error) > 0.3 per method; r(MC-Un, Ens-Un) > 0.3",
        passed,
        f"r(MC-Un,MC-Err)={r_mc:.3f} r(Ens-Un,Ens-Err)={r_ens:.3f} "
        f"r(MC-Un,Ens-Un)={r_cross:.3f}, sweep {sweep_time:.0f}s",
    )
    assert r_mc > 0.3 and r_ens > 0.3 and r_cross > 0.3
    assert sweep_time < 1200


# ---------------------------------------------------------------------------
# criterion 7: dropout-probability PSNR trend


def test_criterion_7_dropout_probability_trend(desk):
    psnrs = {}
    for eta, path in (("0.1", desk["root"] / "mc.ckpt"),
                      ("0.3", desk["root"] / "mc_eta0.3.ckpt"),
                      ("0.5", desk["root"] / "mc_eta0.5.ckpt")):
        model, _ = load_checkpoint(path)
        acc = np.zeros(3)
        for idx, (view, gt) in enumerate(desk["test_ds"].entries):
            from uqsynth.uq import mc_sample

            stack = mc_sample(model, view, 50, mix_seed(707, idx))
            mean = stack.samples.mean(axis=0)
            d = (mean.astype(np.float64) - gt.data.astype(np.float64)) * 0.5
            acc += [float(np.mean(d[:, :, c] ** 2)) for c in range(3)]
        mse_c = acc / len(desk["test_ds"])
        psnrs[eta] = float(np.mean([10 * math.log10(1 / m) for m in mse_c]))
    ok_01_03 = psnrs["0.3"] <= psnrs["0.1"] + 0.2
    ok_03_05 = psnrs["0.5"] <= psnrs["0.3"] + 0.2
    passed = ok_01_03 and ok_03_05
    record_criterion(
        7, "test PSNR non-increasing in dropout probability (0.2 dB allowance)",
        passed,
        f"eta 0.1: {psnrs['0.1']:.2f} dB, 0.3: {psnrs['0.3']:.2f}, 0.5: {psnrs['0.5']:.2f}",
    )
    assert ok_01_03 and ok_03_05


# ---------------------------------------------------------------------------
# criterion 8: 1-D regression demo


def test_criterion_8_demo1d(tmp_path):
    from uqsynth.demo1d import Demo1DConfig, run_demo, target_fn

    t0 = time.time()
    cfg = Demo1DConfig(seed=2026)  # paper regimen: 1000 iters, lr 1e-3, m=100, 50 members
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    results = run_demo(cfg, out_dir=out_a)
    run_demo(cfg, out_dir=out_b)

    clean = target_fn(results["mc_dropout"].xs)
    rmse_mc = float(np.sqrt(np.mean((results["mc_dropout"].mean - clean) ** 2)))
    rmse_ens = float(np.sqrt(np.mean((results["ensemble"].mean - clean) ** 2)))
    std_positive = bool((results["mc_dropout"].std > 0).all())
    byte_stable = all(
        (out_a / name).read_bytes() == (out_b / name).read_bytes()
        for name in ("demo1d_mc_dropout.csv", "demo1d_ensemble.csv")
    )
    elapsed = time.time() - t0
    passed = (rmse_mc < 0.5 and rmse_ens < 0.5 and std_positive and byte_stable
              and elapsed < 300)
    record_criterion(
        8, "1-D demo: RMSE < 0.5 both methods, MC std > 0, CSVs byte-stable",
        passed,
        f"rmse mc {rmse_mc:.3f} / ensemble {rmse_ens:.3f}, "
        f"min std {results['mc_dropout'].std.min():.4f}, "
        f"byte-stable {byte_stable}, {elapsed:.0f}s",
    )
    assert rmse_mc < 0.5 and rmse_ens < 0.5
    assert std_positive
    assert byte_stable
    assert elapsed < 300


# ---------------------------------------------------------------------------
# criterion 9: determinism and persistence


def test_criterion_9_determinism(tmp_path, desk):
    # reduced-scale train -> sweep, twice, byte-identical artifacts
    flags = ["--resolution", "16", "--fc-widths", "8,16", "--base-channels", "8",
             "--epochs", "4", "--batch-size", "16"]

    def run(tag):
        root = tmp_path / tag
        data = root / "data"
        assert cli(["gen-data", "--out", str(data), "--volume", "blobs",
                    "--dims", "16,16,16", "--resolution", "16", "--n-train", "48",
                    "--n-test", "8", "--seed", "9"]) == 0
        assert cli(["train-mc", "--data", str(data), "--out", str(root / "mc.ckpt"),
                    "--eta", "0.1", "--seed", "5", *flags]) == 0
        assert cli(["train-ensemble", "--data", str(data), "--out", str(root / "ens"),
                    "--members", "3", "--seed", "6", *flags]) == 0
        assert cli(["sweep", "--data", str(data), "--mc", str(root / "mc.ckpt"),
                    "--ensemble", str(root / "ens"), "--grid", "4x3", "--m", "5",
                    "--seed", "7", "--out", str(root / "sw")]) == 0
        return root

    a = run("a")
    b = run("b")
    same = {
        "mc.ckpt": (a / "mc.ckpt").read_bytes() == (b / "mc.ckpt").read_bytes(),
        "members": all(
            (a / "ens" / f"member_{k:02d}.ckpt").read_bytes()
            == (b / "ens" / f"member_{k:02d}.ckpt").read_bytes()
            for k in range(3)
        ),
        "records.bin": (a / "sw" / "records.bin").read_bytes()
        == (b / "sw" / "records.bin").read_bytes(),
        "manifest.json": (a / "sw" / "manifest.json").read_bytes()
        == (b / "sw" / "manifest.json").read_bytes(),
    }

    # desk checkpoint round-trip preserves predictions bit-exactly
    reloaded, _ = load_checkpoint(desk["root"] / "mc.ckpt")
    view = ViewPoint(123.4, -21.0)
    round_trip = np.array_equal(desk["mc"].predict(view).data,
                                reloaded.predict(view).data)

    passed = all(same.values()) and round_trip
    record_criterion(
        9, "seeded train->sweep byte-identical; checkpoint round-trip bit-exact",
        passed, f"{', '.join(k for k, v in same.items() if v)} identical; "
                f"round-trip {'bit-exact' if round_trip else 'MISMATCH'}",
    )
    assert all(same.values()), same
    assert round_trip
