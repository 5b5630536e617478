import json
import urllib.request

import numpy as np
import pytest

from uqsynth.service.api import ApiError, QueryService, ServiceConfig
from uqsynth.service.cli import main
from uqsynth.service.server import serve_background
from uqsynth.sweep import load_records


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """gen-data -> train-mc -> train-ensemble -> sweep -> demo1d, tiny scale."""
    root = tmp_path_factory.mktemp("pipeline")
    data = root / "data"
    model_flags = ["--resolution", "16", "--fc-widths", "8,16",
                   "--base-channels", "8", "--epochs", "2", "--batch-size", "8"]
    assert main(["gen-data", "--out", str(data), "--volume", "blobs",
                 "--dims", "16,16,16", "--resolution", "16",
                 "--n-train", "12", "--n-test", "4", "--seed", "3"]) == 0
    assert main(["train-mc", "--data", str(data), "--out", str(root / "mc.ckpt"),
                 "--eta", "0.2", "--seed", "4", *model_flags]) == 0
    assert main(["train-ensemble", "--data", str(data), "--out", str(root / "ens"),
                 "--members", "2", "--seed", "5", *model_flags]) == 0
    assert main(["sweep", "--data", str(data), "--mc", str(root / "mc.ckpt"),
                 "--ensemble", str(root / "ens"), "--grid", "3x2", "--m", "3",
                 "--seed", "6", "--out", str(root / "sw")]) == 0
    assert main(["demo1d", "--out", str(root / "demo"), "--iterations", "60",
                 "--m", "6", "--ensemble-size", "2", "--seed", "7"]) == 0
    return root


def test_gen_data_layout(pipeline):
    data = pipeline / "data"
    assert (data / "volume.raw").exists() and (data / "volume.json").exists()
    assert (data / "train" / "manifest.json").exists()
    assert (data / "test" / "images.bin").exists()


def test_ensemble_members_have_distinct_seeds(pipeline):
    from uqsynth.autodiff.container import read_container

    seeds = []
    for path in sorted((pipeline / "ens").glob("member_*.ckpt")):
        header, _ = read_container(path)
        seeds.append(header["config"]["seed"])
    assert len(seeds) == 2
    assert len(set(seeds)) == 2


def test_train_ensemble_is_idempotent(pipeline, capsys):
    root = pipeline
    assert main(["train-ensemble", "--data", str(root / "data"), "--out",
                 str(root / "ens"), "--members", "2", "--seed", "5",
                 "--resolution", "16", "--fc-widths", "8,16", "--base-channels",
                 "8", "--epochs", "2", "--batch-size", "8"]) == 0
    out = capsys.readouterr().out
    assert out.count("skipping") == 2


def test_sweep_rerun_is_noop(pipeline):
    root = pipeline
    before = (root / "sw" / "records.bin").stat().st_mtime_ns
    assert main(["sweep", "--data", str(root / "data"), "--mc", str(root / "mc.ckpt"),
                 "--ensemble", str(root / "ens"), "--grid", "3x2", "--m", "3",
                 "--seed", "6", "--out", str(root / "sw")]) == 0
    assert (root / "sw" / "records.bin").stat().st_mtime_ns == before


def test_singleton_grid_sweep(pipeline, tmp_path):
    root = pipeline
    assert main(["sweep", "--data", str(root / "data"), "--mc", str(root / "mc.ckpt"),
                 "--ensemble", str(root / "ens"), "--grid", "1x1", "--m", "3",
                 "--seed", "6", "--out", str(tmp_path / "sw1")]) == 0
    records = load_records(tmp_path / "sw1")
    assert len(records["mc_unc"]) == 1


def test_study_command(pipeline, tmp_path):
    root = pipeline
    out = tmp_path / "study.json"
    assert main(["study", "--axis", "mc_samples", "--values", "2,4",
                 "--data", str(root / "data"), "--mc", str(root / "mc.ckpt"),
                 "--m", "4", "--out", str(out), "--seed", "1"]) == 0
    rows = json.loads(out.read_text())["rows"]
    assert [r["value"] for r in rows] == [2, 4]


def test_cli_user_errors_exit_1(tmp_path):
    assert main(["train-mc", "--data", str(tmp_path / "nope"),
                 "--out", str(tmp_path / "x.ckpt")]) == 1
    assert main(["sweep", "--data", str(tmp_path / "nope"), "--mc", "x",
                 "--ensemble", "y", "--out", str(tmp_path / "sw")]) == 1
    assert main(["serve"]) == 1


def test_cli_config_file_supplies_defaults(pipeline, tmp_path):
    cfg = tmp_path / "conf.json"
    cfg.write_text(json.dumps({"axis": "mc_samples", "values": "2,3", "m": 3}))
    out = tmp_path / "s.json"
    assert main(["study", "--config", str(cfg), "--data", str(pipeline / "data"),
                 "--mc", str(pipeline / "mc.ckpt"), "--out", str(out)]) == 0
    assert [r["value"] for r in json.loads(out.read_text())["rows"]] == [2, 3]


# ---------------------------------------------------------------- query API


@pytest.fixture(scope="module")
def service(pipeline):
    return QueryService(ServiceConfig(
        sweep_dirs={"tiny": pipeline / "sw"},
        demo_dir=pipeline / "demo",
    ))


def test_datasets_endpoint(service):
    out = service.datasets()
    assert out["datasets"][0]["id"] == "tiny"
    assert out["datasets"][0]["grid"] == {"n_theta": 3, "n_phi": 2}


def test_heatmap_layout_contract(service, pipeline):
    out = service.heatmap("tiny", "mc_dropout", "uncertainty", "combined")
    assert len(out["values"]) == 6
    records = load_records(pipeline / "sw")
    np.testing.assert_allclose(out["values"], records["mc_unc"])
    assert out["min"] == pytest.approx(min(out["values"]))


def test_heatmap_channel_variants(service):
    r = service.heatmap("tiny", "ensemble", "error", "R")
    assert r["field"] == "ens_err_r"
    with pytest.raises(ApiError) as e:
        service.heatmap("tiny", "ensemble", "bogus", "combined")
    assert e.value.status == 400


def test_view_endpoint_lists_all_artifacts(service, pipeline):
    out = service.view("tiny", 1, 0)
    assert out["record"]["mc_unc"] >= 0
    for url in out["images"].values():
        rel = url.split("/files/tiny/")[1]
        assert (pipeline / "sw" / rel).exists(), f"dangling artifact {url}"
    with pytest.raises(ApiError) as e:
        service.view("tiny", 5, 0)
    assert e.value.status == 404


def test_select_ranked_by_combined_uncertainty(service):
    cells = [[i, j] for i in range(3) for j in range(2)]
    out = service.select("tiny", cells)
    keys = [r["mc_unc"] + r["ens_unc"] for r in out["records"]]
    assert keys == sorted(keys, reverse=True)
    assert service.select("tiny", [])["records"] == []


def test_pcp_tuples_match_records_bin(service, pipeline):
    out = service.pcp("tiny")
    assert out["axes"] == ["mc_unc", "mc_err", "mc_errstd",
                           "ens_unc", "ens_err", "ens_errstd"]
    records = load_records(pipeline / "sw")
    for k, row in enumerate(out["rows"]):
        expected = [float(records[a][k]) for a in out["axes"]]
        assert row == expected


def test_sensitivity_endpoint(service):
    mean = service.sensitivity("tiny", "mc_dropout", "mean")
    std = service.sensitivity("tiny", "mc_dropout", "std")
    assert mean["field"] == "mc_sens" and std["field"] == "mc_sens_std"
    with pytest.raises(ApiError) as e:
        service.sensitivity("tiny", "mc_dropout", "median")
    assert e.value.status == 400


def test_demo1d_endpoint(service):
    out = service.demo1d()
    assert set(out["methods"]) == {"mc_dropout", "ensemble"}
    assert len(out["methods"]["mc_dropout"]["x"]) == 200


def test_unknown_dataset_404(service):
    with pytest.raises(ApiError) as e:
        service.heatmap("nope", "mc_dropout", "uncertainty", "combined")
    assert e.value.status == 404


def test_incomplete_sweep_409(pipeline, tmp_path):
    import shutil

    broken = tmp_path / "broken"
    shutil.copytree(pipeline / "sw", broken)
    manifest = json.loads((broken / "manifest.json").read_text())
    manifest["complete"] = False
    (broken / "manifest.json").write_text(json.dumps(manifest))
    svc = QueryService(ServiceConfig(sweep_dirs={"b": broken}))
    with pytest.raises(ApiError) as e:
        svc.heatmap("b", "mc_dropout", "uncertainty", "combined")
    assert e.value.status == 409


def test_http_round_trip(pipeline):
    svc = QueryService(ServiceConfig(sweep_dirs={"tiny": pipeline / "sw"},
                                     demo_dir=pipeline / "demo"))
    server, port = serve_background(svc)
    try:
        base = f"http://127.0.0.1:{port}"
        with urllib.request.urlopen(f"{base}/datasets") as resp:
            data = json.loads(resp.read())
        assert data["datasets"][0]["id"] == "tiny"

        with urllib.request.urlopen(
            f"{base}/heatmap?dataset=tiny&method=ensemble&quantity=error&channel=combined"
        ) as resp:
            hm = json.loads(resp.read())
        assert len(hm["values"]) == 6

        req = urllib.request.Request(
            f"{base}/select",
            data=json.dumps({"dataset": "tiny", "cells": [[0, 0], [1, 1]]}).encode(),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        with urllib.request.urlopen(req) as resp:
            sel = json.loads(resp.read())
        assert len(sel["records"]) == 2

        view = json.loads(urllib.request.urlopen(
            f"{base}/view?dataset=tiny&i=0&j=0").read())
        img_url = view["images"]["gt"]
        with urllib.request.urlopen(f"{base}{img_url}") as resp:
            assert resp.read()[:8] == b"\x89PNG\r\n\x1a\n"

        # identical queries return identical bytes
        a = urllib.request.urlopen(f"{base}/pcp?dataset=tiny").read()
        b = urllib.request.urlopen(f"{base}/pcp?dataset=tiny").read()
        assert a == b

        with pytest.raises(urllib.error.HTTPError) as e:
            urllib.request.urlopen(f"{base}/view?dataset=tiny&i=9&j=9")
        assert e.value.code == 404
    finally:
        server.shutdown()
