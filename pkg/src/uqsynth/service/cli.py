"""Command-line entry points for the whole pipeline.

    uqsynth gen-data        render train/test datasets from a builtin volume
    uqsynth train-mc        train the MC-Dropout synthesis model
    uqsynth train-ensemble  train K ensemble members (distinct derived seeds)
    uqsynth sweep           dense view-space sweep over a trained pair
    uqsynth study           parameter studies (mc_samples | ensemble_size | dropout_p)
    uqsynth demo1d          the 1-D x*sin(x) regression demonstration
    uqsynth serve           read-only query API + explorer bundle

Every command accepts --config FILE (JSON with per-flag defaults; explicit
flags win) and is idempotent given identical seeds. Exit codes: 0 success,
1 user error, 2 internal error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np


class UserError(Exception):
    """Invalid invocation or missing inputs (exit code 1)."""


def _parse_grid(text: str):
    from ..sweep.grid import GridSpec

    try:
        n_theta, n_phi = (int(p) for p in text.lower().split("x"))
        return GridSpec(n_theta=n_theta, n_phi=n_phi)
    except (ValueError, TypeError) as e:
        raise UserError(f"--grid must look like 36x18, got {text!r}") from e


def _model_config(args, eta: float):
    from ..model.config import ModelConfig

    n_blocks = int(np.log2(args.resolution // 4))
    return ModelConfig(
        image_resolution=args.resolution,
        n_res_blocks=n_blocks,
        fc_widths=tuple(int(w) for w in args.fc_widths.split(",")),
        base_channels=args.base_channels,
        dropout_p=eta,
        seed=args.seed,
    )


def _load_gen_dir(data_dir: Path):
    from ..render.volume import load_raw_volume

    desc_path = data_dir / "volume.json"
    if not desc_path.exists():
        raise UserError(f"{data_dir} does not look like a gen-data directory "
                        f"(missing volume.json)")
    with open(desc_path) as f:
        desc = json.load(f)
    volume = load_raw_volume(data_dir / "volume.raw", desc["dims"], "f32")
    return desc, volume


# ---------------------------------------------------------------- commands


def cmd_gen_data(args) -> int:
    from ..render.dataset import generate_dataset, save_dataset
    from ..render.transfer import default_transfer_function
    from ..render.volume import builtin_volume

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dims = tuple(int(d) for d in args.dims.split(","))
    if len(dims) == 1:
        dims = dims * 3
    volume = builtin_volume(args.volume, dims, seed=args.seed)
    with open(out / "volume.raw", "wb") as f:
        f.write(volume.data.astype("<f4").tobytes())
    with open(out / "volume.json", "w") as f:
        json.dump({"kind": args.volume, "dims": list(volume.dims),
                   "seed": args.seed, "value_range": list(volume.value_range)},
                  f, indent=1, sort_keys=True)
    tf = default_transfer_function()
    vid = f"{args.volume}-{args.seed}"
    for split, n in (("train", args.n_train), ("test", args.n_test)):
        ds = generate_dataset(volume, tf, n, args.resolution,
                              seed=args.seed + (0 if split == "train" else 1),
                              volume_id=vid)
        save_dataset(ds, out / split)
        print(f"{split}: {n} views at {args.resolution}x{args.resolution} -> {out / split}")
    return 0


def cmd_train_mc(args) -> int:
    from ..model.checkpoint import save_checkpoint
    from ..model.network import SynthesisModel
    from ..model.train import train
    from ..render.dataset import load_dataset

    data = Path(args.data)
    dataset = load_dataset(data / "train")
    config = _model_config(args, eta=args.eta)
    model = SynthesisModel.build(config)
    result = train(model, dataset, epochs=args.epochs, batch_size=args.batch_size,
                   lr=args.lr, seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model, out, metadata=result.metadata)
    print(f"trained {args.epochs} epochs, final loss {result.loss_history[-1]:.6f} -> {out}")
    return 0


def _member_seed(root_seed: int, k: int) -> int:
    from ..autodiff.rng import STREAM_MEMBER, mix_seed

    return mix_seed(root_seed, STREAM_MEMBER, k)


def _train_member(payload: tuple) -> str:
    """Worker for one ensemble member (runs in a subprocess with --jobs > 1)."""
    (data_dir, out_path, k, root_seed, resolution, fc_widths, base_channels,
     epochs, batch_size, lr) = payload
    from ..model.checkpoint import save_checkpoint
    from ..model.config import ModelConfig
    from ..model.network import SynthesisModel
    from ..model.train import train
    from ..render.dataset import load_dataset

    seed = _member_seed(root_seed, k)
    config = ModelConfig(
        image_resolution=resolution,
        n_res_blocks=int(np.log2(resolution // 4)),
        fc_widths=tuple(fc_widths),
        base_channels=base_channels,
        dropout_p=0.0,
        seed=seed,
    )
    dataset = load_dataset(Path(data_dir) / "train")
    model = SynthesisModel.build(config)
    result = train(model, dataset, epochs=epochs, batch_size=batch_size, lr=lr,
                   seed=seed)
    save_checkpoint(model, out_path, metadata={**result.metadata, "member": k})
    return str(out_path)


def cmd_train_ensemble(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    fc_widths = tuple(int(w) for w in args.fc_widths.split(","))
    jobs = []
    for k in range(args.members):
        path = out_dir / f"member_{k:02d}.ckpt"
        if path.exists():
            print(f"member {k}: exists, skipping")
            continue
        jobs.append((str(args.data), str(path), k, args.seed, args.resolution,
                     fc_widths, args.base_channels, args.epochs, args.batch_size,
                     args.lr))
    if args.jobs > 1 and len(jobs) > 1:
        import multiprocessing as mp

        with mp.get_context("spawn").Pool(args.jobs) as pool:
            for path in pool.imap(_train_member, jobs):
                print(f"trained -> {path}")
    else:
        for payload in jobs:
            print(f"trained -> {_train_member(payload)}")
    return 0


def _load_ensemble(ensemble_dir: Path):
    from ..model.checkpoint import load_checkpoint
    from ..uq.stacks import EnsembleSet

    paths = sorted(Path(ensemble_dir).glob("member_*.ckpt"))
    if not paths:
        raise UserError(f"no member_*.ckpt files in {ensemble_dir}")
    members = [load_checkpoint(p)[0] for p in paths]
    return EnsembleSet(members=members)


def cmd_sweep(args) -> int:
    from ..model.checkpoint import load_checkpoint
    from ..render.transfer import default_transfer_function
    from ..sweep.runner import sweep

    desc, volume = _load_gen_dir(Path(args.data))
    mc_model, _ = load_checkpoint(args.mc)
    ensemble = _load_ensemble(args.ensemble)
    grid = _parse_grid(args.grid)
    manifest = sweep(mc_model, ensemble, volume, default_transfer_function(),
                     grid, m=args.m, seed=args.seed, out_dir=args.out,
                     volume_id=f"{desc['kind']}-{desc['seed']}")
    print(f"sweep complete: {grid.n_theta}x{grid.n_phi} cells -> {args.out}")
    return 0 if manifest.complete else 2


def cmd_study(args) -> int:
    from ..model.checkpoint import load_checkpoint
    from ..render.dataset import load_dataset
    from ..sweep.study import parameter_study

    dataset = load_dataset(Path(args.data) / "test")
    values = [float(v) if args.axis == "dropout_p" else int(v)
              for v in args.values.split(",")]
    kwargs = {"m": args.m, "seed": args.seed}
    if args.axis == "mc_samples":
        if not args.mc:
            raise UserError("--mc checkpoint required for the mc_samples axis")
        kwargs["mc_model"] = load_checkpoint(args.mc)[0]
    elif args.axis == "ensemble_size":
        if not args.ensemble:
            raise UserError("--ensemble directory required for the ensemble_size axis")
        kwargs["ensemble"] = _load_ensemble(args.ensemble)
    else:
        if not args.models:
            raise UserError("--models JSON ({p: ckpt}) required for the dropout_p axis")
        with open(args.models) as f:
            mapping = json.load(f)
        kwargs["models_by_p"] = {
            float(p): load_checkpoint(path)[0] for p, path in mapping.items()
        }
    rows = parameter_study(args.axis, values, dataset, **kwargs)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as f:
        json.dump({"axis": args.axis, "rows": rows}, f, indent=1, sort_keys=True)
    for row in rows:
        print(f"{args.axis}={row['value']}: avg_uncertainty={row['avg_uncertainty']:.6g} "
              f"psnr_avg={row['psnr_avg']:.4f}")
    return 0


def cmd_demo1d(args) -> int:
    from ..demo1d import Demo1DConfig, run_demo

    config = Demo1DConfig(
        n_train=args.n_train, n_test=args.n_test, noise_sigma=args.noise_sigma,
        iterations=args.iterations, lr=args.lr, m=args.m,
        ensemble_size=args.ensemble_size, seed=args.seed, dropout_p=args.eta,
    )
    results = run_demo(config, out_dir=args.out)
    d = results["diagnostics"]
    print(f"rmse mc={d['rmse_mc']:.4f} ensemble={d['rmse_ensemble']:.4f} "
          f"curvature/std corr={d['curvature_std_corr']:.3f} -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    from .api import QueryService, ServiceConfig
    from .server import serve_forever

    sweep_dirs = {}
    for item in args.sweep or []:
        name, _, path = item.partition("=")
        if not path:
            raise UserError(f"--sweep must look like name=dir, got {item!r}")
        sweep_dirs[name] = Path(path)
    if not sweep_dirs:
        raise UserError("at least one --sweep name=dir is required")
    config = ServiceConfig(
        sweep_dirs=sweep_dirs,
        demo_dir=Path(args.demo) if args.demo else None,
        static_dir=Path(args.static) if args.static else None,
    )
    serve_forever(QueryService(config), port=args.port)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uqsynth", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with default flag values")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("gen-data", help="render train/test datasets")
    common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--volume", default="blobs", choices=["blobs", "shell", "turbulence"])
    p.add_argument("--dims", default="64,64,64")
    p.add_argument("--resolution", type=int, default=32)
    p.add_argument("--n-train", type=int, default=512)
    p.add_argument("--n-test", type=int, default=128)
    p.set_defaults(fn=cmd_gen_data)

    def model_flags(p):
        p.add_argument("--resolution", type=int, default=32)
        p.add_argument("--fc-widths", default="64,512")
        p.add_argument("--base-channels", type=int, default=64)
        p.add_argument("--epochs", type=int, default=64)
        p.add_argument("--batch-size", type=int, default=64)
        p.add_argument("--lr", type=float, default=1e-4)

    p = sub.add_parser("train-mc", help="train the MC-Dropout model")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--eta", type=float, default=0.1)
    model_flags(p)
    p.set_defaults(fn=cmd_train_mc)

    p = sub.add_parser("train-ensemble", help="train K ensemble members")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--members", type=int, default=20)
    p.add_argument("--jobs", type=int, default=1)
    model_flags(p)
    p.set_defaults(fn=cmd_train_ensemble)

    p = sub.add_parser("sweep", help="dense view-space sweep")
    common(p)
    p.add_argument("--data", required=True, help="gen-data directory (for the volume)")
    p.add_argument("--mc", required=True, help="MC model checkpoint")
    p.add_argument("--ensemble", required=True, help="ensemble checkpoint directory")
    p.add_argument("--grid", default="36x18")
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("study", help="parameter studies")
    common(p)
    p.add_argument("--axis", required=True,
                   choices=["mc_samples", "ensemble_size", "dropout_p"])
    p.add_argument("--values", required=True, help="comma-separated, ascending")
    p.add_argument("--data", required=True)
    p.add_argument("--mc")
    p.add_argument("--ensemble")
    p.add_argument("--models", help="JSON file {dropout_p: ckpt path}")
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_study)

    p = sub.add_parser("demo1d", help="1-D regression demonstration")
    common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--n-train", type=int, default=100)
    p.add_argument("--n-test", type=int, default=200)
    p.add_argument("--noise-sigma", type=float, default=0.1)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--ensemble-size", type=int, default=50)
    p.add_argument("--eta", type=float, default=0.1)
    p.set_defaults(fn=cmd_demo1d)

    p = sub.add_parser("serve", help="query API + explorer")
    common(p)
    p.add_argument("--sweep", action="append", metavar="NAME=DIR")
    p.add_argument("--demo")
    p.add_argument("--static")
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    argv = list(argv)
    # locate --config by scanning (argparse would enforce required flags);
    # its values become injected flags that explicit ones override
    config_path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            config_path = argv[i + 1]
            break
        if tok.startswith("--config="):
            config_path = tok.split("=", 1)[1]
            break
    if config_path:
        try:
            with open(config_path) as f:
                defaults = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            print(f"error: cannot read config {config_path}: {e}", file=sys.stderr)
            return 1
        injected = []
        for key, value in defaults.items():
            flag = f"--{key.replace('_', '-')}"
            injected += [flag, str(value)]
        argv = argv[:1] + injected + argv[1:]
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UserError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1
    except Exception as e:  # internal
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
