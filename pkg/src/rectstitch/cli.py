"""Command-line frontend: stitch pairs or batches, dump masks, run the
ablation grid, and evaluate content consistency over a directory.

Exit codes: 0 success, 2 invalid arguments, 3 I/O failure, 4 backend
failure, 5 pipeline error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .backend import InpaintBackend, ReferenceBackend, RemoteBackend
from .errors import (
    BackendShapeMismatch,
    BackendUnavailable,
    CorruptFile,
    InvalidConfig,
    NonFiniteLatent,
    StitchError,
    UnsupportedFormat,
)
from .geometry import WarpedPair, align_pair
from .maskgen import build_masks
from .metrics import FingerprintProvider, RemoteProvider, ccs_components
from .model import Homography, ImageBuffer, StitchConfig, build_config
from .persistence import (
    RunManifest,
    dump_artifacts,
    read_image,
    read_mask,
    sha256_file,
    write_image,
    write_manifest,
    write_mask,
    write_weights,
)
from .pipeline import prealigned_pair, stitch_pair

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_BACKEND = 4
EXIT_PIPELINE = 5

_ABLATION_RUNS = [
    ("full", {}),
    ("no_coarse_rectangling", {"disable_coarse_rectangling": True}),
    ("no_weighted_init", {"disable_weighted_init": True}),
    ("no_weighted_inpaint", {"disable_weighted_inpaint": True}),
]


@dataclass
class JobSpec:
    mode: str  # "homography" or "prealigned"
    out_dir: Path
    config: StitchConfig
    left: Path | None = None
    right: Path | None = None
    homography: Path | None = None
    prealigned_dir: Path | None = None
    backend_url: str | None = None
    dump_artifacts: bool = False
    dump_step_masks: bool = False


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline parameters")
    g.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="seam-band divisor (default 200)")
    g.add_argument("--delta", type=int, default=None,
                   help="seam-band multiplier (default 10)")
    g.add_argument("--kg", type=int, default=None,
                   help="distance-transform chamfer mask, 3 or 5 (default 3)")
    g.add_argument("--radius", type=int, default=None,
                   help="fast-marching fill radius in pixels (default 20)")
    g.add_argument("--eps1", type=int, default=None,
                   help="seam-area inpainting strength, 0-255 (default 128)")
    g.add_argument("--eps2", type=int, default=None,
                   help="rectangling-area inpainting strength, 0-255 (default 128)")
    g.add_argument("--steps", type=int, default=None,
                   help="reverse-process steps (default 50)")
    g.add_argument("--guidance", type=float, default=None,
                   help="guidance scale passed to the backend (default 7.5)")
    g.add_argument("--seed", type=int, default=None,
                   help="RNG seed; identical seeds give byte-identical outputs (default 0)")
    g.add_argument("--prompt", type=str, default=None,
                   help="text prompt for the backend (default empty)")
    g.add_argument("--config", type=Path, default=None,
                   help="key=value config file; flags override it")
    g.add_argument("--disable-coarse-rectangling", action="store_true", default=None,
                   help="ablation: skip the fast-marching prior fill")
    g.add_argument("--disable-weighted-init", action="store_true", default=None,
                   help="ablation: condition on a hard coverage mask instead of the retention map")
    g.add_argument("--disable-weighted-inpaint", action="store_true", default=None,
                   help="ablation: use the full inpaint mask at every step")


def _add_io_flags(p: argparse.ArgumentParser, with_backend: bool = True) -> None:
    p.add_argument("--left", type=Path, help="left input image")
    p.add_argument("--right", type=Path, help="right input image")
    p.add_argument("--homography", type=Path,
                   help='JSON file with field "h": 9 reals, row-major')
    p.add_argument("--prealigned", type=Path, metavar="DIR",
                   help="directory with warp1/warp2/mask1/mask2 rasters")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    if with_backend:
        p.add_argument("--backend", type=str, default=None,
                       help="denoiser sidecar URL (default: builtin reference backend; "
                            "env STITCH_BACKEND_URL is used when unset)")


def _config_from_args(args) -> StitchConfig:
    overrides = {}
    for attr, fieldname in [
        ("lam", "band_divisor"),
        ("delta", "band_multiplier"),
        ("kg", "dt_kernel"),
        ("radius", "telea_radius"),
        ("eps1", "seam_strength"),
        ("eps2", "fill_strength"),
        ("steps", "steps"),
        ("guidance", "guidance_scale"),
        ("seed", "seed"),
        ("prompt", "prompt"),
        ("disable_coarse_rectangling", "disable_coarse_rectangling"),
        ("disable_weighted_init", "disable_weighted_init"),
        ("disable_weighted_inpaint", "disable_weighted_inpaint"),
    ]:
        value = getattr(args, attr, None)
        if value is not None:
            overrides[fieldname] = value
    return build_config(getattr(args, "config", None), overrides)


def _make_backend(url: str | None) -> InpaintBackend:
    url = url or os.environ.get("STITCH_BACKEND_URL")
    if url:
        return RemoteBackend(url)
    return ReferenceBackend()


def _read_homography(path: Path) -> Homography:
    import json

    data = json.loads(path.read_text())
    values = np.asarray(data["h"], dtype=np.float64)
    if values.size != 9:
        raise InvalidConfig("homography", f"{path}: expected 9 values, got {values.size}")
    return Homography(values.reshape(3, 3))


def _find_quad(dir_path: Path) -> dict[str, Path]:
    for ext in (".png", ".jpg", ".jpeg"):
        paths = {name: dir_path / f"{name}{ext}" for name in ("warp1", "warp2", "mask1", "mask2")}
        if all(p.exists() for p in paths.values()):
            return paths
    raise FileNotFoundError(
        f"{dir_path}: expected warp1/warp2/mask1/mask2 with a common extension"
    )


def _load_pair(spec: JobSpec) -> tuple[WarpedPair, dict[str, str]]:
    if spec.mode == "homography":
        assert spec.left and spec.right and spec.homography
        i_l = read_image(spec.left)
        i_r = read_image(spec.right)
        h = _read_homography(spec.homography)
        hashes = {
            "left": sha256_file(spec.left),
            "right": sha256_file(spec.right),
            "homography": sha256_file(spec.homography),
        }
        return align_pair(i_l, i_r, h), hashes
    assert spec.prealigned_dir is not None
    quad = _find_quad(spec.prealigned_dir)
    pair = prealigned_pair(
        read_image(quad["warp1"]),
        read_image(quad["warp2"]),
        read_mask(quad["mask1"]),
        read_mask(quad["mask2"]),
    )
    return pair, {name: sha256_file(path) for name, path in quad.items()}


def _run_stitch_job(spec: JobSpec) -> Path:
    t0 = time.monotonic()
    pair, hashes = _load_pair(spec)
    t_load = time.monotonic()
    backend = _make_backend(spec.backend_url)
    artifacts = stitch_pair(pair, spec.config, backend, capture_steps=spec.dump_step_masks)
    t_stitch = time.monotonic()

    spec.out_dir.mkdir(parents=True, exist_ok=True)
    write_image(spec.out_dir / "stitched.png", artifacts.stitched)
    if spec.dump_artifacts or spec.dump_step_masks:
        dump_artifacts(spec.out_dir, artifacts, dump_step_masks=spec.dump_step_masks)
    caps = backend.capabilities()
    manifest = RunManifest(
        config=_config_dict(spec.config),
        input_hashes=hashes,
        backend_capabilities={
            "latent_scale": caps.latent_scale,
            "latent_channels": caps.latent_channels,
            "max_side": caps.max_side,
            "supports_guidance": caps.supports_guidance,
            "roundtrip_tolerance": caps.roundtrip_tolerance,
        },
        stage_seconds={
            "load": round(t_load - t0, 4),
            "stitch": round(t_stitch - t_load, 4),
        },
    )
    write_manifest(spec.out_dir, manifest)
    return spec.out_dir / "stitched.png"


def _config_dict(cfg: StitchConfig) -> dict:
    d = asdict(cfg)
    d["ablation"] = asdict(cfg.ablation)
    return d


def _spec_from_args(args) -> JobSpec:
    cfg = _config_from_args(args)
    if args.prealigned is not None:
        mode = "prealigned"
    elif args.left or args.right or args.homography:
        if not (args.left and args.right and args.homography):
            raise InvalidConfig("inputs", "homography mode needs --left, --right and --homography")
        mode = "homography"
    else:
        raise InvalidConfig("inputs", "provide --left/--right/--homography or --prealigned DIR")
    return JobSpec(
        mode=mode,
        out_dir=args.out,
        config=cfg,
        left=args.left,
        right=args.right,
        homography=args.homography,
        prealigned_dir=args.prealigned,
        backend_url=getattr(args, "backend", None),
        dump_artifacts=getattr(args, "dump_artifacts", False),
        dump_step_masks=getattr(args, "dump_step_masks", False),
    )


def cmd_stitch(args) -> int:
    if args.pairs_dir is not None:
        return _cmd_stitch_batch(args)
    spec = _spec_from_args(args)
    _run_stitch_job(spec)
    print(f"wrote {spec.out_dir / 'stitched.png'}")
    return EXIT_OK


def _cmd_stitch_batch(args) -> int:
    pair_dirs = sorted(p for p in Path(args.pairs_dir).iterdir() if p.is_dir())
    if not pair_dirs:
        raise FileNotFoundError(f"{args.pairs_dir}: no pair subdirectories found")
    cfg = _config_from_args(args)
    specs = []
    for d in pair_dirs:
        job_args = argparse.Namespace(**vars(args))
        hj = d / "homography.json"
        if hj.exists():
            job_args.left, job_args.right, job_args.homography = (
                d / "left.png", d / "right.png", hj,
            )
            job_args.prealigned = None
        else:
            job_args.prealigned = d
            job_args.left = job_args.right = job_args.homography = None
        job_args.out = args.out / d.name
        spec = _spec_from_args(job_args)
        specs.append(replace(spec, config=cfg))
    jobs = max(1, args.jobs)
    if jobs == 1:
        for spec in specs:
            _run_stitch_job(spec)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_run_stitch_job, specs))
    print(f"stitched {len(specs)} pairs into {args.out}")
    return EXIT_OK


def cmd_masks(args) -> int:
    spec = _spec_from_args(args)
    pair, _ = _load_pair(spec)
    masks = build_masks(pair.m_wl, pair.m_wr, pair.domain, spec.config)
    out = spec.out_dir
    out.mkdir(parents=True, exist_ok=True)
    write_mask(out / "mask_seam.png", masks.m_seam)
    write_mask(out / "mask_rect.png", masks.m_rect)
    write_mask(out / "mask_content.png", masks.m_union_content)
    write_mask(out / "mask_inpaint.png", masks.m_inpaint)
    write_mask(out / "mask_overlap.png", pair.m_wl & pair.m_wr)
    write_weights(out / "w_init.png", masks.w_init)
    write_weights(out / "w_inpaint.png", masks.w_inpaint)
    print(f"wrote 7 mask rasters to {out} (band kernel {masks.k_s})")
    return EXIT_OK


def cmd_eval(args) -> int:
    sample_dirs = sorted(p for p in Path(args.dir).iterdir() if p.is_dir())
    if not sample_dirs:
        raise FileNotFoundError(f"{args.dir}: no sample subdirectories found")
    if args.provider == "remote":
        url = args.backend or os.environ.get("STITCH_BACKEND_URL")
        if not url:
            raise InvalidConfig("backend", "remote provider needs --backend or STITCH_BACKEND_URL")
        provider = RemoteProvider(url)
    else:
        provider = FingerprintProvider()
    rows = []
    for d in sample_dirs:
        images = {}
        for name in ("stitched", "fusion", "left", "right"):
            path = d / f"{name}.png"
            if not path.exists():
                raise FileNotFoundError(f"{path}: missing from sample {d.name}")
            images[name] = read_image(path)
        score, ccs_n, ccs_g = ccs_components(
            images["stitched"], images["fusion"], images["left"], images["right"], provider
        )
        rows.append((d.name, score, ccs_n, ccs_g))
    out_csv = Path(args.out) if args.out else Path(args.dir) / "ccs_report.csv"
    with open(out_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "ccs", "ccs_n", "ccs_g"])
        for name, score, ccs_n, ccs_g in rows:
            writer.writerow([name, f"{score:.6f}", f"{ccs_n:.6f}", f"{ccs_g:.6f}"])
        means = np.mean([[r[1], r[2], r[3]] for r in rows], axis=0)
        writer.writerow(["mean", f"{means[0]:.6f}", f"{means[1]:.6f}", f"{means[2]:.6f}"])
    print(f"wrote {out_csv} (mean CCS {means[0]:.4f} over {len(rows)} samples)")
    return EXIT_OK


def cmd_ablate(args) -> int:
    base_spec = _spec_from_args(args)
    tiles = []
    for name, flags in _ABLATION_RUNS:
        cfg = base_spec.config.with_overrides(**flags)
        spec = replace(base_spec, config=cfg, out_dir=base_spec.out_dir / name,
                       dump_artifacts=True)
        _run_stitch_job(spec)
        tiles.append(read_image(spec.out_dir / "stitched.png"))
    h = max(t.height for t in tiles)
    w = max(t.width for t in tiles)
    sheet = np.zeros((2 * h, 2 * w, 3), dtype=np.float32)
    for i, tile in enumerate(tiles):
        r, c = divmod(i, 2)
        sheet[r * h : r * h + tile.height, c * w : c * w + tile.width] = tile.to_rgb().data
    write_image(base_spec.out_dir / "sheet.png", ImageBuffer(sheet))
    print(f"wrote 4 configurations and sheet.png to {base_spec.out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rectstitch",
        description="Stitch two overlapping photographs into one rectangular image.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_stitch = sub.add_parser(
        "stitch", help="stitch one pair or a batch directory",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    _add_io_flags(p_stitch)
    _add_config_flags(p_stitch)
    p_stitch.add_argument("--pairs-dir", type=Path, default=None,
                          help="batch mode: directory of per-pair subdirectories")
    p_stitch.add_argument("--jobs", type=int, default=1,
                          help="independent stitch jobs to run concurrently (batch mode)")
    p_stitch.add_argument("--dump-artifacts", action="store_true",
                          help="write every intermediate raster next to stitched.png")
    p_stitch.add_argument("--dump-step-masks", action="store_true",
                          help="write the per-step inpaint masks under step_masks/")
    p_stitch.set_defaults(func=cmd_stitch)

    p_masks = sub.add_parser(
        "masks", help="emit every intermediate mask without running the reverse process",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    _add_io_flags(p_masks, with_backend=False)
    _add_config_flags(p_masks)
    p_masks.set_defaults(func=cmd_masks)

    p_eval = sub.add_parser(
        "eval", help="content-consistency report over a directory of samples",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p_eval.add_argument("--dir", type=Path, required=True,
                        help="directory of per-sample folders with stitched/fusion/left/right.png")
    p_eval.add_argument("--provider", choices=("builtin", "remote"), default="builtin")
    p_eval.add_argument("--backend", type=str, default=None, help="sidecar URL for --provider remote")
    p_eval.add_argument("--out", type=Path, default=None, help="CSV path (default DIR/ccs_report.csv)")
    p_eval.set_defaults(func=cmd_eval)

    p_ablate = sub.add_parser(
        "ablate", help="run the four design configurations and write a 2x2 contact sheet",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    _add_io_flags(p_ablate)
    _add_config_flags(p_ablate)
    p_ablate.add_argument("--dump-step-masks", action="store_true")
    p_ablate.set_defaults(func=cmd_ablate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except InvalidConfig as exc:
        print(f"error (arguments): {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, PermissionError, UnsupportedFormat, CorruptFile) as exc:
        print(f"error (i/o): {exc}", file=sys.stderr)
        return EXIT_IO
    except (BackendUnavailable, BackendShapeMismatch, NonFiniteLatent) as exc:
        print(f"error (backend): {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (StitchError, ValueError) as exc:
        print(f"error (pipeline): {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    raise SystemExit(main())
