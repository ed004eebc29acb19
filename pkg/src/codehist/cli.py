"""Command-line interface.

Every subcommand is seeded, thread-count-invariant, and — when it writes an
output file — drops a JSON run manifest beside it so the exact invocation
can be replayed (``codehist replay <manifest>``) and verified bit-for-bit.

Exit codes: 0 success, 2 usage or incompatible inputs, 3 input I/O or
format error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import fit_gaussian, frechet_distance, median_pairwise_distance, mmd2
from .degrade import DegradeSpec, apply_degradation
from .diagnostics import adjacent_mi, token_entropy
from .distances import ALT_KINDS, HELLINGER, chd
from .errors import BAD_HEADER, FormatError, NumericError
from .harness import correlation_report, pairwise_accuracy, sample_sweep
from .histograms import (
    DEFAULT_DISPLACEMENTS,
    DisplacementSet,
    cooccurrence,
    format_cooccurrence,
    format_unigram,
    unigram,
)
from .images import load_image, save_image
from .manifest import RunManifest, file_digest, load_manifest, verify_inputs, write_manifest
from .palette import build_palette, tokenize
from .token_io import GridLayout, load_features, load_tokens, save_tokens, TokenDataset
from .cmms import (
    RegressorConfig,
    TrainConfig,
    load_checkpoint,
    save_checkpoint,
    score_dataset,
    train,
)

_IMAGE_SUFFIXES = (".png", ".ppm")

_DEGRADE_KINDS = {
    "blur": ("gaussian_blur", None),
    "noise": ("gaussian_noise", None),
    "jpeg": ("jpeg", None),
    "occlusion": ("occlusion", None),
    "brightness": ("photometric", "brightness"),
    "contrast": ("photometric", "contrast"),
    "saturation": ("photometric", "saturation"),
    "sharpen": ("photometric", "sharpen"),
}

_DISP_NAMES = {"right": (1, 0), "down": (0, 1), "left": (-1, 0), "up": (0, -1)}


def _parse_grid(text: str) -> GridLayout:
    try:
        rows, cols = (int(p) for p in text.lower().split("x"))
        return GridLayout(rows, cols)
    except (ValueError, TypeError):
        raise ValueError(f"grid must look like ROWSxCOLS, got {text!r}") from None


def _parse_displacements(text: str) -> DisplacementSet:
    items = []
    for part in text.split(","):
        part = part.strip()
        if part in _DISP_NAMES:
            items.append(_DISP_NAMES[part])
        else:
            try:
                dx, dy = (int(p) for p in part.split(":"))
            except (ValueError, TypeError):
                raise ValueError(
                    f"displacement {part!r}: use right/down/left/up or dx:dy"
                ) from None
            items.append((dx, dy))
    return DisplacementSet(tuple(items))


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def _emit(pairs: list, args, out_path, inputs: list, extra_outputs=()) -> None:
    """Print the key=value block; with --out, also write it plus a manifest."""
    block = "\n".join(
        " ".join(f"{k}={_fmt(v)}" for k, v in line) if isinstance(line, list)
        else f"{line[0]}={_fmt(line[1])}"
        for line in pairs
    ) + "\n"
    sys.stdout.write(block)
    if getattr(args, "json", False):
        flat = {}
        for line in pairs:
            items = line if isinstance(line, list) else [line]
            for k, v in items:
                if isinstance(v, (np.floating, np.integer)):
                    v = v.item()
                flat.setdefault(k, []).append(v)
        flat = {k: (v[0] if len(v) == 1 else v) for k, v in flat.items()}
        sys.stdout.write(json.dumps(flat, sort_keys=True) + "\n")
    if out_path:
        Path(out_path).write_text(block, encoding="utf-8")
        _write_run_manifest(args, out_path, inputs, [out_path, *extra_outputs])


def _write_run_manifest(args, anchor, inputs, outputs) -> None:
    anchor = Path(anchor)
    if anchor.is_dir():
        manifest_path = anchor / "manifest.json"
    else:
        manifest_path = anchor.with_name(anchor.name + ".manifest.json")
    manifest = RunManifest(
        tool="codehist",
        version=__version__,
        subcommand=args.subcommand,
        argv=list(args.raw_argv),
        seed=args.seed,
        threads=args.threads,
        inputs={str(p): file_digest(p) for p in sorted(str(x) for x in inputs)},
        outputs=[str(o) for o in outputs],
    )
    write_manifest(manifest, manifest_path)


def _image_files(directory) -> list:
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"{directory}: not a directory")
    files = sorted(p for p in root.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES)
    if not files:
        raise FormatError(BAD_HEADER, f"{directory}: no .png or .ppm inputs")
    return files


def _pool_map(fn, items, threads):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_tokenize(args) -> int:
    layout = _parse_grid(args.grid)
    palette = build_palette(args.codebook)
    files = _image_files(args.images)

    def one(path):
        try:
            return tokenize(load_image(path), layout, palette), None
        except (FormatError, ValueError, OSError) as exc:
            return None, f"{path}: {exc}"

    results = _pool_map(one, files, args.threads)
    failures = [msg for _, msg in results if msg]
    if failures:
        for msg in failures:
            print(msg, file=sys.stderr)
        print(f"tokenize: {len(failures)} of {len(files)} inputs failed", file=sys.stderr)
        return 3
    dataset = TokenDataset.from_sequences(
        palette.codebook, [seq for seq, _ in results], layout
    )
    save_tokens(dataset, args.out)
    _emit(
        [("sequences", len(dataset)), ("seq_len", dataset.seq_len),
         ("codebook", dataset.codebook.size), ("grid", f"{layout.rows}x{layout.cols}")],
        args, None, [],
    )
    _write_run_manifest(args, args.out, files, [args.out])
    return 0


def _cmd_degrade(args) -> int:
    kind, photo = _DEGRADE_KINDS[args.kind]
    files = _image_files(args.images)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(indexed):
        index, path = indexed
        spec = DegradeSpec(
            kind=kind,
            parameter=args.param,
            seed=args.seed ^ index,
            photometric_kind=photo or "contrast",
        )
        degraded = apply_degradation(load_image(path), spec)
        target = out_dir / path.name
        save_image(degraded, target)
        return target

    outputs = _pool_map(one, list(enumerate(files)), args.threads)
    _emit([("degraded", len(outputs)), ("kind", args.kind), ("param", float(args.param))],
          args, None, [])
    _write_run_manifest(args, out_dir, files, [str(p) for p in outputs])
    return 0


def _cmd_chd(args) -> int:
    real = load_tokens(args.real)
    gen = load_tokens(args.gen)
    disp = _parse_displacements(args.disp)
    report = chd(real, gen, disp, distance=args.distance, workers=args.threads)
    _emit(
        [("chd_1d", report.chd_1d), ("chd_2d", report.chd_2d), ("chd", report.chd),
         ("distance", args.distance), ("sequences_real", len(real)),
         ("sequences_gen", len(gen))],
        args, args.out, [args.real, args.gen],
    )
    return 0


def _cmd_tokenstats(args) -> int:
    dataset = load_tokens(args.tokens)
    hist = unigram(dataset, workers=args.threads)
    pairs = [
        ("sequences", len(dataset)),
        ("seq_len", dataset.seq_len),
        ("codebook", dataset.codebook.size),
        ("entropy_nats", token_entropy(dataset)),
    ]
    disp = _parse_displacements(args.disp)
    if dataset.layout is not None:
        pairs.append(("adjacent_mi_nats", adjacent_mi(dataset, disp)))
    else:
        print("tokenstats: no grid layout, skipping adjacent MI", file=sys.stderr)
    top = np.argsort(-hist.probs, kind="stable")[: args.top]
    pairs.append(
        ("top_tokens", ",".join(f"{int(t)}:{float(hist.probs[t])!r}" for t in top if hist.counts[t]))
    )
    extra = []
    if args.dump_unigram:
        Path(args.dump_unigram).write_text(format_unigram(hist), encoding="utf-8")
        extra.append(args.dump_unigram)
    if args.dump_pairs:
        if dataset.layout is None:
            raise ValueError("--dump-pairs needs a dataset with a grid layout")
        Path(args.dump_pairs).write_text(
            format_cooccurrence(cooccurrence(dataset, disp, workers=args.threads)),
            encoding="utf-8",
        )
        extra.append(args.dump_pairs)
    _emit(pairs, args, args.out, [args.tokens], extra)
    return 0


def _cmd_baseline(args) -> int:
    real = load_features(args.real)
    gen = load_features(args.gen)
    if args.measure == "frechet":
        value = frechet_distance(fit_gaussian(real), fit_gaussian(gen))
        pairs = [("frechet", value)]
    else:
        if args.bandwidth is not None:
            gamma = args.bandwidth
        else:
            if len(real) < 2 or len(gen) < 2:
                raise ValueError("median-heuristic MMD needs >= 2 vectors per set")
            gamma = median_pairwise_distance(
                np.concatenate([real.vectors, gen.vectors], axis=0)
            )
        value = 0.0 if gamma == 0.0 else mmd2(real, gen, bandwidth=gamma)
        pairs = [("mmd2", value), ("bandwidth", gamma)]
    pairs += [("vectors_real", len(real)), ("vectors_gen", len(gen)), ("dim", real.dim)]
    _emit(pairs, args, args.out, [args.real, args.gen])
    return 0


def _cmd_cmms_train(args) -> int:
    dataset = load_tokens(args.tokens)
    embed = 512 if args.full_scale else args.embed_dim
    model_config = RegressorConfig(
        codebook_size=dataset.codebook.size,
        seq_len=dataset.seq_len,
        embed_dim=embed,
        num_layers=args.layers,
        num_heads=args.heads,
        mlp_hidden=args.mlp_hidden,
        seed=args.seed,
    )
    train_config = TrainConfig(
        learning_rate=args.lr,
        weight_decay=args.weight_decay,
        batch_size=512 if args.full_scale and args.batch_size is None else (args.batch_size or 32),
        epochs=200 if args.full_scale and args.epochs is None else (args.epochs or 10),
        seed=args.seed,
    )
    last = {}

    def log(epoch, loss):
        last["loss"] = loss
        if not args.quiet:
            sys.stdout.write(f"epoch={epoch} loss={loss!r}\n")

    params = train(dataset, train_config, model_config, log=log)
    save_checkpoint(params, model_config, args.out)
    _emit(
        [("trained_sequences", len(dataset)), ("epochs", train_config.epochs),
         ("final_loss", last.get("loss", float("nan")))],
        args, None, [],
    )
    _write_run_manifest(args, args.out, [args.tokens], [args.out])
    return 0


def _cmd_cmms_score(args) -> int:
    params, config = load_checkpoint(args.model)
    dataset = load_tokens(args.tokens)
    scores = score_dataset(params, config, dataset)
    pairs = [("cmms_mean", float(scores.mean())), ("sequences", len(dataset))]
    if args.out:
        lines = "".join(f"{i} {float(s)!r}\n" for i, s in enumerate(scores))
        Path(args.out).write_text(lines, encoding="utf-8")
        sys.stdout.write("\n".join(f"{k}={_fmt(v)}" for k, v in pairs) + "\n")
        _write_run_manifest(args, args.out, [args.model, args.tokens], [args.out])
    else:
        _emit(pairs, args, None, [])
    return 0


def _read_scores(path) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 2:
                raise FormatError(
                    BAD_HEADER, f"{path}:{lineno}: expected 'id value', got {line.strip()!r}"
                )
            try:
                out[parts[0]] = float(parts[1])
            except ValueError:
                raise FormatError(
                    BAD_HEADER, f"{path}:{lineno}: {parts[1]!r} is not a number"
                ) from None
    if not out:
        raise FormatError(BAD_HEADER, f"{path}: no scores found")
    return out


def _cmd_correlate(args) -> int:
    metric = _read_scores(args.metric)
    human = _read_scores(args.human)
    if set(metric) != set(human):
        only_m = sorted(set(metric) - set(human))[:3]
        only_h = sorted(set(human) - set(metric))[:3]
        raise ValueError(
            f"score ids differ between files (metric-only {only_m}, reference-only {only_h})"
        )
    keys = sorted(metric)
    mv = [metric[k] for k in keys]
    hv = [human[k] for k in keys]
    report = correlation_report(mv, hv, args.direction, nmse_mode=args.nmse_mode)
    accuracy = pairwise_accuracy(mv, hv, args.direction)
    _emit(
        [("spearman", report.spearman), ("kendall", report.kendall),
         ("nmse", report.nmse), ("pairwise_accuracy", accuracy),
         ("n", report.n), ("degenerate", report.degenerate)],
        args, args.out, [args.metric, args.human],
    )
    return 0


def _cmd_sweep(args) -> int:
    real = load_tokens(args.real)
    gen = load_tokens(args.gen)
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    metric = "frechet-on-unigram" if args.metric == "frechet" else args.metric
    disp = _parse_displacements(args.disp)
    result = sample_sweep(real, gen, sizes, args.repeats, args.seed, metric, disp)
    pairs = [("metric", args.metric), ("repeats", args.repeats)]
    for size, mean, std in zip(result.sample_sizes, result.means, result.stddevs):
        pairs.append([("size", size), ("mean", mean), ("stddev", std)])
    _emit(pairs, args, args.out, [args.real, args.gen])
    return 0


def _cmd_replay(args) -> int:
    manifest = load_manifest(args.manifest)
    verify_inputs(manifest)
    if not args.quiet:
        print(f"replaying: codehist {' '.join(manifest.argv)}", file=sys.stderr)
    return main(manifest.argv)


# ---------------------------------------------------------------------------
# parser


def _add_common(parser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="global RNG seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads; never changes results")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codehist",
        description="Token-space evaluation of generative image models.",
    )
    parser.add_argument("--version", action="version", version=f"codehist {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("tokenize", help="tokenize an image directory with the palette tokenizer")
    p.add_argument("--images", "--in", dest="images", required=True)
    p.add_argument("--grid", required=True, help="grid layout, e.g. 8x16")
    p.add_argument("--codebook", type=int, required=True, help="palette size")
    p.add_argument("--out", required=True, help="output .chtk path")
    _add_common(p)
    p.set_defaults(func=_cmd_tokenize)

    p = sub.add_parser("degrade", help="apply one seeded degradation to every image")
    p.add_argument("--images", "--in", dest="images", required=True)
    p.add_argument("--kind", choices=sorted(_DEGRADE_KINDS), required=True)
    p.add_argument("--param", type=float, required=True)
    p.add_argument("--out", required=True, help="output directory")
    _add_common(p)
    p.set_defaults(func=_cmd_degrade)

    p = sub.add_parser("chd", help="distance between two token datasets")
    p.add_argument("--real", required=True)
    p.add_argument("--gen", required=True)
    p.add_argument("--disp", default="right,down",
                   help="displacement set: names or dx:dy, comma-separated")
    p.add_argument("--distance", choices=(HELLINGER, *ALT_KINDS), default=HELLINGER)
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_chd)

    p = sub.add_parser("tokenstats", help="entropy, adjacent MI, top tokens")
    p.add_argument("--tokens", required=True)
    p.add_argument("--disp", default="right,down")
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--dump-unigram", help="write 'token prob' lines here")
    p.add_argument("--dump-pairs", help="write 'u v prob' lines here")
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_tokenstats)

    p = sub.add_parser("baseline", help="feature-space reference scores")
    p.add_argument("measure", choices=("frechet", "mmd"))
    p.add_argument("--real", required=True)
    p.add_argument("--gen", required=True)
    p.add_argument("--bandwidth", type=float, help="RBF bandwidth; default median heuristic")
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_baseline)

    cmms = sub.add_parser("cmms", help="quality regressor").add_subparsers(
        dest="cmms_command", required=True
    )
    p = cmms.add_parser("train", help="train on a clean token dataset")
    p.add_argument("--tokens", required=True)
    p.add_argument("--out", required=True, help="output .chmm checkpoint")
    p.add_argument("--full-scale", action="store_true",
                   help="512-dim model, batch 512, 200 epochs")
    p.add_argument("--embed-dim", type=int, default=64)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--heads", type=int, default=8)
    p.add_argument("--mlp-hidden", type=int, default=512)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--weight-decay", type=float, default=0.01)
    _add_common(p)
    p.set_defaults(func=_cmd_cmms_train)

    p = cmms.add_parser("score", help="score a token dataset with a checkpoint")
    p.add_argument("--model", required=True)
    p.add_argument("--tokens", required=True)
    p.add_argument("--out", help="write per-sequence 'id value' scores here")
    p.add_argument("--json", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_cmms_score)

    p = sub.add_parser("correlate", help="metric vs reference score agreement")
    p.add_argument("--metric", required=True, help="two-column 'id value' file")
    p.add_argument("--human", required=True, help="two-column 'id value' file")
    p.add_argument("--direction", choices=("higher", "lower"), required=True,
                   help="whether a higher metric means better")
    p.add_argument("--nmse-mode", choices=("minmax", "zscore"), default="minmax")
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_correlate)

    p = sub.add_parser("sweep", help="metric stability vs subsample size")
    p.add_argument("--real", required=True)
    p.add_argument("--gen", required=True)
    p.add_argument("--sizes", required=True, help="comma-separated sizes")
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--metric", choices=("chd", "frechet"), default="chd")
    p.add_argument("--disp", default="right,down")
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("replay", help="re-run a recorded manifest")
    p.add_argument("manifest")
    _add_common(p)
    p.set_defaults(func=_cmd_replay)

    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.raw_argv = list(argv)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        return 2
    if getattr(args, "cmms_command", None):
        args.subcommand = f"cmms {args.cmms_command}"
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0
    except (FormatError, OSError) as exc:
        print(f"codehist: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"codehist: numeric failure: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"codehist: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())
