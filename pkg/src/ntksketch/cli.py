"""Command line front end.

Subcommands:
  features ntk|cntk   transform a dataset into a feature-matrix file
  regress             ridge regression / classification on feature files
  kernel exact-ntk|exact-cntk   exact kernel values for input pairs
  validate poly|sketch          polynomial bounds and sketch concentration
  plot relu-ntk       CSV grid of the normalized deep ReLU kernel curves

Every subcommand takes --seed; --config points at a JSON file whose keys
provide defaults for any flag.
"""

import argparse
import json
import sys

import numpy as np

from .cntk import theta_cntk
from .cntk_features import CntkSketchState
from .config import DIM_KEYS, SketchConfig, theory_dims
from .harness import (
    LAMBDA_PRESETS,
    batch_transform,
    classify,
    encode_labels,
    load_dataset,
    load_features,
    predict,
    ridge_fit,
    save_features,
)
from .ntk import k_relu_grid, theta_ntk
from .ntk_features import NtkSketchState
from .polyfit import choose_degrees, sup_error, taylor_coeffs_kappa0, taylor_coeffs_kappa1
from .polysketch import PolySketchTree
from .sketches import SrhtSketch


def _parse_dims(text):
    out = {}
    if not text:
        return out
    for item in text.split(","):
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in DIM_KEYS:
            raise SystemExit(f"unknown dim {key!r}; valid: {', '.join(DIM_KEYS)}")
        out[key] = int(value)
    return out


def _parse_mode(text):
    if text == "taylor":
        return "taylor", None
    if text == "fitted":
        return "fitted", None
    if text.startswith("fitted:"):
        return "fitted", int(text.split(":", 1)[1])
    raise SystemExit(f"mode must be 'taylor' or 'fitted[:degree]', got {text!r}")


def _build_config(args, pixels=1):
    dims = theory_dims(args.depth, args.eps, args.delta, pixels=pixels)
    dims.update(_parse_dims(args.dims))
    mode, fitted_degree = _parse_mode(args.mode)
    kwargs = dict(
        eps=args.eps,
        delta=args.delta,
        depth=args.depth,
        dims=dims,
        seed=args.seed,
        mode=mode,
    )
    if fitted_degree is not None:
        kwargs["fitted_degree"] = fitted_degree
    if args.p is not None or args.p_prime is not None:
        kwargs["p"] = args.p
        kwargs["p_prime"] = args.p_prime
    config = SketchConfig(**kwargs)
    for note in config.notes:
        print(f"note: {note}", file=sys.stderr)
    print(f"dims: {config.dims}", file=sys.stderr)
    return config


def _load_vector(text):
    return np.array([float(t) for t in text.split(",")], dtype=np.float64)


def _resolve_lambda(text):
    if text in LAMBDA_PRESETS:
        return LAMBDA_PRESETS[text]
    try:
        return float(text)
    except ValueError:
        raise SystemExit(
            f"--regularizer must be a number or one of {sorted(LAMBDA_PRESETS)}"
        ) from None


def _cmd_features(args):
    if args.kind == "ntk":
        data, labels = load_dataset(args.data, args.format)
        config = _build_config(args)
        state = NtkSketchState(data.shape[1], config)
    else:
        data, labels = load_dataset(args.data, "raw-image-tensor")
        d1, d2, c = data.shape[1:]
        config = _build_config(args, pixels=d1 * d2)
        state = CntkSketchState(d1, d2, c, args.filter, config)
    features = batch_transform(state, data)
    save_features(args.out, features)
    print(f"wrote {features.data.shape[0]}x{features.data.shape[1]} features to {args.out}")
    if labels is not None and args.labels_out:
        np.savetxt(args.labels_out, labels, fmt="%.10g")
        print(f"wrote labels to {args.labels_out}")


def _cmd_regress(args):
    train = load_features(args.train)
    test = load_features(args.test)
    train_y = np.loadtxt(args.train_labels)
    test_y = np.loadtxt(args.test_labels)
    lam = _resolve_lambda(args.regularizer)
    if args.classes:
        targets = encode_labels(train_y.astype(int), args.classes)
        model = ridge_fit(train, targets, lam)
        pred = classify(model, test)
        acc = float(np.mean(pred == test_y.astype(int)))
        print(f"lambda={lam} test accuracy: {acc:.4f}")
    else:
        model = ridge_fit(train, train_y, lam)
        pred = predict(model, test)[:, 0]
        rmse = float(np.sqrt(np.mean((pred - test_y) ** 2)))
        print(f"lambda={lam} test rmse: {rmse:.6f}")
    if args.pred_out:
        np.savetxt(args.pred_out, pred, fmt="%.10g")


def _cmd_kernel(args):
    if args.kind == "exact-ntk":
        if args.vec_a and args.vec_b:
            pairs = [(_load_vector(args.vec_a), _load_vector(args.vec_b))]
        elif args.pairs:
            mat = np.loadtxt(args.pairs, delimiter=",", ndmin=2)
            if mat.shape[1] % 2:
                raise SystemExit("--pairs rows must hold y and z concatenated")
            half = mat.shape[1] // 2
            pairs = [(row[:half], row[half:]) for row in mat]
        else:
            raise SystemExit("provide --vec-a/--vec-b or --pairs")
        for y, z in pairs:
            print(f"{theta_ntk(args.depth, y, z):.12g}")
    else:
        left, _ = load_dataset(args.images_a, "raw-image-tensor")
        right, _ = load_dataset(args.images_b, "raw-image-tensor")
        if left.shape != right.shape:
            raise SystemExit("image batches must have matching shapes")
        for y, z in zip(left, right):
            print(f"{theta_cntk(y, z, args.filter, args.depth):.12g}")


def _cmd_validate_poly(args):
    chosen = choose_degrees(args.depth, args.eps)
    rows = [
        ("kappa1", chosen.p, 2 * chosen.p + 2, chosen.kappa1_sup_error),
        ("kappa0", chosen.p_prime, 2 * chosen.p_prime + 1, chosen.kappa0_sup_error),
    ]
    print(f"depth={args.depth} eps={args.eps}")
    print(f"{'target':<8} {'order':>8} {'degree':>8} {'bound':>12} {'measured':>12}")
    for name, order, degree, bound in rows:
        if degree > 4000:
            measured = float("nan")
        else:
            poly = (
                taylor_coeffs_kappa1(order)
                if name == "kappa1"
                else taylor_coeffs_kappa0(order)
            )
            measured = sup_error(poly, name, grid_size=args.grid)
        print(f"{name:<8} {order:>8} {degree:>8} {bound:>12.3e} {measured:>12.3e}")


def _cmd_validate_sketch(args):
    rng = np.random.default_rng(args.seed)
    d, m = 64, 512
    x = rng.standard_normal(d)
    x /= np.linalg.norm(x)
    fails = 0
    for trial in range(args.trials):
        sk = SrhtSketch(d, m, seed=args.seed + trial, label="validate")
        fails += abs(np.linalg.norm(sk.apply(x)) ** 2 - 1.0) > args.eps
    print(
        f"srht d={d} m={m}: {fails}/{args.trials} norm failures at eps={args.eps}"
    )
    for degree in (2, 3):
        x16 = rng.standard_normal(16)
        x16 /= np.linalg.norm(x16)
        fails = 0
        for trial in range(args.trials):
            tree = PolySketchTree(
                degree, 16, 2048, seed=args.seed + trial, use_sparse_leaves=False,
                label="validate",
            )
            out = tree.apply_tensor_power_prefixes(x16)[0]
            fails += abs(out @ out - 1.0) > args.eps
        print(
            f"polysketch p={degree} m=2048: {fails}/{args.trials} norm failures "
            f"at eps={args.eps}"
        )


def _cmd_plot(args):
    depths = [int(t) for t in args.depths.split(",")]
    grid = np.linspace(-1.0, 1.0, args.grid)
    cols = [k_relu_grid(L, grid) / (L + 1) for L in depths]
    out = sys.stdout if args.out == "-" else open(args.out, "w")
    try:
        out.write("alpha," + ",".join(f"depth{L}" for L in depths) + "\n")
        for i, a in enumerate(grid):
            out.write(f"{a:.8g}," + ",".join(f"{c[i]:.10g}" for c in cols) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
            print(f"wrote {args.out}", file=sys.stderr)


def _add_sketch_flags(parser):
    parser.add_argument("--depth", type=int, required=True)
    parser.add_argument("--eps", type=float, default=0.5)
    parser.add_argument("--delta", type=float, default=0.1)
    parser.add_argument("--mode", default="taylor", help="taylor or fitted[:degree]")
    parser.add_argument("--p", type=int, default=None, help="kappa1 truncation order")
    parser.add_argument("--p-prime", type=int, default=None, help="kappa0 truncation order")
    parser.add_argument(
        "--dims", default="", help="overrides, e.g. s=2048,r=4096,s_star=1024"
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ntksketch",
        description="feature maps approximating deep ReLU tangent kernels",
    )
    parser.add_argument("--config", default=None, help="JSON file with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    feat = sub.add_parser("features", help="transform a dataset into features")
    feat_sub = feat.add_subparsers(dest="kind", required=True)
    for kind in ("ntk", "cntk"):
        fp = feat_sub.add_parser(kind)
        fp.add_argument("--data", required=True)
        fp.add_argument("--out", required=True)
        fp.add_argument("--labels-out", default=None)
        fp.add_argument("--seed", type=int, default=0)
        _add_sketch_flags(fp)
        if kind == "ntk":
            fp.add_argument("--format", choices=("csv", "libsvm"), default="csv")
        else:
            fp.add_argument("--filter", type=int, default=3)
        fp.set_defaults(func=_cmd_features)

    reg = sub.add_parser("regress", help="ridge regression on feature files")
    reg.add_argument("--train", required=True)
    reg.add_argument("--test", required=True)
    reg.add_argument("--train-labels", required=True)
    reg.add_argument("--test-labels", required=True)
    reg.add_argument(
        "--regularizer",
        "--lambda",
        dest="regularizer",
        default="ntk-shallow",
        help=f"value or preset {sorted(LAMBDA_PRESETS)}",
    )
    reg.add_argument("--classes", type=int, default=None)
    reg.add_argument("--pred-out", default=None)
    reg.add_argument("--seed", type=int, default=0)
    reg.set_defaults(func=_cmd_regress)

    ker = sub.add_parser("kernel", help="exact kernel evaluation")
    ker_sub = ker.add_subparsers(dest="kind", required=True)
    kn = ker_sub.add_parser("exact-ntk")
    kn.add_argument("--depth", type=int, required=True)
    kn.add_argument("--vec-a", default=None, help="comma separated values")
    kn.add_argument("--vec-b", default=None)
    kn.add_argument("--pairs", default=None, help="CSV, each row y then z")
    kn.add_argument("--seed", type=int, default=0)
    kn.set_defaults(func=_cmd_kernel)
    kc = ker_sub.add_parser("exact-cntk")
    kc.add_argument("--depth", type=int, required=True)
    kc.add_argument("--filter", type=int, default=3)
    kc.add_argument("--images-a", required=True, help="raw-image-tensor file")
    kc.add_argument("--images-b", required=True)
    kc.add_argument("--seed", type=int, default=0)
    kc.set_defaults(func=_cmd_kernel)

    val = sub.add_parser("validate", help="polynomial and sketch diagnostics")
    val_sub = val.add_subparsers(dest="kind", required=True)
    vp = val_sub.add_parser("poly")
    vp.add_argument("--eps", type=float, required=True)
    vp.add_argument("--depth", type=int, default=2)
    vp.add_argument("--grid", type=int, default=10_000)
    vp.add_argument("--seed", type=int, default=0)
    vp.set_defaults(func=_cmd_validate_poly)
    vs = val_sub.add_parser("sketch")
    vs.add_argument("--eps", type=float, default=0.3)
    vs.add_argument("--trials", type=int, default=200)
    vs.add_argument("--seed", type=int, default=0)
    vs.set_defaults(func=_cmd_validate_sketch)

    plot = sub.add_parser("plot", help="kernel curve grids")
    plot_sub = plot.add_subparsers(dest="kind", required=True)
    pr = plot_sub.add_parser("relu-ntk")
    pr.add_argument("--depths", default="2,4,8,16,32")
    pr.add_argument("--grid", type=int, default=201)
    pr.add_argument("--out", default="-")
    pr.add_argument("--seed", type=int, default=0)
    pr.set_defaults(func=_cmd_plot)
    return parser


def _apply_config_file(parser, argv):
    # Pre-scan for --config and use its contents as argument defaults.
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    with open(argv[idx + 1]) as fh:
        overrides = json.load(fh)
    out = list(argv)
    for key, value in overrides.items():
        flag = "--" + key.replace("_", "-")
        if flag not in out:
            out.extend([flag, str(value)])
    return out


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    argv = _apply_config_file(parser, argv)
    args = parser.parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main()
