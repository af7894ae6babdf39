"""Command-line front end: ``dtmi <subcommand> [options]``.

Every subcommand writes a canonical JSON run report (to ``--out`` or
stdout); ``--plot`` adds an SVG where a series is produced.  Exit status is
0 on success, 2 for bad input and 3 for numerically infeasible requests.

The ``--config`` file is JSON with optional sections::

    {
      "state_space": {"labels": ["a", "b"], "prior": [0.5, 0.5]},
      "encoder":     {"codewords": [[0, 1], [1, 0]], "alphabet_size": 2, "repeat": 1},
      "channel":     {"type": "bsc", "crossover": 0.1},
      "decoder":     {"kind": "ml", "epsilon": 0.05, "reference": "induced"},
      "sweep":       {"axis": "snr_db", "values": [-10, 0, 10, 20], "m_classes": 9}
    }

Channel types: ``bsc`` (crossover), ``symmetric`` (q, error), ``dmc``
(table), ``gaussian`` (sigma).  An encoder may instead give ``probs`` as an
m x n x |X| array, and ``levels`` for Gaussian channels.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from dataclasses import replace

import numpy as np

from . import bounds as bnd
from .core import ESTIMATORS, StateSpace, as_seed, validate_state_space
from .errors import DTMIError, InfeasibleError, IoError, ValidationError
from .infotheory import empirical_joint, plugin_mi
from .knn_mi import EstimatorConfig, estimate_dtmi
from .report import (
    RunReport,
    emit_line_plot,
    emit_report,
    canonical_json,
    load_labeled_csv,
    load_matrix_csv,
    load_paired_csv,
    load_series_csv,
    pearson,
)
from .simchannel import (
    Decoder,
    DMCModel,
    FeatureEncoder,
    GaussianChannel,
    build_repetition_encoder,
    cross_mi_exact,
    exact_channel_mi,
    induced_joint_tables,
    run_monte_carlo,
)
from .typicality import ReferenceJoint, independent_match_bound, matching_set_log_size_bound, typicality_probability

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 2, 3


# -- config ----------------------------------------------------------------

def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    unknown = set(cfg) - {"state_space", "encoder", "channel", "decoder", "sweep"}
    if unknown:
        raise ValidationError(f"unknown config sections: {sorted(unknown)}")
    return cfg


def _need(cfg, section):
    if section not in cfg:
        raise ValidationError(f"config lacks a {section!r} section")
    return cfg[section]


def build_encoder(sec) -> FeatureEncoder:
    if "probs" in sec:
        return FeatureEncoder(np.asarray(sec["probs"], dtype=float), sec.get("levels"))
    if "codewords" in sec:
        enc = build_repetition_encoder(sec["codewords"], sec.get("repeat", 1), sec.get("alphabet_size"))
        if "levels" in sec:
            enc = FeatureEncoder(enc.probs, sec["levels"])
        return enc
    raise ValidationError("encoder needs 'codewords' or 'probs'")


def build_channel(sec):
    kind = sec.get("type")
    if kind == "bsc":
        return DMCModel.bsc(sec["crossover"])
    if kind == "symmetric":
        return DMCModel.symmetric(int(sec["q"]), float(sec["error"]))
    if kind == "dmc":
        return DMCModel(np.asarray(sec["table"], dtype=float))
    if kind == "gaussian":
        return GaussianChannel(sec["sigma"])
    raise ValidationError(f"unknown channel type {kind!r}")


def build_state_space(cfg, m) -> StateSpace:
    sec = cfg.get("state_space", {})
    labels = sec.get("labels", [f"w{i}" for i in range(m)])
    if "prior" in sec:
        return validate_state_space(labels, sec["prior"])
    return StateSpace.uniform(labels)


def build_decoder(cfg, epsilon) -> Decoder:
    sec = cfg.get("decoder", {})
    return Decoder(sec.get("kind", "ml"), float(sec.get("epsilon", epsilon)), sec.get("reference", "induced"))


def _system(cfg):
    enc = build_encoder(_need(cfg, "encoder"))
    ch = build_channel(_need(cfg, "channel"))
    space = build_state_space(cfg, enc.m)
    if space.m != enc.m:
        raise ValidationError(f"state space has {space.m} states, encoder {enc.m}")
    return space, enc, ch


# -- subcommands --------------------------------------------------------------

def _estimator(args):
    return EstimatorConfig(args.estimator, args.k, args.aggregation, args.seed)


def _row_codes(a):
    return np.unique(a, axis=0, return_inverse=True)[1].ravel()


def cmd_mi_estimate(args, cfg):
    samples = load_paired_csv(args.x, args.y)
    if args.estimator == "plugin":
        joint = empirical_joint(_row_codes(samples.x), _row_codes(samples.y))
        est = plugin_mi(joint)
        est = replace(est, n_samples=samples.n_samples)
    else:
        est = estimate_dtmi(samples, _estimator(args), workers=args.workers)
    return {"estimate": est}, None


def cmd_bounds(args, cfg):
    if cfg.get("encoder"):
        space, enc, ch = _system(cfg)
        mi = exact_channel_mi(enc, ch, space.prior).total
        h_w, m, n = space.entropy_bits(), space.m, enc.n
        cross = cross_mi_exact(enc, ch, space.prior)
        prior = space.prior
    else:
        if args.mi is None or args.m is None:
            raise ValidationError("give --m and --mi (and optionally --h-w, --n), or a config")
        m = args.m
        h_w = math.log2(m) if args.h_w is None else args.h_w
        mi, n = args.mi, args.n
        prior = np.full(m, 1.0 / m)
        cross = np.full((m, m), mi)
    report = bnd.bound_report(h_w, mi, m, cross, prior, n, args.epsilon)
    return {
        "bounds": report,
        "preprocessing": bnd.preprocessing_check(h_w, mi),
        "rate_bits": bnd.sensing_rate(m, n),
    }, None


def cmd_simulate(args, cfg):
    space, enc, ch = _system(cfg)
    decoder = build_decoder(cfg, args.epsilon)
    mc = run_monte_carlo(space, enc, ch, decoder, args.trials, args.seed, args.workers)
    res = {"monte_carlo": mc, "decoder": decoder.__dict__}
    if isinstance(ch, DMCModel):
        mi = exact_channel_mi(enc, ch, space.prior).total
        report = bnd.bound_report(space.entropy_bits(), mi, space.m, cross_mi_exact(enc, ch, space.prior),
                                  space.prior, enc.n, decoder.epsilon)
        hw = mc.half_width
        lower_ok = mc.p_e >= report.lower_tight - 3 * hw
        upper_ok = mc.p_e <= report.upper_clamped + 3 * hw
        res["bounds"] = report
        res["sandwich"] = {
            "lower_holds": bool(lower_ok),
            # the upper bound is stated for the typicality decoder
            "upper_holds": bool(upper_ok) if decoder.kind == "typicality" else None,
        }
    return res, None


def cmd_typicality(args, cfg):
    space, enc, ch = _system(cfg)
    if not isinstance(ch, DMCModel):
        raise ValidationError("typicality analysis needs a discrete channel")
    ref = ReferenceJoint(induced_joint_tables(enc, ch, space.prior))
    eps = args.epsilon
    res = {"n": ref.n, "epsilon": eps, "sum_mi_bits": float(ref.mi_bits.sum())}
    for i, mode in enumerate(("joint_draw", "product_draw")):
        res[mode] = typicality_probability(ref, None, eps, mode, args.trials, as_seed(args.seed).substream(i),
                                         args.workers)
    res["log2_size_bound"] = matching_set_log_size_bound(ref, None, eps)
    res["independent_match_bound"] = independent_match_bound(ref, eps)
    return res, None


def cmd_aoa_sweep(args, cfg):
    from .pipelines.aoa import CARRIER_HZ, SPEED_OF_LIGHT, AoAScenario, ArrayGeometry, aoa_sweep

    sec = dict(cfg.get("sweep", {}))
    axis = sec.get("axis", "snr_db")
    if axis not in ("snr_db", "target_distance_m"):
        raise ValidationError(f"unknown sweep axis {axis!r}")
    values = sec.get("values", [-10, -5, 0, 5, 10, 15, 20])
    values = [float(v) for v in values]
    wavelength = SPEED_OF_LIGHT / float(sec.get("frequency_hz", CARRIER_HZ))
    with warnings.catch_warnings():
        # an over-wide spacing is the user's explicit choice here
        warnings.simplefilter("ignore")
        geom = ArrayGeometry(int(sec.get("q", 3)), float(sec.get("spacing_m", wavelength / 2)), wavelength)
    base = dict(geometry=geom, snr_db=float(sec.get("snr_db", 20.0)), snapshots=int(sec.get("snapshots", 16)),
                m_classes=int(sec.get("m_classes", 9)), target_distance_m=float(sec.get("target_distance_m", 1.0)),
                pathloss_exponent=float(sec.get("pathloss_exponent", 2.0)))
    scenarios = [AoAScenario(**{**base, axis: v}) for v in values]
    est = EstimatorConfig("mixed_ksg" if args.estimator == "plugin" else args.estimator, args.k)
    pts = aoa_sweep(scenarios, args.trials, est, args.seed, values, args.workers)
    acc = [p.accuracy for p in pts]
    res = {"axis": axis, "points": pts, "m_classes": base["m_classes"]}
    try:
        res["pearson_accuracy_dtmi"] = pearson(acc, [p.dtmi_bits for p in pts], ("accuracy", "dtmi")).r
        res["pearson_accuracy_fano"] = pearson(acc, [1 - p.fano_lower for p in pts], ("accuracy", "1-fano")).r
    except ValidationError:
        res["pearson_accuracy_dtmi"] = res["pearson_accuracy_fano"] = None
    plot = {
        "accuracy": (values, acc),
        "DTMI / log2 m": (values, [p.dtmi_bits / math.log2(base["m_classes"]) for p in pts]),
        "1 - Fano bound": (values, [1 - p.fano_lower for p in pts]),
    }
    return res, (plot, axis)


def cmd_classify(args, cfg):
    from .pipelines.classify import cross_validate

    ds = load_labeled_csv(args.data)
    if args.shuffle_labels:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=args.seed, spawn_key=(1,)))
        ds = ds.with_labels([ds.labels[i] for i in rng.permutation(len(ds))])
    est = EstimatorConfig("mixed_ksg" if args.estimator == "plugin" else args.estimator, args.k)
    rep = cross_validate(ds, args.folds, args.knn_k, est, args.seed, args.epsilon)
    return {"cv": rep, "shuffled_labels": bool(args.shuffle_labels)}, None


def cmd_detect(args, cfg):
    from .pipelines.detectors import DetectorConfig, cov_detect, rssi_detect

    sec = cfg.get("decoder", {})
    dc = DetectorConfig(int(args.window or sec.get("window_len", 100)),
                        float(sec.get("threshold_low", 0.935)), float(sec.get("threshold_high", 1.065)),
                        float(sec.get("rssi_threshold", 2.5)))
    data = load_matrix_csv(args.data)
    if args.mode == "cov":
        d = cov_detect(data, dc)
        return {"mode": "cov", "state": d.state, "y": d.y, "config": dc.__dict__}, None
    if args.baseline is None:
        raise ValidationError("rssi mode needs --baseline")
    base = load_series_csv(args.baseline)
    d = rssi_detect(data, base, dc)
    return {"mode": "rssi", "state": d.state, "mean_differential": d.mean_differential, "config": dc.__dict__}, None


def cmd_correlate(args, cfg):
    a = load_series_csv(args.a)
    b = load_series_csv(args.b)
    rep = pearson(a, b, ("a", "b"))
    plot = {"a": (np.arange(a.size), a), "b": (np.arange(b.size), b)}
    return {"correlation": rep}, (plot, "index")


COMMANDS = {
    "mi-estimate": cmd_mi_estimate,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "typicality": cmd_typicality,
    "aoa-sweep": cmd_aoa_sweep,
    "classify": cmd_classify,
    "detect": cmd_detect,
    "correlate": cmd_correlate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="report path (default: stdout)")
    common.add_argument("--plot", help="SVG path for commands that produce a series")
    common.add_argument("--estimator", choices=ESTIMATORS, default="mixed_ksg")
    common.add_argument("--k", type=int, default=3, help="neighbour count for kNN estimators")
    common.add_argument("--aggregation", choices=("joint", "per_dimension_sum"), default="joint")
    common.add_argument("--epsilon", type=float, default=bnd.DEFAULT_EPSILON)
    common.add_argument("--trials", type=int, default=10_000)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--workers", type=int, default=1)

    p = argparse.ArgumentParser(prog="dtmi", description="Task mutual information analysis for sensing.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("mi-estimate", parents=[common], help="MI between two paired CSV files")
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s = sub.add_parser("bounds", parents=[common], help="error bounds from numbers or a channel config")
    s.add_argument("--h-w", dest="h_w", type=float)
    s.add_argument("--mi", type=float)
    s.add_argument("--m", type=int)
    s.add_argument("--n", type=int, default=1)
    sub.add_parser("simulate", parents=[common], help="Monte Carlo error of a configured system")
    sub.add_parser("typicality", parents=[common], help="matching-set probabilities and size bounds")
    sub.add_parser("aoa-sweep", parents=[common], help="MUSIC direction-finding sweep")
    s = sub.add_parser("classify", parents=[common], help="KNN cross-validation on a labeled CSV")
    s.add_argument("--data", required=True)
    s.add_argument("--folds", type=int, default=5)
    s.add_argument("--knn-k", dest="knn_k", type=int, default=5)
    s.add_argument("--shuffle-labels", action="store_true", help="null-model control")
    s = sub.add_parser("detect", parents=[common], help="presence (cov) or door (rssi) detection")
    s.add_argument("--mode", choices=("cov", "rssi"), required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--baseline")
    s.add_argument("--window", type=int)
    s = sub.add_parser("correlate", parents=[common], help="Pearson correlation of two series")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    return p


_NOT_ECHOED = {"out", "plot", "workers", "config"}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        if args.trials < 1:
            raise ValidationError("--trials must be positive")
        if args.workers < 1:
            raise ValidationError("--workers must be positive")
        cfg = load_config(args.config)
        results, plot = COMMANDS[args.command](args, cfg)
        echo = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}
        echo["config_file"] = cfg
        report = RunReport(args.command, echo, args.seed, results, time.perf_counter() - start)
        if args.out:
            emit_report(report, args.out)
        else:
            stdout.write(canonical_json(report))
        if args.plot:
            if plot is None:
                raise ValidationError(f"{args.command} produces no series to plot")
            series, x_label = plot
            emit_line_plot(series, args.plot, title=args.command, x_label=x_label)
    except InfeasibleError as exc:
        print(f"dtmi: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValidationError, IoError) as exc:
        print(f"dtmi: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except KeyError as exc:
        print(f"dtmi: error: config is missing key {exc.args[0]!r}", file=sys.stderr)
        return EXIT_INPUT
    except DTMIError as exc:
        print(f"dtmi: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
