"""Command-line pipeline: synth / sample / train / score / search / evaluate.

Every command is a pure function of (config file, flag overrides, input
files, seed): primary outputs are byte-stable across reruns.  The resolved
configuration is echoed into the output directory next to the artifacts.

Exit codes: 0 success, 2 validation problem, 3 runtime failure (sampler
stall, numerical instability, divergence, empty beam), 4 I/O problem.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import os
import sys

import numpy as np

from .dataset import (
    GraphSet,
    SynthSpec,
    compute_marginals,
    load_graph_set,
    save_graph_set,
    synth_generate,
)
from .denoiser import Denoiser, DenoiserConfig, TrainConfig, train
from .diffusion import (
    DigressContext,
    DigressSchedule,
    DiscoContext,
    NoiseSchedule,
    TransitionKernel,
)
from .errors import (
    DivergenceError,
    EmptyBeamError,
    MotifdiffError,
    NumericalInstabilityError,
    ParseError,
    StallError,
    ValidationError,
)
from .evaluation import rank_eval, verify_top_n, write_rank_report_csv
from .graphs import induced_subgraph
from .patterns import PatternKey
from .sampling import SampleConfig, enumerate_k_subgraphs, sample
from .search import BeamConfig, beam_search, save_beam

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


def _load_config(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    if path:
        read = parser.read(path)
        if not read:
            raise OSError(f"config file {path!r} not found")
    return parser


def _get(cfg, section, key, fallback=None, cast=str):
    if cfg.has_option(section, key):
        return cast(cfg.get(section, key))
    return fallback


def _echo_config(cfg: configparser.ConfigParser, overrides: dict, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    resolved = configparser.ConfigParser()
    resolved.read_dict({s: dict(cfg.items(s)) for s in cfg.sections()})
    for (section, key), value in overrides.items():
        if not resolved.has_section(section):
            resolved.add_section(section)
        resolved.set(section, key, str(value))
    with open(os.path.join(out_dir, "effective.ini"), "w") as fh:
        resolved.write(fh)


def _override(flag_value, cfg, section, key, fallback, cast=str):
    """Flag beats config beats fallback; only None counts as unset."""
    if flag_value is not None:
        return flag_value
    return _get(cfg, section, key, fallback, cast)


def _sample_config(cfg, args) -> SampleConfig:
    return SampleConfig(
        method=_override(args.method, cfg, "sampler", "method", "rand_esu"),
        k=_override(args.k, cfg, "sampler", "k", 3, int),
        tc=_override(args.tc, cfg, "sampler", "tc", 1000, int),
        r=_get(cfg, "sampler", "r", 0.0, float),
        seed=_seed(cfg, args),
    )


def _seed(cfg, args) -> int:
    if args.seed is not None:
        return args.seed
    return _get(cfg, "run", "seed", 0, int)


def _noise_schedule(cfg) -> NoiseSchedule:
    return NoiseSchedule(
        alpha=_get(cfg, "schedule", "alpha", 0.8, float),
        gamma=_get(cfg, "schedule", "gamma", 2.0, float),
        T=_get(cfg, "schedule", "t_max", 1.0, float),
        steps=_get(cfg, "schedule", "steps", 100, int),
    )


def _denoiser_config(cfg, alphabet, seed) -> DenoiserConfig:
    return DenoiserConfig(
        alphabet=alphabet,
        hidden=_get(cfg, "denoiser", "hidden", 64, int),
        layers=_get(cfg, "denoiser", "layers", 3, int),
        time_width=_get(cfg, "denoiser", "time_width", 32, int),
        max_level=_get(cfg, "denoiser", "max_level", 32, int),
        edge_loss_weight=_get(cfg, "denoiser", "edge_loss_weight", 5.0, float),
        seed=seed,
    )


def _train_config(cfg, seed) -> TrainConfig:
    return TrainConfig(
        epochs=_get(cfg, "train", "epochs", 200, int),
        batch_size=_get(cfg, "train", "batch_size", 64, int),
        lr=_get(cfg, "train", "lr", 1e-3, float),
        clip_norm=_get(cfg, "train", "clip_norm", 5.0, float),
        seed=seed,
    )


def _estimator_context(cfg, variant, graphs):
    if variant == "disco":
        a, b = graphs.alphabet
        return DiscoContext(TransitionKernel(a, b), _noise_schedule(cfg))
    if variant == "digress":
        marginals = compute_marginals(graphs.graphs)
        return DigressContext(DigressSchedule(
            T_steps=_get(cfg, "digress", "t_steps", 100, int),
            marginals=marginals,
            s=_get(cfg, "digress", "s", 0.008, float),
        ))
    raise ValidationError(f"unknown estimator variant {variant!r}")


def _constraint_from_config(cfg):
    require_class = _get(cfg, "beam", "require_node_class", None, int)
    max_degree = _get(cfg, "beam", "max_degree", None, int)
    if require_class is None and max_degree is None:
        return None

    def predicate(graph) -> bool:
        if require_class is not None and not np.any(
                np.asarray(graph.node_types) == require_class):
            return False
        if max_degree is not None:
            et = np.asarray(graph.edge_types)
            indeg = np.count_nonzero(et, axis=0)
            outdeg = np.count_nonzero(et, axis=1)
            if indeg.max(initial=0) > max_degree or outdeg.max(initial=0) > max_degree:
                return False
        return True

    return predicate


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    cfg = _load_config(args.config)
    seed = _seed(cfg, args)
    planted = []
    motifs_path = _get(cfg, "dataset", "motifs_path")
    if motifs_path:
        from .patterns import Pattern, pattern_key

        motif_set = load_graph_set(motifs_path)
        rates = [float(x) for x in
                 _get(cfg, "dataset", "motif_rates", "").split(",") if x]
        if len(rates) != len(motif_set.graphs):
            raise ValidationError("motif_rates must list one rate per motif")
        planted = [(Pattern(g, pattern_key(g)), rate)
                   for g, rate in zip(motif_set.graphs, rates)]
    spec = SynthSpec(
        num_graphs=_get(cfg, "dataset", "num_graphs", 100, int),
        nodes_min=_get(cfg, "dataset", "nodes_min", 8, int),
        nodes_max=_get(cfg, "dataset", "nodes_max", 12, int),
        alphabet=(
            _get(cfg, "dataset", "a", 3, int),
            _get(cfg, "dataset", "b", 2, int),
        ),
        planted=planted,
        density=_get(cfg, "dataset", "density", 0.25, float),
        seed=seed,
    )
    graph_set = synth_generate(spec)
    _echo_config(cfg, {("run", "seed"): seed}, args.out)
    out_path = os.path.join(args.out, "dataset.jsonl")
    save_graph_set(graph_set, out_path)
    print(f"wrote {len(graph_set)} graphs to {out_path}")
    return EXIT_OK


def cmd_sample(args) -> int:
    cfg = _load_config(args.config)
    graphs = load_graph_set(args.dataset)
    sample_cfg = _sample_config(cfg, args)
    result = sample(graphs, sample_cfg)
    _echo_config(cfg, {("run", "seed"): sample_cfg.seed}, args.out)
    dump = GraphSet(
        graphs=[induced_subgraph(graphs.graph_by_id(i.graph_id), i.nodes)
                for i in result.instances],
        ids=[f"s{n:06d}" for n in range(len(result.instances))],
        alphabet=graphs.alphabet,
    )
    out_path = os.path.join(args.out, "samples.jsonl")
    save_graph_set(dump, out_path)
    meta = {
        "method": sample_cfg.method,
        "k": sample_cfg.k,
        "tc": sample_cfg.tc,
        "r": sample_cfg.r,
        "seed": sample_cfg.seed,
        "weights": result.weights.tolist() if result.weights is not None else None,
        "instances": [
            {"graph_id": i.graph_id, "nodes": list(i.nodes)}
            for i in result.instances
        ],
        "stats": {
            "draws": result.stats.draws,
            "rejections": result.stats.rejections,
            "passes": result.stats.passes,
        },
    }
    with open(os.path.join(args.out, "samples.meta.json"), "w") as fh:
        json.dump(meta, fh, indent=1)
    print(f"wrote {len(dump)} samples to {out_path}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load_config(args.config)
    seed = _seed(cfg, args)
    samples = load_graph_set(args.samples)
    if not samples.graphs:
        raise ValidationError("sample file holds no graphs")
    sizes = {g.num_nodes for g in samples.graphs}
    if len(sizes) != 1:
        raise ValidationError(f"training samples must share one size, got {sizes}")
    variant = _override(args.variant, cfg, "estimator", "variant", "disco")
    den_cfg = _denoiser_config(cfg, samples.alphabet, seed)
    train_cfg = _train_config(cfg, seed)
    if variant == "digress":
        sched = DigressSchedule(
            T_steps=_get(cfg, "digress", "t_steps", 100, int),
            marginals=compute_marginals(samples.graphs),
            s=_get(cfg, "digress", "s", 0.008, float),
        )
    else:
        sched = _noise_schedule(cfg)
    params, curve = train(samples.graphs, den_cfg, train_cfg, sched)
    _echo_config(cfg, {("run", "seed"): seed}, args.out)
    ckpt_path = os.path.join(args.out, "denoiser.ckpt")
    Denoiser(den_cfg, params).save(ckpt_path)
    with open(os.path.join(args.out, "loss_curve.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "mean_loss"])
        for epoch, value in enumerate(curve):
            writer.writerow([epoch, f"{value:.10g}"])
    print(f"trained {train_cfg.epochs} epochs; final loss "
          f"{curve[-1] if curve else float('nan'):.4f}; wrote {ckpt_path}")
    return EXIT_OK


def cmd_score(args) -> int:
    cfg = _load_config(args.config)
    seed = _seed(cfg, args)
    graphs = load_graph_set(args.graphs)
    denoiser = Denoiser.load(args.checkpoint)
    if tuple(denoiser.config.alphabet) != tuple(graphs.alphabet):
        raise ValidationError(
            f"checkpoint alphabet {denoiser.config.alphabet} does not match "
            f"graph file alphabet {graphs.alphabet}")
    variant = _override(args.variant, cfg, "estimator", "variant", "disco")
    rounds = _override(args.rounds, cfg, "estimator", "rounds", 20, int)
    ctx = _estimator_context(cfg, variant, graphs)
    _echo_config(cfg, {("run", "seed"): seed}, args.out)
    out_path = os.path.join(args.out, "scores.csv")
    posterior_fn = denoiser.posterior_fn()
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["graph_id", "log_prob", "trials"])
        for gid, g in zip(graphs.ids, graphs.graphs):
            rng = np.random.default_rng([seed, *gid.encode("utf-8")])
            estimate = ctx.log_prob(g, posterior_fn, rounds, rng)
            writer.writerow([gid, f"{estimate.mean_log_prob:.10g}", rounds])
    print(f"scored {len(graphs)} graphs into {out_path}")
    return EXIT_OK


def cmd_search(args) -> int:
    cfg = _load_config(args.config)
    seed = _seed(cfg, args)
    graphs = load_graph_set(args.dataset)
    k_max = _override(args.k_max, cfg, "beam", "k_max", 6, int)
    if k_max < 4:
        raise ValidationError("k_max must be >= 4")
    beam_cfg = BeamConfig(
        k_max=k_max,
        beam_width=_get(cfg, "beam", "beam_width", 50, int),
        rounds=_override(args.rounds, cfg, "estimator", "rounds", 20, int),
        constraint=_constraint_from_config(cfg),
        seed=seed,
        instance_cap=_get(cfg, "beam", "instance_cap", 5000, int),
    )
    denoisers = {}
    for size in range(4, k_max + 1):
        path = os.path.join(args.checkpoints, f"denoiser_k{size}.ckpt")
        if not os.path.exists(path):
            raise OSError(f"missing checkpoint {path}")
        denoisers[size] = Denoiser.load(path)
    variant = _override(args.variant, cfg, "estimator", "variant", "disco")
    ctx = _estimator_context(cfg, variant, graphs)
    beam = beam_search(graphs, beam_cfg, denoisers, ctx)
    _echo_config(cfg, {("run", "seed"): seed}, args.out)
    beam_path = os.path.join(args.out, "beam.jsonl")
    save_beam(beam, beam_path)
    cutoff = _get(cfg, "beam", "verify_cutoff", 60.0, float)
    top = [entry.pattern.graph for _, entry in beam.ranked()[: args.verify_top]]
    report = verify_top_n(top, graphs, cutoff=cutoff, threads=args.threads)
    with open(os.path.join(args.out, "verification.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "count_or_timeout"])
        for rank, count in enumerate(report.counts):
            writer.writerow([rank, count if isinstance(count, int) else "timeout"])
        writer.writerow(["mean", report.mean if report.mean is not None else "n/a"])
        writer.writerow(["median",
                         report.median if report.median is not None else "n/a"])
    status = "truncated" if beam.truncated else "complete"
    print(f"beam search {status} at k={beam.k} with {len(beam.entries)} patterns; "
          f"wrote {beam_path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _load_config(args.config)
    graphs = load_graph_set(args.dataset)
    k = _override(args.k, cfg, "sampler", "k", 4, int)
    census = enumerate_k_subgraphs(graphs, k)
    truth = {key: float(count) for key, (_, count, _) in census.items()}
    if args.scores_csv:
        scores: dict[PatternKey, float] = {}
        with open(args.scores_csv, newline="") as fh:
            for row in csv.DictReader(fh):
                scores[PatternKey(bytes.fromhex(row["class_key"]))] = float(
                    row["score"])
        estimator_mode = True
    elif args.sample_dump:
        dump = load_graph_set(args.sample_dump)
        sizes = {g.num_nodes for g in dump.graphs}
        if sizes and sizes != {k}:
            raise ValidationError(
                f"sample dump holds sizes {sizes}, evaluation expects k={k}")
        scores = {}
        from .patterns import pattern_key

        for g in dump.graphs:
            key = pattern_key(g)
            scores[key] = scores.get(key, 0.0) + 1.0
        estimator_mode = False
    else:
        scores = dict(truth)
        estimator_mode = True
    report = rank_eval(truth, scores, estimator_mode=estimator_mode)
    _echo_config(cfg, {}, args.out)
    out_path = os.path.join(args.out, "rank_eval.csv")
    write_rank_report_csv(report, out_path)
    print(f"rho={report.spearman_rho:.4f} tau={report.kendall_tau:.4f} "
          f"classes={report.n_classes} zero_filled={report.zero_filled}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motifdiff",
        description="frequent subgraph discovery with a diffusion estimator")
    parser.add_argument("--threads", type=int,
                        default=int(os.environ.get("MOTIFDIFF_THREADS", "0")) or None,
                        help="worker threads for verification (default: auto)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    common(p)

    p = sub.add_parser("sample", help="sample connected k-subgraphs")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--method", default=None, choices=[
        "ars", "nrs", "rand_esu", "rand_fase", "exact_esu"])
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--tc", type=int, default=None)

    p = sub.add_parser(
        "train",
        help="train the denoiser on a sample file (always a fresh run; "
             "checkpoints are never resumed)")
    common(p)
    p.add_argument("--samples", required=True)
    p.add_argument("--variant", default=None, choices=["disco", "digress"])

    p = sub.add_parser("score", help="estimate log-probability per input graph")
    common(p)
    p.add_argument("--graphs", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--variant", default=None, choices=["disco", "digress"])
    p.add_argument("--rounds", type=int, default=None)

    p = sub.add_parser("search", help="beam-search frequent patterns")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--checkpoints", required=True,
                   help="directory holding denoiser_k{size}.ckpt files")
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--variant", default=None, choices=["disco", "digress"])
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--verify-top", type=int, default=50)

    p = sub.add_parser("evaluate", help="rank-correlate a method against truth")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--k", type=int, default=None)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--scores-csv", default=None,
                       help="CSV with class_key,score columns (estimator mode)")
    group.add_argument("--sample-dump", default=None,
                       help="dataset-io file of sampled subgraphs (baseline mode)")
    return parser


COMMANDS = {
    "synth": cmd_synth,
    "sample": cmd_sample,
    "train": cmd_train,
    "score": cmd_score,
    "search": cmd_search,
    "evaluate": cmd_evaluate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValidationError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (StallError, NumericalInstabilityError, DivergenceError,
            EmptyBeamError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MotifdiffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
