import argparse
import asyncio
import json
import numpy as np
import pandas as pd
import sys

from pathlib import Path
from typing import Sequence

from . import __version__
from .config import Config, get_config
from .constants import (
    DEFINITION_MEDIAN_STRICT,
    DEFINITION_XBAR_MAJORITY,
    DEFINITIONS,
    EXIT_DATA,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    SOURCE_2K_BINOMIAL,
    SOURCE_2K_GAUSS,
    SOURCE_3K,
    TOOL_VERSION,
)
from .degree_structure import DegreeStatsError, assortativity_from_joint, degree_stats, paradox_weights, q_exceed_prob
from .export import (
    build_manifest,
    edge_list_text,
    graph_summary,
    prediction_frame,
    summary_header,
    write_artifacts,
    write_manifest,
)
from .generate import (
    GenerationError,
    fit_target,
    generate_2k,
    generate_core_periphery,
    joint_from_csv,
    joint_target_matrix,
    rewire_to_assortativity,
)
from .graph import Graph, GraphError, load_edge_list
from .lognormal import LogNormalError, lognormal_assortativity, lognormal_f, sweep_global_paradox, transition_width
from .models import CorePeripheryWiring, GenerationSpec, IngestionReport, LogNormalParams, OutputFile
from .observed import ParadoxError, definition_disagreements, mu_half_crossing, observed_paradox
from .prediction import ModelInputError, predict_2k_binomial, predict_2k_gauss, predict_3k
from .triplet_structure import TripletStructureError, exceedance_profile, smoothed_profile, xbar_distribution
from .utils import sha256_bytes, sha256_file

__all__ = [
    "main",
    "main_sync",
]


# Errors caused by the input data or parameters rather than by the tool; reported with exit code 2.
# pydantic.ValidationError and pandas parser errors are ValueErrors.
DATA_ERRORS = (
    GraphError,
    DegreeStatsError,
    TripletStructureError,
    ParadoxError,
    ModelInputError,
    LogNormalError,
    GenerationError,
    ValueError,
    OSError,
)

MODEL_CHOICES = ("2k", "2k-gauss", "3k", "all")
DEFAULT_SWEEP_GRID = (-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_graph(path: Path, symmetrize: bool) -> tuple[Graph, IngestionReport]:
    with open(path, "r") as fh:
        return load_edge_list(fh, symmetrize=symmetrize)


def _input_summary(path: Path, digest: str) -> dict:
    return {"path": str(path), "sha256": digest}


async def _finish(
    config: Config,
    args,
    command: str,
    files: dict,
    manifest_path: Path,
    input_digests: dict[str, str],
    seeds: Sequence[int] = (),
) -> tuple[OutputFile, ...]:
    outputs = await write_artifacts(files, config.threads)
    await write_manifest(manifest_path, build_manifest(args.command_line, command, input_digests, seeds, outputs))
    return outputs


async def analyze_cmd(config: Config, args) -> int:
    """
    Command to compute the observed degree, joint-degree, exceedance and paradox statistics of an edge list.
    """

    path = Path(args.input)
    digest = sha256_file(path)
    g, report = await asyncio.to_thread(_load_graph, path, not args.no_symmetrize)

    stats = degree_stats(g)
    profile = exceedance_profile(g)
    observed = observed_paradox(g, args.definition)
    xbar = xbar_distribution(g, observed.k_c)

    out = Path(args.out_dir)
    files = {
        out / "degree.csv": stats.degree_frame(),
        out / "joint.csv": stats.joint_frame(),
        out / "exceedance.csv": profile.to_frame(),
        out / "paradox.csv": observed.to_frame(),
        out / "xbar_kc.csv": xbar.to_frame(),
    }
    if args.bins == "log":
        files[out / "exceedance_smoothed.csv"] = smoothed_profile(
            profile, config.smoothing_min_samples, config.smoothing_bin_ratio
        )

    files[out / "summary.json"] = {
        **summary_header("analyze"),
        "input": _input_summary(path, digest),
        "ingestion": report.model_dump(mode="json"),
        "graph": graph_summary(g, stats),
        "definition": args.definition,
        "q_exceed_prob": q_exceed_prob(stats),
        "k_c": observed.k_c,
        "mu_half_crossing": mu_half_crossing(profile),
        "global_p": observed.global_p,
        "paradox_nodes": int(observed.paradox_nodes.sum()),
        "active_nodes": int(observed.nodes.sum()),
        "excluded_isolated": observed.excluded_isolated,
        "definition_disagreements": [{"k": k, "nodes": n} for k, n in definition_disagreements(g).items()],
        "xbar_at_critical_degree": {
            "k": xbar.degree,
            "nodes": xbar.node_count,
            "mean": float(xbar.mean()),
            "variance": xbar.variance(),
        },
    }

    await _finish(config, args, "analyze", files, out / "manifest.json", {str(path): digest})
    print(f"global_p={observed.global_p:.6f} k_c={observed.k_c} r={stats.assortativity:.6f}")
    return EXIT_OK


async def predict_cmd(config: Config, args) -> int:
    """
    Command to compare the observed per-degree paradox fraction with the 2K (binomial and Gaussian) and 3K model
    predictions, all estimated from the same graph.
    """

    path = Path(args.input)
    digest = sha256_file(path)
    g, _ = await asyncio.to_thread(_load_graph, path, not args.no_symmetrize)

    stats = degree_stats(g)
    profile = exceedance_profile(g)
    observed = observed_paradox(g, args.definition)

    mu = profile.mu_map()
    pop = paradox_weights(stats)

    predictions = {}
    if args.model in ("2k", "all"):
        predictions[SOURCE_2K_BINOMIAL] = predict_2k_binomial(mu, pop, observed.k_c)
    if args.model in ("2k-gauss", "all"):
        predictions[SOURCE_2K_GAUSS] = predict_2k_gauss(mu, pop, observed.k_c)
    if args.model in ("3k", "all"):
        predictions[SOURCE_3K] = predict_3k(
            mu, profile.cov_map(), pop, observed.k_c, epsilon=config.variance_floor_epsilon
        )

    models = {
        source: {
            "global_p": prediction.global_p,
            "mean_abs_error": float(np.mean(np.abs(prediction.f - observed.f))),
            "flagged_classes": sorted(prediction.flags),
        }
        for source, prediction in predictions.items()
    }

    out = Path(args.out_dir)
    files = {
        out / "predictions.csv": prediction_frame(observed, predictions),
        out / "summary.json": {
            **summary_header("predict"),
            "input": _input_summary(path, digest),
            "definition": args.definition,
            "k_c": observed.k_c,
            "observed_global_p": observed.global_p,
            "models": models,
        },
    }

    await _finish(config, args, "predict", files, out / "manifest.json", {str(path): digest})

    for source, m in models.items():
        print(f"{source}: global_p={m['global_p']:.6f} mean_abs_error={m['mean_abs_error']:.6f}")

    if args.strict and (flagged := sum(len(m["flagged_classes"]) for m in models.values())):
        print(f"{flagged} degree classes carry numerical flags", file=sys.stderr)
        return EXIT_NUMERICAL

    return EXIT_OK


def _generate(config: Config, args, seed: int) -> tuple[Graph, dict | None, float | None, str, dict[str, str]]:
    """:return: (graph, generation report or None, target assortativity or None, spec digest, input digests)"""

    match args.generator:
        case "lognormal" | "matrix":
            input_digests: dict[str, str] = {}
            if args.generator == "lognormal":
                target = LogNormalParams(m=args.m, s=args.s, c=args.c)
                target_r = lognormal_assortativity(target)
            else:
                path = Path(args.matrix)
                input_digests[str(path)] = sha256_file(path)
                target = joint_from_csv(path)
                target_r, _ = assortativity_from_joint(*joint_target_matrix(target))

            spec = GenerationSpec(
                target_e=target,
                node_count=args.nodes,
                seed=seed,
                max_retries=config.generation_max_retries,
                k_max=args.k_max or config.lognormal_k_max,
                repair_tolerance=config.repair_tolerance,
            )
            g, report = generate_2k(spec)
            return g, report.model_dump(mode="json"), target_r, report.spec_digest, input_digests

        case "core-periphery":
            wiring = CorePeripheryWiring(
                mid_degree=args.mid_degree,
                beta=args.beta,
                majority=args.majority,
                core_density=args.core_density,
            )
            g = generate_core_periphery(args.core, args.mid, args.leaf, wiring, seed)
            digest = sha256_bytes(
                json.dumps(
                    {
                        "core": args.core,
                        "mid": args.mid,
                        "leaf": args.leaf,
                        "wiring": wiring.model_dump(),
                        "seed": seed,
                    },
                    sort_keys=True,
                ).encode("utf-8")
            )
            return g, None, None, digest, {}

        case _:
            raise GenerationError(f"unknown generator: {args.generator}")


async def generate_cmd(config: Config, args) -> int:
    """
    Command to generate a synthetic graph and write it in edge-list format, with the seed and spec digest in the header.
    """

    seed = args.seed if args.seed is not None else config.default_seed
    g, report, target_r, digest, input_digests = await asyncio.to_thread(_generate, config, args, seed)
    stats = degree_stats(g)

    out = Path(args.out)
    header = {
        "generator": args.generator,
        "seed": str(seed),
        "spec_digest": digest,
        "realized_r": f"{stats.assortativity:.6f}",
        "tool_version": TOOL_VERSION,
    }
    files = {
        out: edge_list_text(g, header),
        out.with_suffix(".summary.json"): {
            **summary_header("generate"),
            "generator": args.generator,
            "seed": seed,
            "graph": graph_summary(g, stats),
            "target_assortativity": target_r,
            "report": report,
        },
    }

    await _finish(config, args, "generate", files, out.with_suffix(".manifest.json"), input_digests, (seed,))
    print(f"Wrote {g.node_count} nodes, {g.edge_count} edges to {out} (r={stats.assortativity:.6f})")
    return EXIT_OK


def _empirical_point(m: float, s: float, c: float, node_count: int, seed: int, config: Config, k_max: int, definition):
    spec = GenerationSpec(
        target_e=LogNormalParams(m=m, s=s, c=c),
        node_count=node_count,
        seed=seed,
        max_retries=config.generation_max_retries,
        k_max=k_max,
        repair_tolerance=config.repair_tolerance,
    )
    g, report = generate_2k(spec)
    fitted = fit_target(spec)
    reference = predict_2k_binomial(fitted.mu_map(), fitted.p_map())
    return (
        report.realized_assortativity,
        observed_paradox(g, definition).global_p,
        report.target_assortativity,
        reference.global_p,
    )


async def sweep_cmd(config: Config, args) -> int:
    """
    Command to sweep the log-normal correlation c: analytic f(k) curves, r(c) and the global paradox fraction, plus
    optionally one generated graph per c with its measured r and global paradox fraction. Each generated graph is
    paired with a reference: r and the 2K binomial global fraction of the target as fitted to the degree classes that
    graph populates.
    """

    c_grid = sorted(set(args.c_list))
    k_max = args.k_max or config.lognormal_k_max
    seed = args.seed if args.seed is not None else config.default_seed

    points = await asyncio.to_thread(sweep_global_paradox, args.m, args.s, c_grid, k_max, config.truncation_tolerance)

    curve_k = np.arange(1, args.curve_k_max + 1, dtype=np.int64)
    curves = pd.concat(
        [
            pd.DataFrame({"c": c, "k": curve_k, "f": lognormal_f(LogNormalParams(m=args.m, s=args.s, c=c), curve_k)})
            for c in c_grid
        ],
        ignore_index=True,
    )

    rows = [
        {
            "c": p.c,
            "r": p.r,
            "p_paradox": p.p_paradox,
            "transition_width": transition_width(LogNormalParams(m=args.m, s=args.s, c=p.c), 0.9, 0.1, k_max),
        }
        for p in points
    ]

    seeds = [seed]
    if args.empirical:
        replica_seeds = [
            int(ss.generate_state(1, dtype=np.uint64)[0]) for ss in np.random.SeedSequence(seed).spawn(len(c_grid))
        ]
        seeds.extend(replica_seeds)
        semaphore = asyncio.Semaphore(config.threads)

        async def _replica(c: float, replica_seed: int):
            async with semaphore:
                return await asyncio.to_thread(
                    _empirical_point,
                    args.m,
                    args.s,
                    c,
                    args.empirical,
                    replica_seed,
                    config,
                    k_max,
                    args.definition,
                )

        measured = await asyncio.gather(*(_replica(c, rs) for c, rs in zip(c_grid, replica_seeds)))
        for row, rs, (r_emp, p_emp, r_ref, p_ref) in zip(rows, replica_seeds, measured):
            row.update(
                {
                    "empirical_seed": rs,
                    "empirical_r": r_emp,
                    "empirical_global_p": p_emp,
                    "reference_r": r_ref,
                    "reference_global_p": p_ref,
                }
            )

    table = pd.DataFrame(rows).rename(columns={"p_paradox": "P_paradox"})
    table = table.drop(columns=["transition_width", "empirical_seed"], errors="ignore")
    table = table.rename(
        columns={
            "empirical_r": "r_empirical",
            "empirical_global_p": "global_p_empirical",
            "reference_r": "r_reference",
            "reference_global_p": "P_reference",
        }
    )

    out = Path(args.out_dir)
    files = {
        out / "f_curves.csv": curves,
        out / "global.csv": table,
        out / "summary.json": {
            **summary_header("sweep"),
            "m": args.m,
            "s": args.s,
            "k_max": k_max,
            "definition": args.definition,
            "points": rows,
            "empirical_node_count": args.empirical,
        },
    }

    await _finish(config, args, "sweep", files, out / "manifest.json", {}, seeds)

    for row in rows:
        print(f"c={row['c']:+.3f} r={row['r']:+.4f} P={row['p_paradox']:.6f}")
    return EXIT_OK


async def rewire_cmd(config: Config, args) -> int:
    """
    Command to rewire an edge list toward a target assortativity with degree-preserving double-edge swaps.
    """

    path = Path(args.input)
    digest = sha256_file(path)
    seed = args.seed if args.seed is not None else config.default_seed
    tolerance = args.tolerance if args.tolerance is not None else config.rewire_tolerance
    max_steps = args.max_steps if args.max_steps is not None else config.rewire_max_steps

    g, _ = await asyncio.to_thread(_load_graph, path, not args.no_symmetrize)
    result = await asyncio.to_thread(rewire_to_assortativity, g, args.target_r, tolerance, max_steps, seed)
    stats = degree_stats(result.graph)

    out = Path(args.out)
    header = {
        "rewired_from": digest,
        "seed": str(seed),
        "target_r": f"{args.target_r:.6f}",
        "realized_r": f"{result.achieved_r:.6f}",
        "tool_version": TOOL_VERSION,
    }
    files = {
        out: edge_list_text(result.graph, header),
        out.with_suffix(".summary.json"): {
            **summary_header("rewire"),
            "input": _input_summary(path, digest),
            "seed": seed,
            "target_r": args.target_r,
            "tolerance": tolerance,
            "initial_r": result.initial_r,
            "achieved_r": result.achieved_r,
            "steps": result.steps,
            "accepted_swaps": result.accepted_swaps,
            "reached": result.reached,
            "graph": graph_summary(result.graph, stats),
        },
    }

    await _finish(config, args, "rewire", files, out.with_suffix(".manifest.json"), {str(path): digest}, (seed,))
    print(f"r: {result.initial_r:.6f} -> {result.achieved_r:.6f} ({result.accepted_swaps} swaps, {result.steps} steps)")

    if args.strict and not result.reached:
        print(f"target r={args.target_r} not reached within {max_steps} steps", file=sys.stderr)
        return EXIT_NUMERICAL

    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(description="Strong friendship paradox statistics, models and synthetic graphs.")
    parser.add_argument("--version", "-v", action="version", version=__version__)

    graph_input = _ArgumentParser(add_help=False)
    graph_input.add_argument("input", type=str, help="Edge list: one 'u v' pair of integer ids per line.")
    graph_input.add_argument(
        "--no-symmetrize",
        action="store_true",
        help="Require every edge to be listed in both directions instead of symmetrizing.",
    )

    strict = _ArgumentParser(add_help=False)
    strict.add_argument("--strict", action="store_true", help="Exit with code 3 if numerical flags were raised.")

    seeded = _ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, help="Random seed (default: PARADOX_LENS_DEFAULT_SEED).")

    subparsers = parser.add_subparsers()

    # analyze ----------------------------------------------------------------------------------------------------------
    a_sub = subparsers.add_parser("analyze", parents=[graph_input], help="Observed degree and paradox statistics.")
    a_sub.set_defaults(func=analyze_cmd)
    a_sub.add_argument("--out-dir", type=str, required=True, help="Directory to write artifacts to.")
    a_sub.add_argument("--definition", choices=DEFINITIONS, default=DEFINITION_MEDIAN_STRICT)
    a_sub.add_argument("--bins", choices=("none", "log"), default="none", help="Also write a log-binned profile.")
    # ------------------------------------------------------------------------------------------------------------------

    # predict ----------------------------------------------------------------------------------------------------------
    p_sub = subparsers.add_parser("predict", parents=[graph_input, strict], help="2K / 3K model predictions.")
    p_sub.set_defaults(func=predict_cmd)
    p_sub.add_argument("--out-dir", type=str, required=True, help="Directory to write artifacts to.")
    p_sub.add_argument("--model", choices=MODEL_CHOICES, default="all")
    p_sub.add_argument("--definition", choices=DEFINITIONS, default=DEFINITION_MEDIAN_STRICT)
    # ------------------------------------------------------------------------------------------------------------------

    # generate ---------------------------------------------------------------------------------------------------------
    g_sub = subparsers.add_parser("generate", help="Generate a synthetic graph.")
    g_subparsers = g_sub.add_subparsers()

    target_common = _ArgumentParser(add_help=False, parents=[seeded])
    target_common.add_argument("--nodes", type=int, required=True, help="Number of nodes.")
    target_common.add_argument("--k-max", type=int, help="Largest degree of the log-normal support.")
    target_common.add_argument("--out", type=str, required=True, help="Edge-list file to write.")

    gl = g_subparsers.add_parser("lognormal", parents=[target_common], help="Bivariate log-normal joint degrees.")
    gl.set_defaults(func=generate_cmd, generator="lognormal")
    gl.add_argument("--m", type=float, required=True, help="Mean of the log-degree.")
    gl.add_argument("--s", type=float, required=True, help="Standard deviation of the log-degree.")
    gl.add_argument("--c", type=float, required=True, help="Correlation of the endpoint log-degrees.")

    gm = g_subparsers.add_parser("matrix", parents=[target_common], help="Joint degree matrix from CSV.")
    gm.set_defaults(func=generate_cmd, generator="matrix")
    gm.add_argument("matrix", type=str, help="CSV with columns k, k2 and count or e.")

    gc = g_subparsers.add_parser("core-periphery", parents=[seeded], help="Three-tier core-periphery fixture.")
    gc.set_defaults(func=generate_cmd, generator="core-periphery")
    gc.add_argument("--core", type=int, required=True, help="Core size.")
    gc.add_argument("--mid", type=int, required=True, help="Mid-tier size.")
    gc.add_argument("--leaf", type=int, required=True, help="Number of leaves.")
    gc.add_argument("--mid-degree", type=int, required=True)
    gc.add_argument("--beta", type=float, required=True, help="Probability that a mid node prefers the core.")
    gc.add_argument("--majority", type=float, default=0.9)
    gc.add_argument("--core-density", type=float, default=0.5)
    gc.add_argument("--out", type=str, required=True, help="Edge-list file to write.")
    # ------------------------------------------------------------------------------------------------------------------

    # sweep ------------------------------------------------------------------------------------------------------------
    s_sub = subparsers.add_parser("sweep", parents=[seeded], help="Log-normal correlation sweep.")
    s_sub.set_defaults(func=sweep_cmd)
    s_sub.add_argument("--m", type=float, default=2.5)
    s_sub.add_argument("--s", type=float, default=1.25)
    s_sub.add_argument(
        "--c-list", type=float, nargs="+", default=list(DEFAULT_SWEEP_GRID), metavar="C", help="Correlation grid."
    )
    s_sub.add_argument("--k-max", type=int, help="Largest degree of the discretized support.")
    s_sub.add_argument("--curve-k-max", type=int, default=1000, help="Largest k written to the f(k) curves.")
    s_sub.add_argument(
        "--empirical", type=int, metavar="NODES", help="Also generate one graph with this many nodes per c."
    )
    s_sub.add_argument("--definition", choices=DEFINITIONS, default=DEFINITION_XBAR_MAJORITY)
    s_sub.add_argument("--out-dir", type=str, required=True, help="Directory to write artifacts to.")
    # ------------------------------------------------------------------------------------------------------------------

    # rewire -----------------------------------------------------------------------------------------------------------
    r_sub = subparsers.add_parser("rewire", parents=[graph_input, strict, seeded], help="Rewire toward a target r.")
    r_sub.set_defaults(func=rewire_cmd)
    r_sub.add_argument("--target-r", type=float, required=True)
    r_sub.add_argument("--tolerance", type=float)
    r_sub.add_argument("--max-steps", type=int)
    r_sub.add_argument("--out", type=str, required=True, help="Edge-list file to write.")
    # ------------------------------------------------------------------------------------------------------------------

    return parser


async def main(args: list[str] | None) -> int:
    cfg = get_config()
    args = args if args is not None else sys.argv[1:]

    parser = _build_parser()
    p_args = parser.parse_args(args)
    if not getattr(p_args, "func", None):
        parser.print_help(sys.stderr)
        return EXIT_USAGE

    p_args.command_line = tuple(args)

    try:
        return await p_args.func(cfg, p_args)
    except DATA_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


def main_sync(args: list[str] | None = None):  # pragma: no cover
    return asyncio.run(main(args))


if __name__ == "__main__":  # pragma: no cover
    exit(main_sync(sys.argv[1:]))
