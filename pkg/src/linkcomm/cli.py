"""Command-line entry point: ``linkcomm {detect,enumerate,verify}``.

Reports are JSON documents with ``"schema": 1``. Exit codes: 0 success,
1 I/O error, 2 invalid or mismatched graph (or too large to enumerate),
3 invalid configuration, 4 verification found missed or spurious minima.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import secrets
import sys
import time
from dataclasses import asdict

from linkcomm.errors import ConfigError, GraphError, TooLarge
from linkcomm.graph import Graph, LinkSet, read_edge_list
from linkcomm.landscape import CommunityRecord, enumerate_landscape, local_minima, verify_search_result
from linkcomm.memetic import EvolutionConfig, detect_communities
from linkcomm.search import Resolution

SCHEMA = 1
EXIT_IO, EXIT_GRAPH, EXIT_CONFIG, EXIT_MISMATCH = 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _psi(value: float) -> float:
    return float(f"{value:.12g}")


def graph_summary(g: Graph) -> dict:
    digest = hashlib.sha256()
    for lid in range(g.m):
        u, v = g.link_labels(lid)
        digest.update(f"{u}\t{v}\n".encode())
    return {"n": g.n, "m": g.m, "fingerprint": digest.hexdigest()[:16]}


def _edges(g: Graph, links: LinkSet) -> list[list]:
    return [list(g.link_labels(lid)) for lid in links]


def _numbers(links: LinkSet) -> list[int]:
    return [lid + 1 for lid in links]


def build_config(args) -> EvolutionConfig:
    if args.resolution_abs is not None:
        resolution = Resolution.absolute(args.resolution_abs)
    else:
        resolution = Resolution(args.resolution)
    return EvolutionConfig(
        population_size=args.population,
        variance_low=args.variance_low,
        variance_high=args.variance_high,
        max_best_age=args.max_stale,
        innovation_window=args.innovation_window,
        innovation_threshold=args.innovation_threshold,
        rng_seed=args.seed,
        resolution=resolution,
        crossover_partners_per_gen=args.partners,
        mutants_per_gen=args.mutants,
        linkwise=args.linkwise,
        threads=args.threads,
    )


def _config_echo(cfg: EvolutionConfig) -> dict:
    echo = asdict(cfg)
    echo["resolution"] = {"value": cfg.resolution.value, "relative": cfg.resolution.relative}
    return echo


def detect_report(g: Graph, cfg: EvolutionConfig, timing: dict | None = None) -> dict:
    start = time.perf_counter()
    found = detect_communities(g, cfg)
    elapsed = time.perf_counter() - start
    communities = [
        {
            "links": _edges(g, c.links),
            "link_numbers": _numbers(c.links),
            "psi": _psi(c.psi),
            "range_lower_bound": c.range_lower_bound,
            "size": c.size,
        }
        for c in found
    ]
    overlap = [[(a.bits & b.bits).bit_count() for b in found] for a in found]
    return {
        "schema": SCHEMA,
        "kind": "detect",
        "graph": graph_summary(g),
        "config": _config_echo(cfg),
        "communities": communities,
        "overlap_matrix": overlap,
        "timing": {**(timing or {}), "detect": elapsed},
    }


def oracle_report(g: Graph, full: bool = False) -> dict:
    landscape = enumerate_landscape(g)
    minima = local_minima(g, landscape)
    report = {
        "schema": SCHEMA,
        "kind": "oracle",
        "graph": graph_summary(g),
        "minima": [
            {
                "links": _numbers(r.links),
                "edges": _edges(g, r.links),
                "psi": _psi(r.psi),
                "range": r.range,
                "size": len(r.links),
            }
            for r in minima
        ],
    }
    if full:
        report["places"] = [
            {"links": _numbers(p.links), "psi": _psi(p.psi), "connected": p.connected, "size": p.size}
            for p in landscape
        ]
    return report


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_graph(path: str) -> Graph:
    return read_edge_list(path)


def cmd_detect(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(32)
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        g = _load_graph(args.input)
    except OSError as exc:
        print(f"cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_IO
    except GraphError as exc:
        print(f"invalid graph: {exc}", file=sys.stderr)
        return EXIT_GRAPH
    report = detect_report(g, cfg, {"read": time.perf_counter() - t0})
    try:
        _emit(report, args.out)
    except OSError as exc:
        print(f"cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


def cmd_enumerate(args) -> int:
    try:
        g = _load_graph(args.input)
    except OSError as exc:
        print(f"cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_IO
    except GraphError as exc:
        print(f"invalid graph: {exc}", file=sys.stderr)
        return EXIT_GRAPH
    try:
        report = oracle_report(g, args.full)
    except TooLarge as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_GRAPH
    try:
        _emit(report, args.out)
    except OSError as exc:
        print(f"cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _link_set(m: int, numbers) -> LinkSet:
    return LinkSet.from_ids(m, (k - 1 for k in numbers))


def compare_reports(detect: dict, oracle: dict) -> dict:
    m = detect["graph"]["m"]
    found = [
        CommunityRecord(_link_set(m, c["link_numbers"]), c["psi"], c["range_lower_bound"])
        for c in detect["communities"]
    ]
    minima = [CommunityRecord(_link_set(m, r["links"]), r["psi"], r["range"]) for r in oracle["minima"]]
    result = verify_search_result(m, found, minima)
    return {
        "schema": SCHEMA,
        "kind": "verify",
        "graph": detect["graph"],
        "matched": len(result.matched),
        "missed": len(result.missed),
        "spurious": len(result.spurious),
        "max_psi_discrepancy": result.max_psi_discrepancy,
        "missed_links": [_numbers(s) for s in result.missed],
        "spurious_links": [{"links": _numbers(s), "nearest_oracle_distance": d} for s, d in result.spurious],
        "ok": result.ok,
    }


def cmd_verify(args) -> int:
    try:
        detect = _read_json(args.detect)
        oracle = _read_json(args.oracle)
    except (OSError, ValueError) as exc:
        print(f"cannot read report: {exc}", file=sys.stderr)
        return EXIT_IO
    if detect.get("kind") != "detect" or oracle.get("kind") != "oracle":
        print("expected a detect report and an oracle report", file=sys.stderr)
        return EXIT_CONFIG
    if detect["graph"] != oracle["graph"]:
        print("reports describe different graphs", file=sys.stderr)
        return EXIT_GRAPH
    report = compare_reports(detect, oracle)
    _emit(report, args.out)
    return 0 if report["ok"] else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="linkcomm", description="Overlapping link communities by ratio node-cut minimisation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    det = sub.add_parser("detect", help="memetic search for link communities")
    det.add_argument("--input", required=True, help="edge list, two labels per line")
    det.add_argument("--out", help="write the JSON report here instead of stdout")
    det.add_argument("--seed", type=int, help="RNG seed (default: OS entropy, echoed in the report)")
    res = det.add_mutually_exclusive_group()
    res.add_argument("--resolution", type=float, default=0.1, help="relative minimal range (fraction of size)")
    res.add_argument("--resolution-abs", type=int, help="absolute minimal range in links")
    det.add_argument("--population", type=int, default=20)
    det.add_argument("--variance-low", type=float, default=0.1)
    det.add_argument("--variance-high", type=float, default=0.5)
    det.add_argument("--max-stale", type=int, default=30, help="generations without a new best before stopping")
    det.add_argument("--innovation-window", type=int, default=10)
    det.add_argument("--innovation-threshold", type=float, default=0.2)
    det.add_argument("--partners", type=int, default=3, help="crossover partners per generation")
    det.add_argument("--mutants", type=int, default=3, help="low-variance mutants per generation")
    det.add_argument("--linkwise", choices=["memetic", "adapt-only"], default="adapt-only")
    det.add_argument("--threads", type=int, default=1)
    det.set_defaults(func=cmd_detect)

    enum = sub.add_parser("enumerate", help="exhaustive landscape oracle (at most 24 links)")
    enum.add_argument("--input", required=True)
    enum.add_argument("--out")
    enum.add_argument("--full", action="store_true", help="include every place of the landscape")
    enum.set_defaults(func=cmd_enumerate)

    ver = sub.add_parser("verify", help="compare a detect report with an oracle report")
    ver.add_argument("--detect", required=True)
    ver.add_argument("--oracle", required=True)
    ver.add_argument("--out")
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
