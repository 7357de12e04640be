"""``kge`` command line: audit, enhance, evaluate, simulate."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import FORMAT_VERSION, __version__
from .audit import Denominator, Eligibility, Field, audit_coverage
from .contextualizer import Direction, load_templates
from .ensemble import EnsembleConfig, enhance_all
from .errors import ConfigError, KgeError
from .evaluator import Aggregation, evaluate, load_benchmark, load_results, write_report_json, write_report_tsv
from .languages import LANGUAGE_NAMES, MT_SOURCE_LANGUAGES, check_tag
from .matchers import CachedEmbedder, HashingEmbedder, HttpEmbedder, MatcherConfig, MatchMode
from .sources import (
    HttpLLMClient,
    HttpMTClient,
    HttpWSClient,
    LLMSource,
    MTSource,
    RecordedSource,
    WSSource,
    candidate_to_json,
)
from .store import load_snapshot, save_audit_log, save_snapshot, upsert_names

log = logging.getLogger("kge")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _langs(text):
    codes = [c.strip() for c in text.split(",") if c.strip()]
    for code in codes:
        try:
            check_tag(code)
        except KgeError:
            raise UsageError(f"invalid language code: {code!r}") from None
        if code not in LANGUAGE_NAMES:
            raise UsageError(f"unknown language code: {code!r}")
    if not codes:
        raise UsageError("empty language list")
    return codes


def _write_json(path, obj):
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


# -- run configuration ---------------------------------------------------------

def load_run_config(path):
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return raw


def _resolve(base, value):
    p = Path(value)
    return p if p.is_absolute() else base / p


def build_matcher(spec):
    spec = dict(spec or {})
    mode = MatchMode(spec.pop("mode", "name"))
    threshold = float(spec.pop("similarity_threshold", 0.5))
    provider = None
    if mode is MatchMode.DESCRIPTION:
        kind = spec.pop("embedding", "hashing")
        if kind == "hashing":
            provider = HashingEmbedder(int(spec.pop("dim", 256)))
        elif kind == "http":
            provider = HttpEmbedder.from_env()
        else:
            raise ConfigError(f"unknown embedding provider {kind!r}")
        provider = CachedEmbedder(provider)
    return MatcherConfig(mode, threshold, provider)


def build_ensemble(spec):
    spec = dict(spec or {})
    try:
        return EnsembleConfig(
            lambda_coverage=spec.get("lambda_coverage", 2),
            lambda_precision=spec.get("lambda_precision", 1),
            matcher=build_matcher(spec.get("matcher")),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_sources(specs, base, snapshot, seed, env=None):
    """Construct adapters; every misconfiguration surfaces here, before any request."""
    env = os.environ if env is None else env
    if not specs:
        raise ConfigError("at least one source adapter is required")
    adapters = []
    for i, spec in enumerate(specs):
        if not isinstance(spec, dict) or "kind" not in spec:
            raise ConfigError(f"source #{i} needs a 'kind'")
        kind = spec["kind"]
        if kind == "recorded":
            if "fixture" not in spec:
                raise ConfigError(f"source #{i}: recorded source needs 'fixture'")
            fixture = _resolve(base, spec["fixture"])
            if not fixture.is_file():
                raise ConfigError(f"source #{i}: fixture {fixture} not found")
            adapters.append(RecordedSource.from_file(fixture))
            continue
        clients = {"mt": HttpMTClient, "ws": HttpWSClient, "llm": HttpLLMClient}
        if kind not in clients:
            raise ConfigError(f"source #{i}: unknown kind {kind!r}")
        cls = clients[kind]
        engine = spec.get("engine", kind)
        endpoint = spec.get("endpoint") or env.get(f"KGE_{kind.upper()}_ENDPOINT")
        if not endpoint:
            raise ConfigError(f"source #{i}: no endpoint (set 'endpoint' or KGE_{kind.upper()}_ENDPOINT)")
        client = cls(endpoint, engine=engine, api_key=env.get(f"KGE_API_KEY_{kind.upper()}"),
                     parallelism=int(spec.get("parallelism", 8)),
                     attempts=int(spec.get("attempts", 3)),
                     timeout=float(spec.get("timeout", 30.0)))
        if kind == "mt":
            langs = spec.get("source_languages", list(MT_SOURCE_LANGUAGES))
            for lang in langs:
                check_tag(lang)
            templates = load_templates(_resolve(base, spec["templates"])) if "templates" in spec else None
            adapters.append(MTSource(client, langs, Direction(spec.get("direction", "name")),
                                     templates=templates))
        elif kind == "ws":
            adapters.append(WSSource(client))
        else:
            adapters.append(LLMSource(client, snapshot, seed=seed))
    return adapters


# -- commands ------------------------------------------------------------------

def cmd_audit(args):
    langs = _langs(args.languages)
    reference = _langs(args.reference)[0]
    try:
        snapshot = load_snapshot(args.snapshot)
    except (OSError, KgeError) as exc:
        print(f"kge audit: bad snapshot: {exc}", file=sys.stderr)
        return EXIT_USAGE
    table = audit_coverage(snapshot, langs, reference, Field(args.field), floor=args.floor,
                           eligibility=Eligibility(args.eligibility),
                           denominator=Denominator(args.denominator))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    table.write_csv(out)
    print(f"wrote {len(table.rows)} rows to {out}")
    return EXIT_OK


def cmd_enhance(args):
    config_path = Path(args.config)
    raw = load_run_config(config_path)
    base = config_path.parent
    if "snapshot" not in raw:
        raise ConfigError("config needs 'snapshot'")
    targets = _langs(args.targets or ",".join(raw.get("targets") or []))
    seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
    parallelism = args.parallelism or int(raw.get("parallelism", 8))
    if parallelism < 1:
        raise UsageError("parallelism must be positive")
    out_dir = Path(args.out) if args.out else _resolve(base, raw.get("output_dir", "out"))
    cfg = build_ensemble(raw.get("ensemble"))

    try:
        snapshot = load_snapshot(_resolve(base, raw["snapshot"]))
    except (OSError, KgeError) as exc:
        print(f"kge enhance: bad snapshot: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sources = build_sources(raw.get("sources"), base, snapshot, seed)

    if args.entities:
        ids = [i.strip() for i in args.entities.split(",") if i.strip()]
        unknown = [i for i in ids if i not in snapshot]
        if unknown:
            print(f"kge enhance: unknown entities: {', '.join(unknown)}", file=sys.stderr)
            return EXIT_USAGE
        entities = [snapshot.get(i) for i in ids]
    else:
        entities = list(snapshot)

    results = enhance_all(entities, targets, sources, cfg, parallelism)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {}
    outputs = []
    updated = snapshot
    for target in targets:
        rows = [r for r in results if r.target_lang == target]
        path = out_dir / f"results.{target}.jsonl"
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for r in rows:
                fh.write(json.dumps(r.to_json(), sort_keys=True, ensure_ascii=False) + "\n")
        outputs.append(path.name)
        totals = {"entities": len(rows), "skipped": sum(r.skipped for r in rows),
                  "accepted": sum(len(r.accepted) for r in rows),
                  "flagged": sum(len(r.flagged_incorrect) for r in rows)}
        for r in rows:
            for k, v in r.counters.items():
                totals[k] = totals.get(k, 0) + v
        totals.setdefault("alignment_failures", 0)
        totals.setdefault("source_errors", 0)
        summary[target] = totals
        if args.apply and cfg.matcher.mode is MatchMode.NAME:
            for r in rows:
                for a in r.accepted:
                    updated = upsert_names(
                        updated, r.entity_id, target, [a.value],
                        provenance=f"mnta sigma={a.score} supporters={','.join(sorted(map(str, a.supporters)))}",
                    )
    if args.apply:
        save_snapshot(updated, out_dir / "snapshot.updated.jsonl")
        save_audit_log(updated, out_dir / "audit.jsonl")
        outputs += ["snapshot.updated.jsonl", "audit.jsonl"]
    manifest = {
        "tool": "kge",
        "version": __version__,
        "format_version": FORMAT_VERSION,
        "command": "enhance",
        "config_file": str(config_path),
        "config": raw,
        "targets": targets,
        "entities": [e.id for e in entities] if args.entities else "all",
        "seed": seed,
        "parallelism": parallelism,
        "apply": bool(args.apply),
        "counters": summary,
        "outputs": outputs,
    }
    _write_json(out_dir / "manifest.json", manifest)
    for target, totals in summary.items():
        print(f"{target}: " + " ".join(f"{k}={v}" for k, v in sorted(totals.items())))
    return EXIT_OK


def cmd_evaluate(args):
    try:
        entries = load_benchmark(args.benchmark)
    except (OSError, KgeError) as exc:
        print(f"kge evaluate: bad benchmark: {exc}", file=sys.stderr)
        return EXIT_USAGE
    results = {}
    try:
        for path in args.results:
            results.update(load_results(path))
    except (OSError, KgeError) as exc:
        print(f"kge evaluate: bad results: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not entries:
        print("kge evaluate: benchmark is empty", file=sys.stderr)
        return EXIT_USAGE
    bench_keys = {(e.entity_id, e.lang) for e in entries}
    if results and not bench_keys & set(results):
        print("kge evaluate: no entity overlaps between benchmark and results", file=sys.stderr)
        return EXIT_USAGE
    report = evaluate(entries, results, Aggregation(args.agg))
    for name, value in report.counters.items():
        if name != "benchmark_entries" and value:
            print(f"warning: {name}={value}", file=sys.stderr)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_report_json(report, out / "report.json")
    write_report_tsv(report, out / "report.tsv", relaxed=args.mode == "relaxed", system=args.system)
    _write_json(out / "manifest.json", {
        "tool": "kge", "version": __version__, "format_version": FORMAT_VERSION,
        "command": "evaluate", "benchmark": str(args.benchmark),
        "results": [str(p) for p in args.results], "mode": args.mode, "agg": args.agg,
    })
    key = "relaxed_coverage" if args.mode == "relaxed" else "coverage"
    avg = report.average(key)
    print(f"average {key} f1 = {avg:.4f}")
    if args.fail_below is not None and avg < args.fail_below:
        return EXIT_FAIL
    return EXIT_OK


def cmd_simulate(args):
    """Write a synthetic snapshot, benchmark, recorded fixture and run config."""
    from .synthetic import make_world

    target = _langs(args.target)[0]
    world = make_world(n_entities=args.entities, seed=args.seed, target=target,
                       p_correct=args.p_correct)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_snapshot(world.snapshot, out / "snapshot.jsonl")
    with (out / "benchmark.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        for e in world.benchmark:
            fh.write(json.dumps({"id": e.entity_id, "language": e.lang,
                                 "valid": sorted(e.valid_names),
                                 "invalid": sorted(e.invalid_names)},
                                sort_keys=True, ensure_ascii=False) + "\n")
    with (out / "candidates.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        for ent in world.snapshot:
            for src in world.sources:
                for cand in src.propose(ent, target).candidates:
                    fh.write(json.dumps(candidate_to_json(cand), sort_keys=True,
                                        ensure_ascii=False) + "\n")
    _write_json(out / "run.json", {
        "snapshot": "snapshot.jsonl",
        "targets": [target],
        "seed": args.seed,
        "parallelism": 4,
        "output_dir": "results",
        "ensemble": {"lambda_coverage": 2, "lambda_precision": 1, "matcher": {"mode": "name"}},
        "sources": [{"kind": "recorded", "fixture": "candidates.jsonl"}],
    })
    print(f"wrote synthetic world ({len(world.snapshot)} entities) to {out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="kge", description=__doc__)
    parser.add_argument("--version", action="version",
                        version=f"kge {__version__} (formats v{FORMAT_VERSION})")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="coverage of a field per language and popularity bucket")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--reference", default="en")
    p.add_argument("--languages", required=True, help="comma-separated language codes")
    p.add_argument("--field", choices=[f.value for f in Field], default="names")
    p.add_argument("--out", required=True)
    p.add_argument("--floor", type=int, default=100, help="page-view eligibility floor")
    p.add_argument("--eligibility", choices=[e.value for e in Eligibility], default="max")
    p.add_argument("--denominator", choices=[d.value for d in Denominator], default="reference")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("enhance", help="propose names and flag suspicious ones")
    p.add_argument("--config", required=True)
    p.add_argument("--targets")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--entities", help="comma-separated entity ids")
    group.add_argument("--all", action="store_true", help="every entity (default)")
    p.add_argument("--apply", action="store_true", help="also write an updated snapshot")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--parallelism", type=int)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("evaluate", help="score results against a benchmark")
    p.add_argument("--benchmark", required=True)
    p.add_argument("--results", required=True, nargs="+")
    p.add_argument("--mode", choices=["strict", "relaxed"], default="strict")
    p.add_argument("--agg", choices=[a.value for a in Aggregation], default="macro")
    p.add_argument("--out", required=True)
    p.add_argument("--system", default="M-NTA")
    p.add_argument("--fail-below", type=float, help="exit 1 if average coverage f1 is lower")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("simulate", help="write a synthetic world for hermetic runs")
    p.add_argument("--out", required=True)
    p.add_argument("--entities", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target", default="it")
    p.add_argument("--p-correct", type=float, default=0.6)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"kge {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, KgeError) as exc:
        print(f"kge {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
