"""Command-line driver wiring the pipeline end to end.

Subcommands
-----------
validate     parse a corpus and print a summary (weeks, cities, gaps, digest)
evaluate     run the full per-city evaluation and write report.csv/report.json
synth        generate a synthetic corpus from a spec JSON file
dump-design  write one city's lagged design matrix as CSV

Configuration comes from four layers, later layers winning: built-in
defaults, a flat ``key = value`` config file (``--config``), environment
variables prefixed ``CHARTFLOW_`` (upper-cased key), and command-line flags
(key with dashes, e.g. ``corpus_path`` -> ``--corpus-path``). Config files
ignore blank lines and ``#`` comments.

Exit codes: 0 success, 2 input error, 3 every city failed to evaluate.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields, replace
from datetime import date
from pathlib import Path

from .chart_store import (
    ChartSeries,
    build_artist_index,
    filter_by_tag,
    load_tags,
    parse_chart_csv,
    write_chart_csv,
)
from .design import (
    ALL_HISTORY,
    OWN_HISTORY,
    LagConfig,
    build_design,
    default_boundary,
    design_csv_text,
)
from .errors import ChartFlowError
from .evaluate import (
    build_report,
    evaluate_region,
    read_labels_csv,
    report_csv_text,
    report_json_text,
    report_table_text,
)
from .preprocess import (
    VelocitySeries,
    build_velocities,
    compute_velocities,
    normalize_rows,
    restrict_artists,
    to_listeners_matrices,
    week_gaps,
)
from .synth import PlantSpec, fingerprint, generate_planted, sidecar_json_text

ENV_PREFIX = "CHARTFLOW_"


@dataclass
class RunConfig:
    """Every tunable of an evaluation run; defaults mirror the reference setup."""

    corpus_path: str | None = None
    tags_path: str | None = None
    tag: str | None = None
    labels_path: str | None = None
    region_label: str = ""
    cities_included: tuple[str, ...] | None = None
    lag_count: int = 8
    boundary: date | None = None
    solver: str = "ols"
    ridge: float = 0.0
    active_set: str = "target"
    filter_stage: str = "pre"
    output_dir: str = "."
    jobs: int = 1


def _parse_cities(raw: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in raw.split(",") if part.strip())


_PARSERS = {
    "corpus_path": str,
    "tags_path": str,
    "tag": str,
    "labels_path": str,
    "region_label": str,
    "cities_included": _parse_cities,
    "lag_count": int,
    "boundary": date.fromisoformat,
    "solver": str,
    "ridge": float,
    "active_set": str,
    "filter_stage": str,
    "output_dir": str,
    "jobs": int,
}


class CliInputError(ChartFlowError):
    """Bad configuration or unreadable input; maps to exit code 2."""


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` config document."""
    values: dict[str, str] = {}
    for lineno, raw_line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliInputError(
                f"{path}:{lineno}: expected 'key = value', got {line!r}"
            )
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _PARSERS:
            raise CliInputError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Layer defaults, config file, environment, then flags."""
    config = RunConfig()
    raw: dict[str, str] = {}
    if getattr(args, "config", None):
        raw.update(parse_config_file(args.config))
    for key in _PARSERS:
        env_value = os.environ.get(ENV_PREFIX + key.upper())
        if env_value is not None:
            raw[key] = env_value
    for key, text in raw.items():
        try:
            config = replace(config, **{key: _PARSERS[key](text)})
        except ValueError as exc:
            raise CliInputError(f"bad value for {key!r}: {exc}") from exc
    for spec_field in fields(RunConfig):
        flag_value = getattr(args, spec_field.name, None)
        if flag_value is not None:
            config = replace(config, **{spec_field.name: flag_value})
    if config.solver not in ("ols", "nnls"):
        raise CliInputError(f"solver must be ols or nnls, got {config.solver!r}")
    if config.active_set not in ("target", "union"):
        raise CliInputError(
            f"active_set must be target or union, got {config.active_set!r}"
        )
    if config.filter_stage not in ("pre", "post"):
        raise CliInputError(
            f"filter_stage must be pre or post, got {config.filter_stage!r}"
        )
    if config.lag_count < 1:
        raise CliInputError(f"lag_count must be >= 1, got {config.lag_count}")
    if config.jobs < 1:
        raise CliInputError(f"jobs must be >= 1, got {config.jobs}")
    return config


def _load_corpus(config: RunConfig) -> ChartSeries:
    if not config.corpus_path:
        raise CliInputError("corpus_path is required")
    try:
        return parse_chart_csv(
            config.corpus_path,
            region_label=config.region_label or Path(config.corpus_path).stem,
        )
    except OSError as exc:
        raise CliInputError(f"cannot read corpus: {exc}") from exc


def _tagged_artists(config: RunConfig) -> set[str] | None:
    if not config.tag:
        return None
    if not config.tags_path:
        raise CliInputError("tag filtering requires tags_path")
    try:
        tags = load_tags(config.tags_path)
    except OSError as exc:
        raise CliInputError(f"cannot read tags: {exc}") from exc
    if config.tag not in tags:
        raise CliInputError(f"tag {config.tag!r} not present in {config.tags_path}")
    return tags[config.tag]


def _velocities_for(config: RunConfig, series: ChartSeries) -> VelocitySeries:
    tagged = _tagged_artists(config)
    if tagged is None:
        return build_velocities(series)
    if config.filter_stage == "pre":
        return build_velocities(filter_by_tag(series, tagged))
    index = build_artist_index(series)
    normalized = [
        normalize_rows(m) for m in to_listeners_matrices(series, index)
    ]
    sliced, kept = restrict_artists(normalized, index, tagged)
    return compute_velocities(sliced, series.cities, kept)


def cmd_validate(config: RunConfig) -> int:
    series = _load_corpus(config)
    index = build_artist_index(series)
    print(f"region: {series.region_label}")
    print(f"records: {len(series.records)}")
    if series.weeks:
        print(f"weeks: {len(series.weeks)} ({series.weeks[0]} .. {series.weeks[-1]})")
    else:
        print("weeks: 0")
    print(f"cities: {len(series.cities)}")
    print(f"artists: {index.size}")
    gaps = week_gaps(series.weeks)
    print(f"gaps: {len(gaps)}")
    for before, after, days in gaps:
        print(f"  {before} -> {after} ({days} days)")
    print(f"fingerprint: {fingerprint(series)}")
    return 0


def cmd_evaluate(config: RunConfig) -> int:
    series = _load_corpus(config)
    digest = fingerprint(series)
    velocities = _velocities_for(config, series)
    cities = (
        config.cities_included
        if config.cities_included is not None
        else velocities.cities
    )
    unknown = sorted(set(cities) - set(velocities.cities))
    if unknown:
        raise CliInputError(f"cities not in corpus: {unknown}")
    if velocities.n_weeks == 0:
        raise CliInputError("corpus has no velocity weeks")
    boundary = config.boundary or default_boundary(velocities.weeks)
    if not velocities.weeks[0] < boundary <= velocities.weeks[-1]:
        raise CliInputError(
            f"boundary {boundary} outside velocity week range "
            f"({velocities.weeks[0]} .. {velocities.weeks[-1]})"
        )
    labels = {}
    if config.labels_path:
        try:
            labels = read_labels_csv(config.labels_path)
        except OSError as exc:
            raise CliInputError(f"cannot read labels: {exc}") from exc
    results = evaluate_region(
        velocities,
        cities,
        lag_count=config.lag_count,
        boundary=boundary,
        solver_variant=config.solver,
        ridge=config.ridge,
        active_rule=config.active_set,
        jobs=config.jobs,
    )
    report = build_report(
        results,
        labels,
        region_label=series.region_label,
        genre_label=config.tag or "all",
    )
    metadata = {
        "boundary": boundary.isoformat(),
        "lag_count": config.lag_count,
        "solver": config.solver,
        "ridge": config.ridge,
        "active_set": config.active_set,
        "filter_stage": config.filter_stage,
        "corpus_fingerprint": digest,
        "cities_included": list(cities),
    }
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(report_csv_text(report), encoding="utf-8")
    (out / "report.json").write_text(
        report_json_text(report, metadata), encoding="utf-8"
    )
    print(report_table_text(report), end="")
    failed = [r for r in report.rows if not r.ok]
    for row in failed:
        print(f"note: {row.city}: {row.status}", file=sys.stderr)
    print(f"wrote {out / 'report.csv'} and {out / 'report.json'}")
    if len(failed) == len(report.rows):
        return 3
    return 0


def cmd_synth(spec_path: str, output_dir: str) -> int:
    spec = PlantSpec.from_json_file(spec_path)
    series = generate_planted(spec)
    digest = fingerprint(series)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus_path = out / "corpus.csv"
    sidecar_path = out / "corpus.meta.json"
    write_chart_csv(series, corpus_path)
    sidecar_path.write_text(sidecar_json_text(spec, digest), encoding="utf-8")
    print(f"wrote {corpus_path} ({len(series.records)} records)")
    print(f"wrote {sidecar_path}")
    print(f"fingerprint: {digest}")
    return 0


def cmd_dump_design(config: RunConfig, city: str, scope: str, out: str | None) -> int:
    series = _load_corpus(config)
    velocities = _velocities_for(config, series)
    if scope == "own":
        lag_config = LagConfig(lag_count=config.lag_count, scope=OWN_HISTORY)
    else:
        cities = (
            config.cities_included
            if config.cities_included is not None
            else velocities.cities
        )
        lag_config = LagConfig(
            lag_count=config.lag_count,
            scope=ALL_HISTORY,
            cities_included=tuple(cities),
        )
    design = build_design(velocities, city, lag_config, config.active_set)
    text = design_csv_text(design)
    if out:
        Path(out).write_text(text, encoding="utf-8")
        print(f"wrote {out} ({design.n_rows} rows)")
    else:
        print(text, end="")
    return 0


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--corpus-path")
    parser.add_argument("--tags-path")
    parser.add_argument("--tag")
    parser.add_argument("--labels-path")
    parser.add_argument("--region-label")
    parser.add_argument(
        "--cities-included", type=_parse_cities, metavar="CITY,CITY,..."
    )
    parser.add_argument("--lag-count", type=int)
    parser.add_argument("--boundary", type=date.fromisoformat, metavar="YYYY-MM-DD")
    parser.add_argument("--solver", choices=("ols", "nnls"))
    parser.add_argument("--ridge", type=float)
    parser.add_argument("--active-set", choices=("target", "union"))
    parser.add_argument("--filter-stage", choices=("pre", "post"))
    parser.add_argument("--output-dir")
    parser.add_argument("--jobs", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chartflow",
        description="Lead-lag evaluation of weekly music-chart corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="parse and summarize a corpus")
    _add_config_flags(p_validate)

    p_evaluate = sub.add_parser("evaluate", help="run the full evaluation")
    _add_config_flags(p_evaluate)

    p_synth = sub.add_parser("synth", help="generate a synthetic corpus")
    p_synth.add_argument("spec", help="PlantSpec JSON file")
    p_synth.add_argument("--output-dir", default=".")

    p_dump = sub.add_parser("dump-design", help="dump one city's design matrix")
    _add_config_flags(p_dump)
    p_dump.add_argument("--city", required=True)
    p_dump.add_argument("--scope", choices=("own", "all"), default="all")
    p_dump.add_argument("--out", help="output CSV path (default: stdout)")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            return cmd_synth(args.spec, args.output_dir)
        config = resolve_config(args)
        if args.command == "validate":
            return cmd_validate(config)
        if args.command == "evaluate":
            return cmd_evaluate(config)
        if args.command == "dump-design":
            return cmd_dump_design(config, args.city, args.scope, args.out)
        raise AssertionError(f"unhandled command {args.command!r}")
    except (ChartFlowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
