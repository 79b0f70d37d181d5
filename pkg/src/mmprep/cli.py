"""Command-line surface: plan, pack, stages, curate, annotate, validate, tile.

All data flows as newline-delimited UTF-8 JSON on stdin/stdout (or --input/
--output paths); diagnostics go to stderr. Option values layer as
flags > environment (MMPREP_* prefix) > --config file > defaults, and every
subcommand echoes its effective configuration to stderr at startup.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 partial annotation
failures.
"""

from __future__ import annotations

import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from contextlib import contextmanager

import click

from . import budget, composer, curator, manifest, tiling
from .annotator import pipeline as annot

logger = logging.getLogger("mmprep")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_PARTIAL = 3


class ValidationFailure(click.ClickException):
    exit_code = EXIT_VALIDATION


def _echo_config(ctx: click.Context) -> None:
    params = {k: v for k, v in ctx.params.items() if not k.startswith("_")}
    click.echo(f"mmprep {ctx.info_name} config: {json.dumps(params, default=str)}", err=True)


@contextmanager
def _open_in(path: str):
    if path == "-":
        yield sys.stdin
    else:
        with open(path, "r", encoding="utf-8") as fh:
            yield fh


@contextmanager
def _open_out(path: str, mode: str = "w"):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, mode, encoding="utf-8") as fh:
            yield fh


def _load_config_map(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValidationFailure(f"config file {path} must hold a JSON object")

    def norm(obj):
        if isinstance(obj, dict):
            return {str(k).replace("-", "_"): norm(v) for k, v in obj.items()}
        return obj

    return norm(raw)


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON file with per-subcommand option defaults.")
@click.option("--log-level", default="warning", show_default=True,
              type=click.Choice(["debug", "info", "warning", "error"], case_sensitive=False))
@click.pass_context
def cli(ctx: click.Context, config_path: str | None, log_level: str):
    """Planning and curation toolkit for long-context multimodal training data."""
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, log_level.upper()))
    ctx.default_map = _load_config_map(config_path)


in_opt = click.option("--input", "-i", "input_path", default="-", show_default=True,
                      help="Input file ('-' for stdin).")
out_opt = click.option("--output", "-o", "output_path", default="-", show_default=True,
                       help="Output file ('-' for stdout).")


def _plan_one(args: tuple[manifest.Sample, budget.BudgetConfig]) -> budget.SamplingPlan:
    sample, cfg = args
    try:
        return budget.plan(sample, cfg)
    except budget.TextOverflowError:
        return budget.SamplingPlan(sample_id=sample.id, verdict=budget.DISCARDED, reason="text_overflow")


@cli.command("plan")
@in_opt
@out_opt
@click.option("--l-max", type=int, default=32768, show_default=True, help="Sequence token budget.")
@click.option("--min-frames", type=int, default=8, show_default=True)
@click.option("--fps-target", type=float, default=2.0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True, help="Parallel planner processes.")
@click.pass_context
def plan_cmd(ctx, input_path, output_path, l_max, min_frames, fps_target, jobs):
    """Allocate token budgets for each manifest sample (one JSON plan per line)."""
    _echo_config(ctx)
    cfg = budget.BudgetConfig(l_max=l_max, min_frames=min_frames, fps_target=fps_target)
    discarded = planned = 0
    with _open_in(input_path) as fin, _open_out(output_path) as fout:
        try:
            if jobs > 1:
                samples = manifest.parse_manifest(fin)
                with ProcessPoolExecutor(max_workers=jobs) as pool:
                    plans = pool.map(_plan_one, ((s, cfg) for s in samples), chunksize=64)
                    for p in plans:
                        fout.write(budget.dumps_plan(p) + "\n")
                        planned, discarded = planned + p.planned, discarded + (not p.planned)
            else:
                for sample in manifest.iter_manifest(fin):
                    p = _plan_one((sample, cfg))
                    fout.write(budget.dumps_plan(p) + "\n")
                    planned, discarded = planned + p.planned, discarded + (not p.planned)
        except manifest.ManifestError as exc:
            raise ValidationFailure(str(exc)) from exc
    click.echo(f"planned {planned}, discarded {discarded}", err=True)


@cli.command("pack")
@in_opt
@out_opt
@click.option("--l-max", type=int, default=32768, show_default=True, help="Pack token capacity.")
@click.pass_context
def pack_cmd(ctx, input_path, output_path, l_max):
    """Pack planned samples into fixed-capacity training sequences."""
    _echo_config(ctx)
    plans = []
    skipped = 0
    with _open_in(input_path) as fin:
        for line_no, raw in enumerate(fin, start=1):
            text = raw.strip()
            if not text:
                continue
            try:
                p = budget.plan_from_obj(json.loads(text))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValidationFailure(f"malformed plan at line {line_no}: {exc}") from exc
            if p.planned:
                plans.append(p)
            else:
                skipped += 1
    try:
        packs = composer.pack(plans, l_max)
    except composer.PackOverflowError as exc:
        raise ValidationFailure(str(exc)) from exc
    with _open_out(output_path) as fout:
        for pk in packs:
            fout.write(json.dumps(
                {"pack_id": pk.pack_id, "member_ids": list(pk.member_ids), "total_tokens": pk.total_tokens}
            ) + "\n")
    report = composer.balance_report(packs, l_max)
    if report.defined:
        click.echo(
            f"{report.pack_count} packs from {len(plans)} plans ({skipped} discarded skipped), "
            f"utilization mean={report.mean_utilization:.4f} "
            f"min={report.min_utilization:.4f} max={report.max_utilization:.4f}",
            err=True,
        )
    else:
        click.echo("no packs produced", err=True)


@cli.command("stages")
@out_opt
@click.pass_context
def stages_cmd(ctx, output_path):
    """Emit the progressive training stage table as one JSON document."""
    _echo_config(ctx)
    doc = [composer.stage_to_obj(s) for s in composer.progressive_stages()]
    with _open_out(output_path) as fout:
        fout.write(json.dumps(doc, indent=2) + "\n")


@cli.command("tile")
@in_opt
@out_opt
@click.option("--tile-cap", type=int, default=12, show_default=True, help="Per-image tile cap.")
@click.pass_context
def tile_cmd(ctx, input_path, output_path, tile_cap):
    """Emit tiling geometry for every image in a manifest (one JSON object per image)."""
    _echo_config(ctx)
    cfg = tiling.TilingConfig()
    with _open_in(input_path) as fin, _open_out(output_path) as fout:
        try:
            for sample in manifest.iter_manifest(fin):
                for item in sample.items:
                    if item.kind != "image":
                        continue
                    grid = tiling.select_grid(item.dims, cfg, tile_cap)
                    layout = tiling.tile_layout(item.dims, grid, cfg)
                    fout.write(json.dumps({
                        "id": sample.id,
                        "grid": [grid.cols, grid.rows],
                        "tokens": tiling.grid_tokens(grid, cfg),
                        "canvas": [layout.canvas_w, layout.canvas_h],
                    }) + "\n")
        except manifest.ManifestError as exc:
            raise ValidationFailure(str(exc)) from exc


def _curate_reports(candidates_dir, reference_dir, tau, pool, jobs):
    ref_tracks = curator.load_feature_dir(reference_dir)
    ref_clips = [c for vid, track in ref_tracks for c in curator.clips_from_seconds(vid, track, pool=pool)]
    reference = curator.ReferenceIndex.from_clips(ref_clips)

    cand_tracks = curator.load_feature_dir(candidates_dir)

    def one(args):
        vid, track = args
        clips = curator.clips_from_seconds(vid, track, pool=pool)
        return curator.select_novel(clips, reference, tau)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as tp:
            groups = list(tp.map(one, cand_tracks))
    else:
        groups = [one(item) for item in cand_tracks]
    reports = [r for group in groups for r in group]
    reports.sort(key=lambda r: r.video_id)
    return reports


@cli.command("curate")
@out_opt
@click.option("--reference", "reference_dir", type=click.Path(file_okay=False), required=True)
@click.option("--candidates", "candidates_dir", type=click.Path(file_okay=False), required=True)
@click.option("--tau", type=float, default=0.5, show_default=True, help="Novelty similarity threshold.")
@click.option("--pool", type=click.Choice(["mean", "max"]), default="mean", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True, help="Parallel candidate workers.")
@click.pass_context
def curate_cmd(ctx, output_path, reference_dir, candidates_dir, tau, pool, jobs):
    """Select novel candidate videos by max clip similarity against a reference set."""
    _echo_config(ctx)
    try:
        reports = _curate_reports(candidates_dir, reference_dir, tau, pool, jobs)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from exc
    with _open_out(output_path) as fout:
        for r in reports:
            fout.write(json.dumps(r.to_obj()) + "\n")
    selected = sum(r.selected for r in reports)
    click.echo(f"{selected}/{len(reports)} candidate videos selected at tau={tau}", err=True)


def _make_client(endpoint: str, model: str, rpm: float | None) -> annot.LlmClient:
    limiter = annot.RateLimiter(rpm) if rpm else None
    return annot.HttpClient(endpoint, model, rate_limiter=limiter)


@cli.command("annotate")
@in_opt
@out_opt
@click.option("--endpoint", required=True, help="Generation endpoint URL.")
@click.option("--model", default="gpt-4o", show_default=True)
@click.option("--temperature", type=float, default=0.2, show_default=True)
@click.option("--max-in-flight", type=int, default=4, show_default=True)
@click.option("--retry-budget", type=int, default=3, show_default=True)
@click.option("--rpm", type=float, default=None, help="Request rate limit per minute.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def annotate_cmd(ctx, input_path, output_path, endpoint, model, temperature,
                 max_in_flight, retry_budget, rpm, seed):
    """Run the caption/QA/anchor pipeline over a job file."""
    _echo_config(ctx)
    with _open_in(input_path) as fin:
        try:
            jobs = annot.parse_jobs(fin)
        except annot.JobFileError as exc:
            raise ValidationFailure(str(exc)) from exc
    client = _make_client(endpoint, model, rpm)
    policy = annot.RetryPolicy(
        max_retries=retry_budget,
        max_in_flight=max_in_flight,
        temperature=temperature,
        seed=seed,
    )
    # Append so an interrupted run can be resumed without clobbering records.
    with _open_out(output_path, mode="a") as fout:
        result = annot.run_pipeline(
            jobs, client, policy,
            on_record=lambda rec: (fout.write(json.dumps(rec, ensure_ascii=False) + "\n"), fout.flush()),
        )
    ok = len(result.records) - len(result.failures)
    click.echo(f"{ok}/{len(result.records)} jobs annotated, {len(result.failures)} failed", err=True)
    if result.failures:
        ctx.exit(EXIT_PARTIAL)


@cli.command("validate")
@in_opt
@out_opt
@click.option("--kind", type=click.Choice(["manifest", "plans"]), default="manifest", show_default=True)
@click.option("--l-max", type=int, default=32768, show_default=True,
              help="Budget bound checked for plan records.")
@click.pass_context
def validate_cmd(ctx, input_path, output_path, kind, l_max):
    """Lint a manifest or plan file; emits one JSON error record per defect."""
    _echo_config(ctx)
    errors: list[dict] = []
    with _open_in(input_path) as fin:
        if kind == "manifest":
            samples, manifest_errors = manifest.scan_manifest(fin)
            errors = [{"line": e.line, "field": e.field, "error": str(e)} for e in manifest_errors]
            click.echo(f"{len(samples)} valid samples, {len(errors)} errors", err=True)
        else:
            count = 0
            for line_no, raw in enumerate(fin, start=1):
                text = raw.strip()
                if not text:
                    continue
                count += 1
                try:
                    p = budget.plan_from_obj(json.loads(text))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    errors.append({"line": line_no, "field": "record", "error": f"malformed plan: {exc}"})
                    continue
                if p.verdict not in (budget.PLANNED, budget.DISCARDED):
                    errors.append({"line": line_no, "field": "verdict", "error": f"unknown verdict {p.verdict!r}"})
                elif p.planned and (p.total_tokens is None or p.total_tokens > l_max):
                    errors.append({"line": line_no, "field": "total_tokens",
                                   "error": f"plan {p.sample_id!r} exceeds l_max={l_max}"})
            click.echo(f"{count} plans checked, {len(errors)} errors", err=True)
    with _open_out(output_path) as fout:
        for e in errors:
            fout.write(json.dumps(e) + "\n")
    if errors:
        ctx.exit(EXIT_VALIDATION)


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        rv = cli.main(args=argv, standalone_mode=False, auto_envvar_prefix="MMPREP")
        return rv if isinstance(rv, int) else EXIT_OK
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        return EXIT_VALIDATION
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except BrokenPipeError:
        return EXIT_IO
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
