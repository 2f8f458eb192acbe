"""Command line interface.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 run finished
with partial failures.
"""

from __future__ import annotations

import json
import logging
import os
import sys

import click

from . import dense, pipeline, sparse
from .errors import ConfigError, KbqaError, NonExecutableError
from .evaluate import read_dataset_jsonl, read_predictions_jsonl, render_table, write_prediction
from .logical_form import execute_candidate

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_PARTIAL = 3


def _fail(exc: Exception) -> int:
    click.echo(f"error: {exc}", err=True)
    return EXIT_CONFIG if isinstance(exc, ConfigError) else EXIT_DATA


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="YAML/JSON pipeline config; flags override its values.")
@click.option("-v", "--verbose", is_flag=True)
@click.pass_context
def main(ctx, config_path, verbose):
    """Knowledge-base QA pipeline: linearize, index, retrieve, answer, evaluate."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    ctx.obj = {"config_path": config_path, "overrides": {}}


def _cfg(ctx, extra=None):
    overrides = dict(ctx.obj["overrides"])
    if extra:
        overrides = pipeline._merge(overrides, extra)
    return pipeline.load_config(ctx.obj["config_path"], overrides)


@main.command()
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Shard output directory (default: <output_dir>/passages).")
@click.pass_context
def linearize(ctx, out_dir):
    """Linearize the KB into passage shards plus a manifest."""
    try:
        cfg = _cfg(ctx)
        out_dir = out_dir or os.path.join(cfg["output_dir"], "passages")
        manifest = pipeline.run_linearize(cfg, out_dir)
    except KbqaError as exc:
        ctx.exit(_fail(exc))
    click.echo(f"wrote {manifest['passage_count']} passages to {out_dir}")


@main.command("index-sparse")
@click.option("--passages", "passage_dir", type=click.Path(), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.pass_context
def index_sparse(ctx, passage_dir, out_path):
    """Build the BM25 index over linearized passages."""
    try:
        cfg = _cfg(ctx)
        passage_dir = passage_dir or os.path.join(cfg["output_dir"], "passages")
        out_path = out_path or cfg["retriever"]["sparse_index"] \
            or os.path.join(cfg["output_dir"], "sparse_index.json")
        lookup = pipeline.load_passages(passage_dir)
        index = sparse.build_sparse(lookup.values())
        index.save(out_path)
    except KbqaError as exc:
        ctx.exit(_fail(exc))
    click.echo(f"indexed {index.n_docs} passages -> {out_path}")


@main.command("index-dense")
@click.option("--passages", "passage_dir", type=click.Path(), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.pass_context
def index_dense(ctx, passage_dir, out_path):
    """Embed all passages and build the dense dot-product index."""
    try:
        cfg = _cfg(ctx)
        passage_dir = passage_dir or os.path.join(cfg["output_dir"], "passages")
        out_path = out_path or cfg["retriever"]["dense_index"] \
            or os.path.join(cfg["output_dir"], "dense_index.bin")
        provider = pipeline.make_embedding_provider(cfg)
        lookup = pipeline.load_passages(passage_dir)
        index = dense.build_dense(sorted(lookup.values(), key=lambda p: p.passage_id),
                                  provider)
        index.save(out_path)
    except KbqaError as exc:
        ctx.exit(_fail(exc))
    click.echo(f"embedded {len(index.passage_ids)} passages -> {out_path}")


@main.command()
@click.argument("question")
@click.option("--k", type=int, default=None, help="Number of passages (default 100).")
@click.option("--passages", "passage_dir", type=click.Path(), default=None)
@click.pass_context
def retrieve(ctx, question, k, passage_dir):
    """Retrieve top-k passages for one question and print them."""
    try:
        cfg = _cfg(ctx, {"retriever": {"k": k}})
        passage_dir = passage_dir or os.path.join(cfg["output_dir"], "passages")
        retriever = pipeline.Retriever(cfg, passage_dir)
        results = retriever.retrieve(question)
    except KbqaError as exc:
        ctx.exit(_fail(exc))
    for rp in results:
        passage = retriever.passages[rp.passage_id]
        click.echo(f"{rp.rank:>3} {rp.score:>10.4f} {rp.passage_id:<20} {passage.title}")


@main.command()
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--passages", "passage_dir", type=click.Path(), default=None)
@click.option("--k", type=int, default=None)
@click.option("--beam", type=int, default=None)
@click.option("--lambda", "lf_weight", type=float, default=None,
              help="Weight of executed answers in the combination (default 1.0).")
@click.option("--score-fn", type=click.Choice(["reciprocal", "linear"]), default=None)
@click.option("--mode", type=click.Choice(["single", "multi"]), default=None)
@click.option("--reader-url", default=None)
@click.option("--mock-fixture", type=click.Path(), default=None)
@click.pass_context
def answer(ctx, dataset, out_path, passage_dir, k, beam, lf_weight, score_fn, mode,
           reader_url, mock_fixture):
    """Answer every question in a dataset JSONL; write predictions JSONL."""
    overrides = {
        "retriever": {"k": k},
        "reader": {"beam_size": beam,
                   "url": reader_url,
                   "backend": "remote" if reader_url else None,
                   "mock_fixture": mock_fixture},
        "combination": {"lf_weight": lf_weight, "score_fn": score_fn},
        "mode": mode,
    }
    try:
        cfg = _cfg(ctx, overrides)
        passage_dir = passage_dir or os.path.join(cfg["output_dir"], "passages")
        store = pipeline.load_store(cfg)
        retriever = pipeline.Retriever(cfg, passage_dir)
        backend = pipeline.make_reader_backend(cfg)
        with open(dataset, encoding="utf-8") as fh:
            examples = read_dataset_jsonl(fh)
        predictions, logs = pipeline.answer_dataset(examples, store, retriever,
                                                    backend, cfg)
        out_path = out_path or os.path.join(cfg["output_dir"], "predictions.jsonl")
        os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
        with open(out_path, "w", encoding="utf-8") as fh:
            for pred in predictions:
                write_prediction(fh, pred)
    except KbqaError as exc:
        ctx.exit(_fail(exc))
    failures = [l.qid for l in logs if l.failed]
    click.echo(f"wrote {len(predictions)} predictions -> {out_path}")
    if failures:
        click.echo(f"failed questions: {', '.join(failures)}", err=True)
        ctx.exit(EXIT_PARTIAL)


@main.command("eval")
@click.argument("predictions", type=click.Path(exists=True))
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--out", "out_dir", type=click.Path(), default=None)
@click.option("--figure/--no-figure", default=True,
              help="Also render the per-category F1 chart.")
@click.pass_context
def eval_cmd(ctx, predictions, dataset, out_dir, figure):
    """Score predictions against gold answers and write report files."""
    try:
        cfg = _cfg(ctx)
        out_dir = out_dir or os.path.join(cfg["output_dir"], "eval")
        with open(dataset, encoding="utf-8") as fh:
            examples = read_dataset_jsonl(fh)
        with open(predictions, encoding="utf-8") as fh:
            preds = read_predictions_jsonl(fh)
        report = pipeline.run_eval(examples, preds, out_dir, with_figure=figure)
    except KbqaError as exc:
        ctx.exit(_fail(exc))
    click.echo(render_table(report), nl=False)
    click.echo(f"report written to {out_dir}")


@main.command()
@click.option("--lf", required=True, help="Logical form text to execute.")
@click.pass_context
def execute(ctx, lf):
    """Debug helper: parse, bind, and execute one logical form against the KB."""
    try:
        cfg = _cfg(ctx)
        store = pipeline.load_store(cfg)
    except KbqaError as exc:
        ctx.exit(_fail(exc))
    try:
        answers = execute_candidate(lf, store)
    except NonExecutableError as exc:
        click.echo(f"non-executable ({exc.reason}): {exc}", err=True)
        ctx.exit(EXIT_DATA)
    click.echo(json.dumps(list(answers), ensure_ascii=False))


if __name__ == "__main__":
    main()
