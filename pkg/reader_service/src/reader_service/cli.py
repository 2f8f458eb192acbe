"""Command line entry points: fine-tune a checkpoint, serve it over HTTP."""

from __future__ import annotations

import logging

import click

from .model import ModelConfig, load_checkpoint
from .training import TrainConfig, train_files


@click.group()
def main():
    """Seq2seq reader service."""
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--out", "checkpoint", type=click.Path(), required=True)
@click.option("--passages", type=click.Path(exists=True), default=None,
              help="Passage JSONL pool for context blocks during training.")
@click.option("--epochs", type=int, default=400)
@click.option("--seed", type=int, default=0)
@click.option("--d-model", type=int, default=96)
@click.option("--log", "log_path", type=click.Path(), default=None)
def train(dataset, checkpoint, passages, epochs, seed, d_model, log_path):
    """Multi-task fine-tuning on (question, answer) and (question, LF) pairs."""
    history = train_files(
        dataset, checkpoint, passages_path=passages,
        model_cfg=ModelConfig(d_model=d_model),
        train_cfg=TrainConfig(max_epochs=epochs, seed=seed),
        log_path=log_path)
    final = history[-1]
    click.echo(f"trained {final['epoch']} epochs, final loss {final['loss']:.4f}, "
               f"exact-match {final.get('exact_match', float('nan')):.2f}")


@main.command()
@click.option("--checkpoint", type=click.Path(exists=True), required=True)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8400)
def serve(checkpoint, host, port):
    """Serve /generate, /embed, and /healthz."""
    import uvicorn

    from .service import create_app

    model, vocab = load_checkpoint(checkpoint)
    uvicorn.run(create_app(model, vocab), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
