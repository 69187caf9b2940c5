"""CLI interface for the MENET geolocation pipeline."""

import csv
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import click
import numpy as np
from pydantic import ValidationError as PydanticValidationError

from .config import Config, load_pipeline_config
from .corpus.documents import (
    build_documents,
    load_split_file,
    make_split,
    read_documents,
    split_documents,
    write_documents,
    write_split_manifest,
)
from .corpus.ingest import ingest as read_tweets, load_label_lookup
from .corpus.synthetic import generate_corpus, write_jsonl
from .features.graph import build_mention_graph
from .features.node2vec import NodeEmbedding, simulate_walks, train_node_embeddings
from .features.pvdbow import paragraph_matrix, train_pvdbow
from .features.store import FeatureMatrix, read_features, write_features
from .features.temporal import timestamp_matrix
from .features.text import fit_vocabulary, tfidf_matrix
from .geo import (
    build_class_table,
    encode_labels,
    evaluate,
    format_report,
    read_class_table,
    write_class_table,
    write_report,
)
from .model.checkpoint import load_checkpoint, save_checkpoint
from .model.menet import MenetModel
from .model.training import train, write_history_csv
from .models import (
    VIEW_NAMES,
    EvalReport,
    PipelineConfig,
    SplitSpec,
    SyntheticCorpusConfig,
    TrainingHistory,
    UserDocument,
)
from .utils.logger import logger
from .validators import (
    FeatureMismatchError,
    PipelineError,
    ValidationError,
    validate_feature_rows,
    validate_view_names,
)


class PipelineCLI:
    """
    Runs pipeline stages against a workdir.

    Stages share nothing but the files in the workdir, so each one can be
    rerun on its own.
    """

    def __init__(self, cfg: PipelineConfig, verbose: bool = False):
        """
        Initialize the stage runner.

        Args:
            cfg: Validated pipeline configuration
            verbose: Whether to enable debug logging
        """
        self.cfg = cfg
        self.workdir = Path(cfg.paths.workdir)
        self.workers = Config.workers(cfg.deterministic)

        if verbose:
            logger.set_level("DEBUG")

        logger.info(
            "cli",
            "cli_initialized",
            workdir=self.workdir,
            seed=cfg.seed,
            deterministic=cfg.deterministic,
            workers=self.workers
        )

    def path(self, name: str) -> Path:
        return self.workdir / name

    def feature_path(self, view: str) -> Path:
        return self.workdir / Config.FEATURES_DIR / f"{view}{Config.FEATURE_SUFFIX}"

    def ingest(self) -> Dict[str, int]:
        """
        Read the input dump, build user documents and write the split manifest.

        Returns:
            Document counts per split
        """
        cfg = self.cfg
        if not cfg.paths.input:
            raise ValidationError("No input file given (paths.input or --input)")

        labels = load_label_lookup(cfg.paths.label_file) if cfg.paths.label_file else None
        records, rejected_lines = read_tweets(cfg.paths.input, cfg.corpus.format, labels)

        if cfg.paths.split_file:
            split = load_split_file(cfg.paths.split_file)
        else:
            split = make_split(
                (r.user_id for r in records),
                cfg.corpus.train_fraction,
                cfg.corpus.validation_fraction,
                cfg.seed,
            )

        docs, rejected_users = build_documents(records, split, cfg.task)

        self.workdir.mkdir(parents=True, exist_ok=True)
        write_documents(docs, self.path(Config.DOCUMENTS_FILE))

        grouped = split_documents(docs)
        kept = SplitSpec(
            train_ids={d.user_id for d in grouped["train"]},
            validation_ids={d.user_id for d in grouped["validation"]},
            test_ids={d.user_id for d in grouped["test"]},
        )
        write_split_manifest(kept, self.path(Config.SPLIT_MANIFEST))
        self.path(Config.REJECTS_FILE).write_text(json.dumps({
            "lines": [r.model_dump() for r in rejected_lines],
            "users": [r.model_dump() for r in rejected_users],
        }, indent=2) + "\n", encoding="utf-8")

        counts = kept.counts()
        counts["rejected_lines"] = len(rejected_lines)
        counts["rejected_users"] = len(rejected_users)
        logger.info("cli", "ingest_completed", **counts)
        return counts

    def load_documents(self) -> List[UserDocument]:
        return read_documents(self.path(Config.DOCUMENTS_FILE))

    def featurize(self, views: Sequence[str]) -> Dict[str, FeatureMatrix]:
        """
        Compute and write one feature file per requested view.

        All views are fitted on the training split only; the mention graph
        spans every user.
        """
        views = validate_view_names(views)
        docs = self.load_documents()
        if not docs:
            raise ValidationError("Documents file holds no users")
        train_docs = split_documents(docs)["train"]
        if not train_docs:
            raise ValidationError("Training split is empty")
        row_ids = [d.user_id for d in docs]

        (self.workdir / Config.FEATURES_DIR).mkdir(parents=True, exist_ok=True)
        written: Dict[str, FeatureMatrix] = {}
        for view in views:
            if view == "tfidf":
                vocab = fit_vocabulary(train_docs, self.cfg.tfidf.min_df)
                self.path(Config.VOCABULARY_FILE).write_text(vocab.model_dump_json(indent=2) + "\n", encoding="utf-8")
                data = tfidf_matrix(docs, vocab)
            elif view == "doc2vec":
                pv_cfg = self.cfg.doc2vec.model_copy(update={"workers": self.workers})
                model = train_pvdbow(train_docs, pv_cfg)
                data = paragraph_matrix(model, docs, [d.user_id for d in train_docs])
            elif view == "node2vec":
                data = self._node2vec(docs)
            else:
                data = timestamp_matrix(docs)

            fm = FeatureMatrix(view=view, row_ids=row_ids, data=data)
            write_features(fm, self.feature_path(view))
            written[view] = fm

        logger.info("cli", "featurize_completed", views=views, rows=len(row_ids))
        return written

    def _node2vec(self, docs: Sequence[UserDocument]) -> np.ndarray:
        cfg = self.cfg
        graph = build_mention_graph(docs, cfg.graph.celebrity_threshold, cfg.graph.prune_third_party_hubs)
        graph.export_edge_list(self.path(Config.GRAPH_FILE))
        walks = simulate_walks(graph, cfg.node2vec.walk_config(cfg.seed), self.workers)
        if not walks:
            logger.warning("cli", "no_graph_edges", users=len(docs))
            return np.zeros((len(docs), cfg.node2vec.dim))
        embedding: NodeEmbedding = train_node_embeddings(
            walks, cfg.node2vec.skipgram_config(cfg.seed, self.workers)
        )
        return embedding.matrix([d.user_id for d in docs])

    def load_views(self, views: Sequence[str], docs: Sequence[UserDocument]) -> Dict[str, FeatureMatrix]:
        """
        Read feature files and check they line up with the documents.

        Raises:
            ValidationError: If a feature file is missing
            FeatureMismatchError: If row counts or row ids disagree
        """
        loaded = {view: read_features(self.feature_path(view)) for view in views}
        validate_feature_rows({view: fm.n_rows for view, fm in loaded.items()})
        validate_feature_rows({"documents": len(docs), **{v: fm.n_rows for v, fm in loaded.items()}})
        expected = [d.user_id for d in docs]
        for view, fm in loaded.items():
            if fm.row_ids != expected:
                raise FeatureMismatchError(f"Rows of view {view} do not follow the documents file")
        return loaded

    @staticmethod
    def _rows(docs: Sequence[UserDocument], split: str) -> np.ndarray:
        return np.array([i for i, d in enumerate(docs) if d.split == split], dtype=np.int64)

    @staticmethod
    def _select(loaded: Dict[str, FeatureMatrix], rows: np.ndarray):
        return {view: fm.select(rows) for view, fm in loaded.items()}

    def train(self, views: Optional[Sequence[str]] = None) -> TrainingHistory:
        """Train MENET on the training split and keep the best-validation weights."""
        model_cfg = self.cfg.model
        if views:
            model_cfg = model_cfg.model_copy(update={"views": validate_view_names(views)})

        docs = self.load_documents()
        loaded = self.load_views(model_cfg.views, docs)

        grouped = split_documents(docs)
        table = build_class_table(grouped["train"])
        train_labels = encode_labels(grouped["train"], table)
        val_labels = encode_labels(grouped["validation"], table)
        encode_labels(grouped["test"], table)
        write_class_table(table, self.path(Config.CLASS_TABLE_FILE))

        train_rows, val_rows = self._rows(docs, "train"), self._rows(docs, "validation")
        dims = {view: fm.n_cols for view, fm in loaded.items()}
        model = MenetModel(model_cfg, dims, len(table))
        model, history = train(
            model,
            self._select(loaded, train_rows),
            train_labels,
            self._select(loaded, val_rows),
            val_labels,
            model_cfg,
        )

        save_checkpoint(model, self.path(Config.CHECKPOINT_FILE))
        write_history_csv(history, self.path(Config.HISTORY_FILE))
        return history

    def _predict_split(self, split: str):
        model = load_checkpoint(self.path(Config.CHECKPOINT_FILE))
        table = read_class_table(self.path(Config.CLASS_TABLE_FILE))
        if len(table) != model.m:
            raise ValidationError(f"Class table has {len(table)} classes, checkpoint expects {model.m}")
        docs = self.load_documents()
        loaded = self.load_views(model.views, docs)
        rows = self._rows(docs, split)
        predictions = model.predict(self._select(loaded, rows), batch_size=model.config.batch_size)
        return model, table, [docs[i] for i in rows], predictions

    def evaluate(self, split: str = "test") -> EvalReport:
        """Score the checkpoint on a split and write the JSON report."""
        model, table, docs, predictions = self._predict_split(split)
        report = evaluate(predictions, docs, table, model.views)
        write_report(report, self.path(Config.REPORT_FILE))
        return report

    def predict(self, split: str = "test") -> Path:
        """Write ``user_id,class,label,longitude,latitude`` for every user of a split."""
        _, table, docs, predictions = self._predict_split(split)
        out = self.path(Config.PREDICTIONS_FILE)
        with open(out, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["user_id", "class", "label", "longitude", "latitude"])
            for doc, class_id in zip(docs, predictions):
                c = table.classes[int(class_id)]
                writer.writerow([doc.user_id, c.class_id, c.label,
                                 repr(c.centroid_longitude), repr(c.centroid_latitude)])
        logger.info("cli", "predictions_written", path=out, users=len(docs), split=split)
        return out

    def synthesize(self, output: Path, synth_cfg: SyntheticCorpusConfig) -> int:
        records = generate_corpus(synth_cfg)
        output.parent.mkdir(parents=True, exist_ok=True)
        write_jsonl(records, output)
        return len(records)


def _run(ctx: click.Context, action):
    """Run a stage, mapping pipeline errors to their exit codes."""
    try:
        return action()
    except PipelineError as e:
        click.echo(f"Error: {e}", err=True)
        logger.error("cli", "command_failed", command=ctx.info_name, error=str(e), exit_code=e.exit_code)
        sys.exit(e.exit_code)
    except PydanticValidationError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(ValidationError.exit_code)
    except Exception as e:
        click.echo(f"Unexpected error: {e}", err=True)
        logger.error("cli", "command_crashed", command=ctx.info_name, error=str(e))
        sys.exit(1)


def _views_option(value: Optional[str]) -> Optional[List[str]]:
    return [v for v in value.split(",")] if value else None


# CLI Commands
@click.group()
@click.option('--config', 'config_path', type=click.Path(), help='Pipeline config file (TOML)')
@click.option('--workdir', help='Directory for all pipeline artifacts')
@click.option('--seed', type=int, help='Seed for every stochastic stage')
@click.option('--deterministic', is_flag=True, default=None, help='Force single-threaded stochastic stages')
@click.option('--verbose', is_flag=True, help='Enable verbose logging')
@click.pass_context
def cli(ctx, config_path, workdir, seed, deterministic, verbose):
    """MENET - multiview Twitter user geolocation pipeline."""
    ctx.ensure_object(dict)
    overrides = {"paths.workdir": workdir, "seed": seed, "deterministic": deterministic or None}
    cfg = _run(ctx, lambda: load_pipeline_config(config_path, overrides))
    ctx.obj['pipeline'] = PipelineCLI(cfg, verbose=verbose)


@cli.command('ingest')
@click.option('--input', 'input_path', help='Tweet dump (overrides paths.input)')
@click.option('--format', 'input_format', type=click.Choice(['jsonl', 'geotext_tsv']), help='Input format')
@click.option('--split-file', help='JSON split manifest (overrides paths.split_file)')
@click.option('--label-file', help='user_id<TAB>label lookup (overrides paths.label_file)')
@click.option('--task', type=click.Choice(['region', 'state', 'custom']), help='Label task')
@click.pass_context
def ingest_cmd(ctx, input_path, input_format, split_file, label_file, task):
    """Ingest tweets into user documents and a split manifest."""
    pipeline: PipelineCLI = ctx.obj['pipeline']
    cfg = pipeline.cfg
    pipeline.cfg = cfg.model_copy(update={
        "paths": cfg.paths.model_copy(update={
            k: v for k, v in {"input": input_path, "split_file": split_file, "label_file": label_file}.items()
            if v is not None
        }),
        "corpus": cfg.corpus.model_copy(update={"format": input_format}) if input_format else cfg.corpus,
        "task": task or cfg.task,
    })
    counts = _run(ctx, pipeline.ingest)

    click.echo("Ingest completed!")
    click.echo(f"  Train: {counts['train']}")
    click.echo(f"  Validation: {counts['validation']}")
    click.echo(f"  Test: {counts['test']}")
    click.echo(f"  Rejected lines: {counts['rejected_lines']}")
    click.echo(f"  Rejected users: {counts['rejected_users']}")


@cli.command('featurize')
@click.option('--views', default=",".join(VIEW_NAMES), help='Comma-separated views to compute')
@click.pass_context
def featurize_cmd(ctx, views):
    """Compute feature files for the requested views."""
    pipeline: PipelineCLI = ctx.obj['pipeline']
    written = _run(ctx, lambda: pipeline.featurize(_views_option(views)))

    click.echo("Features written:")
    for view, fm in written.items():
        click.echo(f"  {view}: {fm.n_rows} x {fm.n_cols} -> {pipeline.feature_path(view)}")


@cli.command('train')
@click.option('--views', help='Comma-separated views to train on (default: model.views)')
@click.pass_context
def train_cmd(ctx, views):
    """Train MENET and write the checkpoint and history."""
    pipeline: PipelineCLI = ctx.obj['pipeline']
    history = _run(ctx, lambda: pipeline.train(_views_option(views)))

    click.echo("Training completed!")
    click.echo(f"  Epochs run: {len(history.records)}")
    click.echo(f"  Best epoch: {history.best_epoch}")
    click.echo(f"  Best validation accuracy: {history.best_val_accuracy:.4f}")
    click.echo(f"  Stopped early: {history.stopped_early}")


@cli.command('evaluate')
@click.option('--split', default='test', type=click.Choice(['train', 'validation', 'test']), help='Split to score')
@click.pass_context
def evaluate_cmd(ctx, split):
    """Evaluate the checkpoint and print the report."""
    pipeline: PipelineCLI = ctx.obj['pipeline']
    report = _run(ctx, lambda: pipeline.evaluate(split))

    click.echo(f"Evaluation ({split}):")
    click.echo(format_report(report))


@cli.command('predict')
@click.option('--split', default='test', type=click.Choice(['train', 'validation', 'test']), help='Split to predict')
@click.pass_context
def predict_cmd(ctx, split):
    """Write predicted classes and centroid coordinates."""
    pipeline: PipelineCLI = ctx.obj['pipeline']
    out = _run(ctx, lambda: pipeline.predict(split))
    click.echo(f"Predictions written to {out}")


@cli.command('synthesize')
@click.option('--output', type=click.Path(), help='JSONL output (default: <workdir>/synthetic.jsonl)')
@click.option('--users', default=400, type=int, help='Number of users')
@click.option('--no-text-signal', is_flag=True, help='Randomize regional vocabulary')
@click.option('--no-mention-signal', is_flag=True, help='Mention peers from any region')
@click.option('--no-hour-signal', is_flag=True, help='Randomize posting hours')
@click.pass_context
def synthesize_cmd(ctx, output, users, no_text_signal, no_mention_signal, no_hour_signal):
    """Generate the synthetic four-region corpus."""
    pipeline: PipelineCLI = ctx.obj['pipeline']
    out = Path(output) if output else pipeline.path("synthetic.jsonl")
    synth_cfg = _run(ctx, lambda: SyntheticCorpusConfig(
        n_users=users,
        text_signal=not no_text_signal,
        mention_signal=not no_mention_signal,
        hour_signal=not no_hour_signal,
        seed=pipeline.cfg.seed,
    ))
    count = _run(ctx, lambda: pipeline.synthesize(out, synth_cfg))
    click.echo(f"Wrote {count} tweets for {users} users to {out}")


if __name__ == '__main__':
    cli()
