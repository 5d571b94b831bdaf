"""Command-line pipeline: ingest -> build -> metrics -> embed -> train -> assess.

Every command operates on a workspace directory (--workspace, default
./workspace) so successive steps share state. Seeds are explicit flags;
rerunning a command with identical inputs reproduces identical artifacts.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import metrics as metrics_mod
from . import models, risk
from .cases import CaseFilter, CaseParseError, SynthConfig, load_cases, synthesize_cases
from .graph import UnknownNodeError, graph_stats
from .semantics import EmbeddingProviderConfig
from .workspace import GraphCheckpointMismatch, Workspace, WorkspaceError


class _Fail(click.ClickException):
    def __init__(self, message: str, exit_code: int = 1):
        super().__init__(message)
        self.exit_code = exit_code


def _workspace(ctx: click.Context) -> Workspace:
    return ctx.obj


@click.group()
@click.option(
    "--workspace",
    "-w",
    default="./workspace",
    envvar="IDRISK_WORKSPACE",
    show_default=True,
    help="Workspace directory shared by all commands.",
)
@click.pass_context
def main(ctx: click.Context, workspace: str) -> None:
    """Identity ecosystem graphs, link prediction and disclosure risk scoring."""
    ctx.obj = Workspace(workspace)


@main.command()
@click.argument("cases_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def ingest(ctx: click.Context, cases_file: str) -> None:
    """Validate and import a JSONL case file into the workspace."""
    ws = _workspace(ctx)
    try:
        cases = load_cases(cases_file)
    except CaseParseError as exc:
        raise _Fail(f"{cases_file}: {exc}", exit_code=2)
    ws.store_cases(cases, source=str(Path(cases_file).resolve()))
    click.echo(f"ingested {len(cases)} cases into {ws.root}")


@main.command()
@click.option("--attributes", "-a", type=int, required=True, help="Number of PII attributes.")
@click.option("--cases", "-c", "n_cases", type=int, required=True, help="Number of cases.")
@click.option("--communities", "-k", type=int, default=10, show_default=True)
@click.option("--bias", "-b", type=float, default=0.9, show_default=True,
              help="Probability an output stays in the case community.")
@click.option("--seed", "-s", type=int, default=0, show_default=True)
@click.pass_context
def synth(ctx, attributes: int, n_cases: int, communities: int, bias: float, seed: int) -> None:
    """Generate a synthetic community-structured case corpus."""
    ws = _workspace(ctx)
    try:
        config = SynthConfig(
            n_attributes=attributes,
            n_cases=n_cases,
            n_communities=communities,
            intra_community_bias=bias,
            seed=seed,
        )
    except ValueError as exc:
        raise _Fail(str(exc), exit_code=2)
    cases = synthesize_cases(config)
    ws.store_cases(cases, source="synthetic", synth_config=config)
    click.echo(f"synthesized {len(cases)} cases over {attributes} attributes into {ws.root}")


@main.command()
@click.option("--min-loss", type=float, default=None, help="Keep cases with loss_usd >= this.")
@click.option("--sector", type=str, default=None, help="Keep cases from this sector.")
@click.option("--age-min", type=int, default=None)
@click.option("--age-max", type=int, default=None)
@click.pass_context
def build(ctx, min_loss, sector, age_min, age_max) -> None:
    """Construct the ecosystem graph from the workspace cases."""
    ws = _workspace(ctx)
    age_range = None
    if age_min is not None or age_max is not None:
        age_range = (age_min if age_min is not None else 0,
                     age_max if age_max is not None else 200)
    try:
        case_filter = CaseFilter(min_loss_usd=min_loss, sector=sector, victim_age_range=age_range)
        g = ws.build(case_filter)
    except (ValueError, WorkspaceError) as exc:
        raise _Fail(str(exc))
    stats = graph_stats(g)
    click.echo(
        f"built {g.label()}: nodes={stats['n_nodes']} edges={stats['n_edges']} "
        f"total_weight={stats['total_weight']}"
    )


@main.command(name="metrics")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None,
              help="Export the feature table as CSV.")
@click.pass_context
def metrics_cmd(ctx, csv_path) -> None:
    """Compute node metrics (degrees, centralities, PageRank) for the graph."""
    ws = _workspace(ctx)
    try:
        g = ws.graph()
        table = ws.feature_table()
    except WorkspaceError as exc:
        raise _Fail(str(exc))
    stats = graph_stats(g)
    click.echo(f"nodes={stats['n_nodes']} edges={stats['n_edges']} "
               f"total_weight={stats['total_weight']} backend={metrics_mod.BACKEND_NAME}")
    if csv_path:
        table.to_csv(csv_path)
        click.echo(f"feature table written to {csv_path}")


@main.command()
@click.option("--dim", type=int, default=128, show_default=True)
@click.option("--max-tokens", type=int, default=124, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--lexicon", type=click.Path(exists=True, dir_okay=False), default=None,
              help="TSV lexicon (word<TAB>definition); defaults to the built-in one.")
@click.option("--external", type=click.Path(exists=True, dir_okay=False), default=None,
              help="External embedding file (dim=<D> header).")
@click.pass_context
def embed(ctx, dim, max_tokens, seed, lexicon, external) -> None:
    """Compute semantic embeddings for every graph node."""
    ws = _workspace(ctx)
    config = EmbeddingProviderConfig(
        provider="external" if external else "hashed",
        embedding_dim=dim,
        max_token_len=max_tokens,
        external_path=external,
        seed=seed,
    )
    try:
        sem = ws.compute_embeddings(config, lexicon_path=lexicon)
    except (WorkspaceError, ValueError) as exc:
        raise _Fail(str(exc))
    click.echo(f"embedded {len(sem)} attributes (dim={dim}, provider={config.provider})")


@main.command()
@click.option("--model", "-m", "kind", type=click.Choice(list(models.KINDS)), required=True)
@click.option("--epochs", type=int, default=50, show_default=True)
@click.option("--lr", type=float, default=0.01, show_default=True)
@click.option("--hidden", type=int, default=64, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--split-seed", type=int, default=0, show_default=True)
@click.option("--optimizer", type=click.Choice(["adam", "sgd"]), default="adam", show_default=True)
@click.pass_context
def train(ctx, kind, epochs, lr, hidden, seed, split_seed, optimizer) -> None:
    """Train a link-prediction model on the active graph."""
    ws = _workspace(ctx)
    config = models.ModelConfig(
        kind=kind, hidden_dim=hidden, epochs=epochs, lr=lr, seed=seed, optimizer=optimizer
    )
    try:
        report = ws.train(config, split_seed=split_seed)
    except (WorkspaceError, ValueError) as exc:
        raise _Fail(str(exc))
    click.echo(
        f"{models.DISPLAY_NAMES[kind]}: best validation accuracy "
        f"{report.best_val_accuracy:.4f} (epoch {report.best_epoch}/{epochs}, "
        f"auc {report.val_auc:.4f})"
    )


@main.command()
@click.option("--lost", required=True, help="Comma-separated lost attribute names.")
@click.option("--threshold", "-t", type=float, default=0.0, show_default=True)
@click.option("--model", "-m", "kind", type=click.Choice(list(models.KINDS)),
              default="featuregcn", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Report JSON path (default: <workspace>/reports/latest.json).")
@click.option("--top", type=int, default=20, show_default=True, help="Rows to print.")
@click.pass_context
def assess(ctx, lost, threshold, kind, out, top) -> None:
    """Rank the attributes put at risk by the given lost attributes."""
    ws = _workspace(ctx)
    lost_list = [s.strip() for s in lost.split(",") if s.strip()]
    try:
        query = risk.RiskQuery(
            lost_attributes=tuple(lost_list), threshold=threshold, model_kind=kind
        )
        report = ws.assess(query)
    except UnknownNodeError as exc:
        raise _Fail(str(exc), exit_code=3)
    except GraphCheckpointMismatch as exc:
        raise _Fail(str(exc), exit_code=4)
    except (WorkspaceError, ValueError) as exc:
        raise _Fail(str(exc))

    out_path = Path(out) if out else ws.reports_dir / "latest.json"
    ws.ensure_dirs()
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_bytes(report.to_json_bytes())

    click.echo(f"lost: {', '.join(lost_list)}  threshold: {threshold}  model: {kind}")
    click.echo(f"{'attribute':<32} {'p':>8} {'S':>10} {'RS':>8}")
    for c in report.candidates[:top]:
        click.echo(f"{c.attribute:<32} {c.p:>8.4f} {c.s:>10.6f} {c.rs:>8.2f}")
    remaining = len(report.candidates) - top
    if remaining > 0:
        click.echo(f"... {remaining} more candidates")
    click.echo(f"report written to {out_path}")


@main.command()
@click.pass_context
def report(ctx) -> None:
    """Print the validation-accuracy matrix across workspace graphs and models."""
    ws = _workspace(ctx)
    matrix = ws.report_matrix()
    if not matrix["graphs"]:
        raise _Fail("no training reports in workspace; run `train` first")
    kinds = list(models.KINDS)
    header = f"{'graph':<18}" + "".join(f"{models.DISPLAY_NAMES[k]:>12}" for k in kinds)
    click.echo(header)
    for row in matrix["graphs"]:
        cells = []
        for k in kinds:
            entry = row["models"].get(k)
            cells.append(f"{entry['best_val_accuracy']:>12.4f}" if entry else f"{'-':>12}")
        click.echo(f"{row['graph']:<18}" + "".join(cells))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--ui", type=click.Path(file_okay=False), default=None,
              help="Static directory with the web UI build (served at /).")
@click.pass_context
def serve(ctx, host, port, ui) -> None:
    """Serve the HTTP JSON API (and optionally the web UI) over the workspace."""
    import uvicorn

    from .service import create_app

    ws = _workspace(ctx)
    app = create_app(ws.root, ui_dir=ui)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    sys.exit(main())
