"""Command-line interface.

Reports print as tab-separated lines (tables carry a header row); `bench`
prints CSV.  Commands that produce reports accept ``--plot DIR`` to render
matplotlib figures next to the printed output.  Exit codes: 0 success, 2
validation or parse failure, 3 impossible evidence, 4 structural error.
"""

from __future__ import annotations

import csv
import functools
import io
import sys

import click

from .bench import (
    compare_methods,
    generate_random_diagram,
    voe_by_lock,
    voe_by_lock_conditional,
    voe_by_propagation,
)
from .core import DiagramError, validate as validate_diagram
from .evidence import EvidenceError, ImpossibleEvidenceError
from .fileio import (
    ParseError,
    ValidationFailure,
    fmt,
    load_diagram,
    load_joint,
    parse_evidence,
    policy_rows,
    save_diagram,
)
from .transforms import evaluate
from .valuation import (
    VoeReport,
    propagate_observation,
    default_vopi_decision,
    informed_evaluation,
    outcome_sensitivity,
    value_of_control,
    voc_standard,
    voe_report,
    vopi_from_voe,
    vopi_standard,
)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValidationFailure,) as exc:
            for v in exc.violations:
                click.echo(str(v), err=True)
            raise SystemExit(2)
        except ParseError as exc:
            click.echo(f"parse error: {exc}", err=True)
            raise SystemExit(2)
        except ImpossibleEvidenceError as exc:
            click.echo(f"impossible evidence: {exc}", err=True)
            raise SystemExit(3)
        except DiagramError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(4)

    return wrapper


def _load(path: str, allow_forgetting: bool = False):
    with open(path, "rb") as fh:
        return load_diagram(fh.read(), require_no_forgetting=not allow_forgetting)


def _policy_lines(policy) -> list[str]:
    return [
        "\t".join(("policy", dec, cfg, choice))
        for dec, cfg, choice in policy_rows(policy)
    ]


def _compact_policy(policy) -> str:
    parts = []
    for dec, cfg, choice in policy_rows(policy):
        parts.append(f"{dec}={choice}" if cfg == "-" else f"{dec}[{cfg}]={choice}")
    return ";".join(parts)


def _print_report(report: VoeReport) -> None:
    click.echo(f"baseline\t{fmt(report.baseline_ev)}")
    click.echo("outcome\tprobability\tev_after\tvoe\tpolicy")
    for e in report.entries:
        click.echo(
            "\t".join(
                (
                    e.outcome,
                    fmt(e.probability),
                    fmt(e.ev_after),
                    fmt(e.voe),
                    _compact_policy(e.policy),
                )
            )
        )


@click.group()
def main() -> None:
    """Influence-diagram evaluation and value-of-evidence analysis."""


@main.command("validate")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--allow-forgetting", is_flag=True, help="Skip the no-forgetting check.")
@_guarded
def cmd_validate(file: str, allow_forgetting: bool) -> None:
    """Check a diagram file against every structural rule."""
    try:
        _load(file, allow_forgetting)
    except ValidationFailure as exc:
        for v in exc.violations:
            click.echo(str(v))
        raise SystemExit(2)
    click.echo("ok")


@main.command("evaluate")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--plot", type=click.Path(file_okay=False), help="Write a step-space figure here.")
@_guarded
def cmd_evaluate(file: str, plot: str | None) -> None:
    """Expected value, optimal policy, and the space bottleneck."""
    diagram = _load(file)
    result = evaluate(diagram)
    click.echo(f"ev\t{fmt(result.ev)}")
    click.echo(f"max_space\t{result.ledger.max_space}")
    for line in _policy_lines(result.policy):
        click.echo(line)
    if plot:
        from .report import figure_path, ledger_figure

        out = ledger_figure(result.ledger, figure_path(plot, f"{diagram.name}-steps"),
                            title=f"{diagram.name}: reduction")
        click.echo(f"figure\t{out}")


@main.command("propagate")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--evidence", "evidence_exprs", multiple=True, required=True,
              help="NODE=OUTCOME or NODE|DEC=alt:out,... (repeatable).")
@click.option("--out", type=click.Path(dir_okay=False), help="Save the conditioned diagram here.")
@_guarded
def cmd_propagate(file: str, evidence_exprs: tuple[str, ...], out: str | None) -> None:
    """Fold observations into the diagram and re-evaluate."""
    diagram = _load(file)
    for expr in evidence_exprs:
        ev = parse_evidence(expr)
        result = propagate_observation(diagram, ev)
        click.echo(f"applied\t{expr}\tweight\t{fmt(result.evidence_weight)}")
        diagram = result.diagram
    evaluation = evaluate(diagram)
    click.echo(f"ev\t{fmt(evaluation.ev)}")
    click.echo(f"max_space\t{evaluation.ledger.max_space}")
    for line in _policy_lines(evaluation.policy):
        click.echo(line)
    if out:
        with open(out, "wb") as fh:
            fh.write(save_diagram(diagram))
        click.echo(f"saved\t{out}")


def _mode_options(fn):
    fn = click.option("--joint", "joint_path", type=click.Path(exists=True, dir_okay=False),
                      help="Joint table over conditional-outcome vectors (full mode).")(fn)
    fn = click.option("--mode", type=click.Choice(["naive", "full"]), default="naive",
                      show_default=True)(fn)
    return fn


def _resolve_joint(diagram, node: str, mode: str, joint_path: str | None):
    if mode == "full":
        if not joint_path:
            raise EvidenceError("full mode needs --joint FILE")
        with open(joint_path, "rb") as fh:
            return load_joint(fh.read(), diagram)
    if joint_path:
        raise EvidenceError("--joint is only meaningful with --mode full")
    return None


@main.command("voe")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--node", required=True)
@_mode_options
@click.option("--method", type=click.Choice(["1", "2"]), default="1", show_default=True,
              help="1 = per-outcome propagation, 2 = locked-node single pass.")
@click.option("--plot", type=click.Path(file_okay=False), help="Write a VOE figure here.")
@_guarded
def cmd_voe(file: str, node: str, mode: str, joint_path: str | None, method: str,
            plot: str | None) -> None:
    """Per-outcome value-of-evidence table for a node."""
    diagram = _load(file)
    joint = _resolve_joint(diagram, node, mode, joint_path)
    if method == "1":
        report, ledger = voe_by_propagation(diagram, node, joint)
    elif joint is None:
        report, ledger = voe_by_lock(diagram, node)
    else:
        report, ledger = voe_by_lock_conditional(diagram, node, joint)
    _print_report(report)
    click.echo(f"max_space\t{ledger.max_space}")
    if plot:
        from .report import figure_path, voe_figure

        out = voe_figure(report, figure_path(plot, f"voe-{node}"))
        click.echo(f"figure\t{out}")


@main.command("os")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--node", required=True)
@_mode_options
@_guarded
def cmd_os(file: str, node: str, mode: str, joint_path: str | None) -> None:
    """Outcome sensitivity: the spread of the VOE values."""
    diagram = _load(file)
    joint = _resolve_joint(diagram, node, mode, joint_path)
    click.echo(f"os\t{fmt(outcome_sensitivity(voe_report(diagram, node, joint)))}")


@main.command("vopi")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--node", required=True)
@click.option("--decision", default=None,
              help="Defaults to the earliest decision not already informed.")
@click.option("--via", type=click.Choice(["voe", "standard"]), default="voe", show_default=True)
@_mode_options
@_guarded
def cmd_vopi(file: str, node: str, decision: str | None, via: str, mode: str,
             joint_path: str | None) -> None:
    """Value of perfect information about a node."""
    diagram = _load(file)
    joint = _resolve_joint(diagram, node, mode, joint_path)
    decision = decision or default_vopi_decision(diagram, node)
    if via == "voe":
        click.echo(f"vopi\t{fmt(vopi_from_voe(voe_report(diagram, node, joint)))}")
    else:
        informed = informed_evaluation(diagram, node, decision, joint)
        click.echo(f"ev_informed\t{fmt(informed.ev)}")
        click.echo(f"vopi\t{fmt(informed.ev - evaluate(diagram).ev)}")


@main.command("voc")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--node", required=True)
@click.option("--via", type=click.Choice(["voe", "standard"]), default="voe", show_default=True)
@_mode_options
@_guarded
def cmd_voc(file: str, node: str, via: str, mode: str, joint_path: str | None) -> None:
    """Value of controlling a node's outcome."""
    diagram = _load(file)
    joint = _resolve_joint(diagram, node, mode, joint_path)
    if via == "voe":
        click.echo(f"voc\t{fmt(value_of_control(voe_report(diagram, node, joint)))}")
    else:
        click.echo(f"voc\t{fmt(voc_standard(diagram, node))}")


@main.command("bench")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--node", required=True)
@click.option("--decision", required=True)
@click.option("--plot", type=click.Path(file_okay=False), help="Write a method-space figure here.")
@_guarded
def cmd_bench(file: str, node: str, decision: str, plot: str | None) -> None:
    """Compare the VOPI pipelines: values must agree, spaces are reported."""
    diagram = _load(file)
    comparison = compare_methods(diagram, node, decision)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["diagram", "method", "metric", "max_space", "steps"])
    writer.writeheader()
    for row in comparison.rows(diagram.name):
        writer.writerow(row)
    sys.stdout.write(buf.getvalue())
    for violation in comparison.violations:
        click.echo(f"violation: {violation}", err=True)
    if plot:
        from .report import figure_path, methods_figure

        out = methods_figure(comparison, figure_path(plot, f"bench-{node}"))
        click.echo(f"figure\t{out}")


@main.command("gen")
@click.option("--seed", type=int, required=True)
@click.option("--nodes", type=int, required=True)
@click.option("--max-outcomes", type=int, required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@_guarded
def cmd_gen(seed: int, nodes: int, max_outcomes: int, out: str) -> None:
    """Write a random valid diagram (deterministic in the seed)."""
    diagram = generate_random_diagram(seed, nodes, max_outcomes)
    with open(out, "wb") as fh:
        fh.write(save_diagram(diagram))
    click.echo(f"wrote\t{out}")


@main.command("serve")
@click.option("--port", type=int, default=8712, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--diagram", "diagram_path", type=click.Path(exists=True, dir_okay=False),
              help="Preload this diagram as the service default.")
@click.option("--snapshot", type=click.Path(dir_okay=False),
              help="Write sessions to this JSON file on shutdown.")
@_guarded
def cmd_serve(port: int, host: str, diagram_path: str | None, snapshot: str | None) -> None:
    """Start the interactive session service (and the explorer UI, if built)."""
    import json
    import os

    import uvicorn

    from .service import create_app

    default_doc = None
    if diagram_path:
        with open(diagram_path, "rb") as fh:
            raw = fh.read()
        load_diagram(raw)  # reject bad defaults before serving them
        default_doc = json.loads(raw)
    static_dir = os.path.join("frontend", "dist") if os.path.isdir(
        os.path.join("frontend", "dist")
    ) else None
    app = create_app(default_diagram=default_doc, snapshot_path=snapshot,
                     static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
