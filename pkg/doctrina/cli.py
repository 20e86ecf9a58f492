"""
Command-line interface for Doctrina.

Loads workspace files and runs checking, search, normalization, equality,
enumeration and translation over them. Every command prints a report and
exits with the code of the report status.
"""

import logging
import sys
from pathlib import Path

import click

from doctrina.calculus import Checker, Elaborator, elaborate_sequent, render_sequent
from doctrina.completion import completeness_report, enumerate_homset
from doctrina.config_loader import Config, ConfigurationError, load_config_or_defaults
from doctrina.doctrine import BUILTIN_DOCTRINES
from doctrina.base import BUILTIN_BASES
from doctrina.errors import DoctrinaError, FuelExhausted, UnknownItem
from doctrina.report import Report, ReportItem, Status
from doctrina.rewrite import STRATEGIES, EqVerdict, equal, normalize
from doctrina.search import SearchBudget, search
from doctrina.syntax import ExpectEq, ExpectNormal, format_term, parse_sequent
from doctrina.translate import push_sketch, translate_derivation
from doctrina.types import enumerate_types
from doctrina.workspace import Workspace, load_workspace

logger = logging.getLogger(__name__)


def output_options(command):
    """Attach the shared --report and --entries-only flags."""
    command = click.option(
        "--entries-only",
        is_flag=True,
        help="Print sequents as signed entry lists instead of split contexts",
    )(command)
    command = click.option(
        "--report",
        "report_format",
        type=click.Choice(["text", "json"]),
        default=None,
        help="Report format (default: app.report_format from configuration)",
    )(command)
    return command


@click.group()
@click.version_option(version="0.1.0", prog_name="doctrina")
@click.option("--config", "config_path", type=click.Path(exists=True), help="Path to configuration.yaml")
@click.option("-v", "--verbose", is_flag=True, help="Log debug output to stderr")
@click.pass_context
def main(ctx, config_path: str | None, verbose: bool):
    """Doctrina - check, search and compare derivations over doctrines."""
    try:
        config = load_config_or_defaults(config_path)
    except ConfigurationError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(1)
    level = "DEBUG" if verbose else str(config.get_app_setting("log_level", "WARNING")).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    ctx.ensure_object(dict)
    ctx.obj["config"] = config


# Helpers


def _config(ctx) -> Config:
    return ctx.obj["config"]


def _finish(ctx, report: Report, report_format: str | None) -> None:
    form = report_format or _config(ctx).get_app_setting("report_format", "text")
    click.echo(report.render(form))
    sys.exit(report.exit_code)


def _load(ctx, file: str, report: Report) -> tuple[Workspace | None, Config]:
    """Load one workspace, recording parse errors and load problems in the report."""
    config = _config(ctx)
    try:
        workspace = load_workspace(file, config)
    except DoctrinaError as e:
        # A parse error stops this file only
        report.add(ReportItem.from_error(Path(file).name, e))
        return None, config
    # Per-file budget directives
    try:
        config = config.apply_directives(workspace.directives)
    except ConfigurationError as e:
        logger.warning(f"{file}: {e}")
    for problem in workspace.problems:
        report.add(
            ReportItem(
                name=problem.item,
                status=Status.VALIDATION_ERROR,
                error_code=problem.code,
                path=problem.path or None,
                span=problem.span,
                detail=problem.message,
            )
        )
    return workspace, config


def _pick_sketch(workspace: Workspace, name: str | None) -> str:
    if name:
        workspace.sketch(name)
        return name
    if not workspace.sketches:
        raise UnknownItem("The workspace declares no sketch")
    return list(workspace.sketches)[-1]


def _proof_item(workspace: Workspace, name: str, entries_only: bool) -> ReportItem:
    record = workspace.proof(name)
    if not record.ok:
        return ReportItem.from_error(name, record.error)
    checker = workspace.checker(record.sketch)
    return ReportItem(
        name=name,
        conclusion=render_sequent(checker, record.conclusion, entries_only),
        span=record.span,
    )


def _expectation_name(item) -> str:
    if isinstance(item, ExpectEq):
        return f"eq {item.lhs}, {item.rhs}"
    return f"normal {item.proof}"


def _check_expectation(workspace: Workspace, item, config: Config) -> ReportItem:
    name = _expectation_name(item)
    if isinstance(item, ExpectEq):
        # Compare the two proofs and match the expected verdict
        record = workspace.proof(item.lhs)
        d1 = workspace.derivation(item.lhs)
        d2 = workspace.derivation(item.rhs)
        sketch = workspace.sketch(record.sketch)
        verdict = equal(
            sketch, d1, d2, checker=workspace.checker(record.sketch), **config.equality_budget()
        )
        if verdict.value == item.verdict:
            return ReportItem(name=name, span=item.span, detail=verdict.value)
        status = Status.UNKNOWN if verdict is EqVerdict.UNKNOWN else Status.PROOF_ERROR
        return ReportItem(
            name=name,
            status=status,
            error_code="VerdictMismatch",
            span=item.span,
            detail=f"expected {item.verdict}, got {verdict.value}",
        )

    # Normalize both sides with the configured strategy
    assert isinstance(item, ExpectNormal)
    record = workspace.proof(item.proof)
    sketch = workspace.sketch(record.sketch)
    checker = workspace.checker(record.sketch)
    rewrite = config.get_section("rewrite")
    fuel = int(rewrite["fuel"])
    strategy = rewrite["strategy"]
    got = normalize(sketch, workspace.derivation(item.proof), fuel, strategy, checker)
    wanted = Elaborator(sketch, workspace.proofs_in(record.sketch), checker).elaborate(item.term)
    wanted = normalize(sketch, wanted, fuel, strategy, checker)
    if format_term(got) == format_term(wanted):
        return ReportItem(name=name, span=item.span, detail=format_term(got))
    return ReportItem(
        name=name,
        status=Status.PROOF_ERROR,
        error_code="NormalFormMismatch",
        span=item.span,
        detail=f"normal form is {format_term(got)}",
    )


# Commands


@main.command("validate")
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--probe", is_flag=True, help="Also run the bounded completeness checks on each sketch")
@output_options
@click.pass_context
def validate(ctx, files: tuple[str, ...], probe: bool, report_format: str | None, entries_only: bool):
    """Load workspaces and report every validation problem.

    Doctrines, sketches and maps are validated on load. With --probe each
    sketch also gets the precomplete, realized and saturated checks.
    """
    report = Report("validate")
    for file in files:
        workspace, config = _load(ctx, file, report)
        if workspace is None:
            continue
        # Anything that failed to load is already in the report
        for name in workspace.doctrines:
            report.add(ReportItem(name=name, detail="doctrine"))
        for name, sketch in workspace.sketches.items():
            report.add(ReportItem(name=name, detail=f"sketch over {sketch.doctrine.name}"))
            if probe:
                for item in _completeness_items(sketch, config):
                    report.add(item)
        for name, m in workspace.maps.items():
            report.add(ReportItem(name=name, detail=f"map {m.source.name} -> {m.target.name}"))
    _finish(ctx, report, report_format)


def _completeness_items(sketch, config: Config) -> list[ReportItem]:
    limits = config.probe_limits()
    try:
        result = completeness_report(
            sketch,
            bound=limits["bound"],
            node_bound=limits["node_bound"],
            max_derivations=config.enumeration_limits()["max_derivations"],
            equality=config.equality_budget(),
        )
    except DoctrinaError as e:
        return [ReportItem.from_error(f"{sketch.name} completeness", e)]
    items = []
    # Precomplete
    if not result.precomplete:
        items.append(
            ReportItem(
                name=f"{sketch.name} precomplete",
                status=Status.VALIDATION_ERROR,
                error_code="NotPrecomplete",
                detail="; ".join(result.missing),
            )
        )
    for probe in result.probes:
        # Only a refuted factorization counts against the sketch
        if probe.passed:
            status, code = Status.OK, None
        elif probe.inconclusive:
            status, code = Status.UNKNOWN, "Unknown"
        else:
            status, code = Status.VALIDATION_ERROR, "NotRealized"
        detail = probe.verdict
        if probe.unknown:
            detail += f"; {probe.unknown} comparisons undecided"
        if probe.failures:
            detail += "; " + "; ".join(str(f) for f in probe.failures)
        items.append(
            ReportItem(
                name=f"{sketch.name} probe {probe.instance}",
                status=status,
                error_code=code,
                detail=detail,
            )
        )
    # Saturated
    if not result.saturated:
        items.append(
            ReportItem(
                name=f"{sketch.name} saturated",
                status=Status.VALIDATION_ERROR,
                error_code="NotSaturated",
                detail="; ".join(result.unsaturated),
            )
        )
    return items


@main.command("check")
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--proof", "proof_name", default=None, help="Check only this proof")
@output_options
@click.pass_context
def check(ctx, files: tuple[str, ...], proof_name: str | None, report_format: str | None, entries_only: bool):
    """Check every proof, rejection and expectation in the given workspaces."""
    report = Report("check")
    for file in files:
        workspace, config = _load(ctx, file, report)
        if workspace is None:
            continue
        # Single proof
        if proof_name is not None:
            try:
                report.add(_proof_item(workspace, proof_name, entries_only))
            except DoctrinaError as e:
                report.add(ReportItem.from_error(proof_name, e))
            continue

        # Goals that failed to elaborate
        for goal in workspace.goals.values():
            if goal.error is not None:
                report.add(ReportItem.from_error(goal.name, goal.error))
        for name in workspace.proofs:
            report.add(_proof_item(workspace, name, entries_only))
        # Rejections must fail with the expected error code
        for reject in workspace.rejects:
            if reject.satisfied:
                report.add(ReportItem(name=reject.name, span=reject.span, detail=f"rejected with {reject.actual}"))
            else:
                report.add(
                    ReportItem(
                        name=reject.name,
                        status=Status.PROOF_ERROR,
                        error_code=reject.actual or "Accepted",
                        span=reject.span,
                        detail=f"expected rejection with {reject.expected}, got {reject.actual or 'acceptance'}",
                    )
                )
        # Equality and normal form expectations
        for expectation in workspace.expectations:
            try:
                report.add(_check_expectation(workspace, expectation, config))
            except DoctrinaError as e:
                report.add(ReportItem.from_error(_expectation_name(expectation), e))
    _finish(ctx, report, report_format)


@main.command("search")
@click.argument("file", type=click.Path(exists=True))
@click.option("--goal", "goal_name", required=True, help="Name of the goal to prove")
@click.option("--depth", type=int, default=None, help="Maximum rule depth")
@click.option("--cut-depth", type=int, default=None, help="Maximum number of nested cuts")
@click.option("--nodes", type=int, default=None, help="Maximum search nodes")
@output_options
@click.pass_context
def search_command(ctx, file: str, goal_name: str, depth, cut_depth, nodes, report_format, entries_only):
    """Search for a derivation of a named goal."""
    report = Report("search")
    workspace, config = _load(ctx, file, report)
    if workspace is not None:
        try:
            goal = workspace.goal(goal_name)
            if goal.error is not None:
                raise goal.error
            # Command-line limits override the configured budget
            default = config.search_budget()
            budget = SearchBudget(
                max_depth=default.max_depth if depth is None else depth,
                max_cut_depth=default.max_cut_depth if cut_depth is None else cut_depth,
                max_nodes=default.max_nodes if nodes is None else nodes,
            )
            checker = workspace.checker(goal.sketch)
            conclusion = render_sequent(checker, goal.sequent, entries_only)
            found = search(workspace.sketch(goal.sketch), goal.sequent, budget)
            # Nothing found is a resource limit, not a disproof
            if found is None:
                report.add(
                    ReportItem(
                        name=goal_name,
                        status=Status.RESOURCE_LIMIT,
                        conclusion=conclusion,
                        error_code="ResourceLimit",
                        span=goal.span,
                        detail=f"no derivation within depth {budget.max_depth}, "
                        f"cut depth {budget.max_cut_depth}",
                    )
                )
            else:
                report.add(ReportItem(name=goal_name, conclusion=conclusion, span=goal.span, detail=format_term(found)))
        except DoctrinaError as e:
            report.add(ReportItem.from_error(goal_name, e))
    _finish(ctx, report, report_format)


@main.command("normalize")
@click.argument("file", type=click.Path(exists=True))
@click.option("--proof", "proof_name", required=True, help="Name of the proof to normalize")
@click.option("--strategy", type=click.Choice(STRATEGIES), default=None, help="Reduction strategy")
@click.option("--fuel", type=int, default=None, help="Maximum rewrite steps")
@output_options
@click.pass_context
def normalize_command(ctx, file: str, proof_name: str, strategy, fuel, report_format, entries_only):
    """Print the normal form of a named proof."""
    report = Report("normalize")
    workspace, config = _load(ctx, file, report)
    if workspace is not None:
        conclusion = ""
        try:
            record = workspace.proof(proof_name)
            d = workspace.derivation(proof_name)
            checker = workspace.checker(record.sketch)
            conclusion = render_sequent(checker, record.conclusion, entries_only)
            # Normalize
            rewrite = config.get_section("rewrite")
            nf = normalize(
                workspace.sketch(record.sketch),
                d,
                fuel=int(rewrite["fuel"]) if fuel is None else fuel,
                strategy=strategy or rewrite["strategy"],
                checker=checker,
            )
            report.add(ReportItem(name=proof_name, conclusion=conclusion, span=record.span, detail=format_term(nf)))
        except FuelExhausted as e:
            # Show how far normalization got
            item = ReportItem.from_error(proof_name, e, conclusion=conclusion)
            if e.partial is not None:
                item.detail = f"{e.message}; last form {format_term(e.partial)}"
            report.add(item)
        except DoctrinaError as e:
            report.add(ReportItem.from_error(proof_name, e, conclusion=conclusion))
    _finish(ctx, report, report_format)


@main.command("eq")
@click.argument("file", type=click.Path(exists=True))
@click.option("--lhs", required=True, help="Name of the first proof")
@click.option("--rhs", required=True, help="Name of the second proof")
@click.option("--depth", type=int, default=None, help="Maximum eta-expansion depth")
@output_options
@click.pass_context
def eq_command(ctx, file: str, lhs: str, rhs: str, depth, report_format, entries_only):
    """Compare two proofs: exit 0 when equal, 1 when not, 3 when undecided."""
    report = Report("eq")
    workspace, config = _load(ctx, file, report)
    name = f"{lhs} = {rhs}"
    if workspace is not None:
        try:
            record = workspace.proof(lhs)
            d1 = workspace.derivation(lhs)
            d2 = workspace.derivation(rhs)
            # Equality budget, with the depth override
            budget = config.equality_budget()
            if depth is not None:
                budget["depth"] = depth
            checker = workspace.checker(record.sketch)
            verdict = equal(workspace.sketch(record.sketch), d1, d2, checker=checker, **budget)
            conclusion = render_sequent(checker, record.conclusion, entries_only)
            # Undecided comparisons exit with 3
            if verdict is EqVerdict.EQUAL:
                report.add(ReportItem(name=name, conclusion=conclusion, detail=verdict.value))
            else:
                report.add(
                    ReportItem(
                        name=name,
                        status=Status.PROOF_ERROR if verdict is EqVerdict.NOT_EQUAL else Status.UNKNOWN,
                        conclusion=conclusion,
                        error_code="NotEqual" if verdict is EqVerdict.NOT_EQUAL else "Unknown",
                        detail=verdict.value,
                    )
                )
        except DoctrinaError as e:
            report.add(ReportItem.from_error(name, e))
    _finish(ctx, report, report_format)


@main.command("enumerate")
@click.argument("file", type=click.Path(exists=True))
@click.option("--types", "types_mode", is_flag=True, help="Enumerate the type strata")
@click.option("--height", type=int, default=2, help="Highest type stratum (with --types)")
@click.option("--hom", "hom", default=None, help="Goal name or sequent whose hom-set to enumerate")
@click.option("--size", type=int, default=None, help="Largest derivation size (with --hom)")
@click.option("--sketch", "sketch_name", default=None, help="Sketch to use (default: last declared)")
@click.option("--partial", is_flag=True, help="Report what was found when the derivation cap is hit")
@output_options
@click.pass_context
def enumerate_command(ctx, file, types_mode, height, hom, size, sketch_name, partial, report_format, entries_only):
    """Enumerate types by height, or a hom-set up to equality."""
    report = Report("enumerate")
    # Exactly one mode
    if types_mode == (hom is not None):
        click.echo("Error: give exactly one of --types or --hom", err=True)
        sys.exit(1)
    workspace, config = _load(ctx, file, report)
    if workspace is not None:
        try:
            if types_mode:
                _enumerate_types(workspace, config, sketch_name, height, report)
            else:
                _enumerate_hom(workspace, config, sketch_name, hom, size, partial, entries_only, report)
        except DoctrinaError as e:
            report.add(ReportItem.from_error(hom or "types", e))
    _finish(ctx, report, report_format)


def _enumerate_types(workspace, config, sketch_name, height, report: Report) -> None:
    sketch = workspace.sketch(_pick_sketch(workspace, sketch_name))
    strata = enumerate_types(sketch, height, int(config.get_budget("types", "ceiling", 1_000_000)))
    for t in strata.top:
        report.add(ReportItem(name=str(t)))
    report.footer = [f"T{level}: {count}" for level, count in enumerate(strata.counts)]


def _enumerate_hom(workspace, config, sketch_name, hom, size, partial, entries_only, report: Report) -> None:
    # Named goal or inline sequent
    if hom in workspace.goals:
        goal = workspace.goal(hom)
        if goal.error is not None:
            raise goal.error
        sketch_name, sequent = goal.sketch, goal.sequent
    else:
        sketch_name = _pick_sketch(workspace, sketch_name)
        sequent = elaborate_sequent(workspace.checker(sketch_name), parse_sequent(hom))
    limits = config.enumeration_limits()
    checker = workspace.checker(sketch_name)
    result = enumerate_homset(
        workspace.sketch(sketch_name),
        sequent,
        limits["hom_size"] if size is None else size,
        max_derivations=limits["max_derivations"],
        equality=config.equality_budget(),
        checker=checker,
        partial=partial,
    )
    # One item per class, then the pairs left undecided
    conclusion = render_sequent(checker, sequent, entries_only)
    for index, d in enumerate(result.classes):
        report.add(ReportItem(name=f"class {index}", conclusion=conclusion, detail=format_term(d)))
    for a, b in result.unknown_pairs:
        report.add(
            ReportItem(
                name=f"classes {a}, {b}",
                status=Status.UNKNOWN,
                error_code="Unknown",
                detail="not separated within the equality budget",
            )
        )
    report.footer = [
        f"classes: {len(result.classes)}",
        f"exhaustive: {'yes' if result.exhaustive else 'no'}",
    ]


@main.command("translate")
@click.argument("file", type=click.Path(exists=True))
@click.option("--map", "map_name", required=True, help="Name of the doctrine map")
@click.option("--sketch", "sketch_name", default=None, help="Translate only this sketch")
@output_options
@click.pass_context
def translate_command(ctx, file, map_name, sketch_name, report_format, entries_only):
    """Translate every proof over the map's source doctrine along a doctrine map."""
    report = Report("translate")
    workspace, _ = _load(ctx, file, report)
    if workspace is not None:
        try:
            m = workspace.map(map_name)
            # Every sketch over the source doctrine unless one is named
            names = [sketch_name] if sketch_name else [
                name for name, s in workspace.sketches.items() if s.doctrine.name == m.source.name
            ]
            for name in names:
                source = workspace.sketch(name)
                # Push the sketch first so images check against it
                target = push_sketch(m, source)
                target_checker = Checker(target)
                for proof, d in workspace.proofs_in(name).items():
                    try:
                        image = translate_derivation(m, source, d, target)
                        conclusion = render_sequent(target_checker, target_checker.check(image), entries_only)
                        report.add(ReportItem(name=proof, conclusion=conclusion, detail=format_term(image)))
                    except DoctrinaError as e:
                        # Keep going with the other proofs
                        report.add(ReportItem.from_error(proof, e))
        except DoctrinaError as e:
            report.add(ReportItem.from_error(map_name, e))
    _finish(ctx, report, report_format)


@main.command("builtins")
@output_options
@click.pass_context
def builtins(ctx, report_format, entries_only):
    """List the builtin base theories and doctrines with their cone signatures."""
    report = Report("builtins")
    # Bases first, then doctrines
    for name, base in sorted(BUILTIN_BASES.items()):
        sorts = ", ".join(f"{s.name}:{s.linearity.value}" for s in base.sorts)
        report.add(ReportItem(name=f"base {name}", detail=sorts))
    for name, doctrine in sorted(BUILTIN_DOCTRINES.items()):
        cones = "\n      ".join(cone.signature() for cone in doctrine.cones)
        report.add(ReportItem(name=f"doctrine {name} over {doctrine.base.name}", detail=cones))
    _finish(ctx, report, report_format)


if __name__ == "__main__":
    main()
