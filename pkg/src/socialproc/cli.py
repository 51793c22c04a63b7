"""Command-line front end: validation, scenario runs, inspection, serving.

Scenario files drive a fresh process through an ordered step list, each
step carrying an expectation (``ok``, ``error:<CODE>``, or a marking to
land on). Exit codes: 0 success, 1 scenario or validation failure,
2 I/O or usage error. Diagnostics go to stderr; ``--json`` switches the
reports to machine form.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .adaptation import record_from_dict
from .engine import enabled_activities, fire, instantiate
from .environment import PERSON, ImplementedResource, SocialEnvironment, validate_environment_doc
from .errors import EngineError
from .implementation import implemented_from_dict, implemented_from_full_dict, manual_action
from .interchange import process_from_dict
from .library import FileStore, load_artifact, validate_document
from .model import protocol_from_dict, validate_abstract_protocol
from .report import ValidationReport


def _fail(message: str, exit_code: int = 2) -> "NoReturn":  # noqa: F821
    click.echo(f"error: {message}", err=True)
    sys.exit(exit_code)


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        _fail(f"cannot read {path}: {exc}")


def _detect_kind(doc: dict) -> str:
    if "interaction" in doc and "network" in doc:
        return "abstract"
    if "abstract_protocol_id" in doc or "abstract" in doc:
        return "implemented"
    if "implemented_protocol_id" in doc:
        return "process"
    if "resources" in doc and "relations" in doc:
        return "environment"
    _fail("cannot detect document kind (abstract/implemented/process/environment)")


def _print_report(report: ValidationReport, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps(report.to_dict(), indent=2))
        return
    if not report.violations:
        click.echo("valid")
        return
    width = max(len(v.rule) for v in report.violations)
    for v in report.violations:
        click.echo(f"{v.severity:5}  {v.rule:{width}}  {v.element}: {v.message}")


@click.group()
def main() -> None:
    """Engine for social protocols: validate, run, inspect, serve."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--kind", type=click.Choice(["abstract", "implemented", "process", "environment"]))
@click.option("--json", "as_json", is_flag=True, help="machine-readable report")
def validate(file: str, kind: str | None, as_json: bool) -> None:
    """Validate an interchange document and report violations."""
    doc = _load_json(file)
    kind = kind or _detect_kind(doc)
    if kind == "abstract":
        report = validate_abstract_protocol(protocol_from_dict(doc))
    elif kind == "environment":
        report = validate_environment_doc(doc)
    else:
        report = validate_document(kind, doc)
    _print_report(report, as_json)
    sys.exit(0 if report.ok else 1)


def _scenario_environment(doc: dict) -> SocialEnvironment:
    if "environment_file" in doc:
        return SocialEnvironment.from_dict(_load_json(doc["environment_file"]))
    if "environment" in doc:
        return SocialEnvironment.from_dict(doc["environment"])
    # No environment given: synthesize the assigned people.
    env = SocialEnvironment()
    for members in doc.get("assignment", {}).values():
        for member in members:
            env.ensure_resource(ImplementedResource(id=member, kind=PERSON, label=member))
    return env


def _scenario_protocol(doc: dict, env: SocialEnvironment):
    from .implementation import implement_protocol

    if "abstract_protocol_file" in doc:
        abstract = protocol_from_dict(_load_json(doc["abstract_protocol_file"]))
    elif "abstract_protocol" in doc:
        abstract = protocol_from_dict(doc["abstract_protocol"])
    else:
        _fail("scenario needs abstract_protocol or abstract_protocol_file")
    report = validate_abstract_protocol(abstract)
    if not report.ok:
        _fail(f"scenario protocol invalid: {', '.join(report.rules())}")
    activity_map = {
        aid: manual_action() for aid in abstract.interaction.activity_ids()
    }
    if "activity_map" in doc:
        ref = implemented_from_dict(
            {"id": "scenario-impl", "activity_map": doc["activity_map"],
             "resource_map": doc.get("resource_map", {})},
            abstract,
        )
        activity_map = ref.activity_map
    new_resources = [
        ImplementedResource(
            id=r["id"], kind=r["kind"], label=r.get("label", ""), locator=r.get("locator")
        )
        for r in doc.get("new_resources", [])
    ]
    return implement_protocol(
        abstract,
        doc.get("resource_map", {}),
        activity_map,
        env,
        new_resources=new_resources,
        protocol_id="scenario-impl",
    )


def _check_expectation(expect, error: EngineError | None, marking: set[str]) -> tuple[bool, str]:
    if isinstance(expect, dict) and "marking" in expect:
        if error is not None:
            return False, f"expected marking {sorted(expect['marking'])}, got error {error.code}"
        if set(expect["marking"]) != marking:
            return False, f"expected marking {sorted(expect['marking'])}, got {sorted(marking)}"
        return True, f"marking {sorted(marking)}"
    if expect == "ok" or expect is None:
        if error is not None:
            return False, f"expected ok, got error {error.code}"
        return True, "ok"
    if isinstance(expect, str) and expect.startswith("error:"):
        wanted = expect.split(":", 1)[1]
        if error is None:
            return False, f"expected error {wanted}, fire succeeded"
        if error.code != wanted:
            return False, f"expected error {wanted}, got {error.code}"
        return True, f"error {wanted}"
    return False, f"malformed expectation {expect!r}"


@main.command()
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@click.option("--save", type=click.Path(dir_okay=False), help="write the final process bundle")
def run(scenario: str, as_json: bool, save: str | None) -> None:
    """Execute a scenario file against a fresh process instance."""
    doc = _load_json(scenario)
    steps = doc.get("steps", [])
    if not steps:
        _fail("scenario has no steps")
    env = _scenario_environment(doc)
    protocol = _scenario_protocol(doc, env)
    try:
        process = instantiate(
            protocol,
            {role: set(m) for role, m in doc.get("assignment", {}).items()},
            env,
            process_id=doc.get("process_id", "p1"),
        )
    except EngineError as exc:
        _fail(f"cannot instantiate scenario process: {exc.code}: {exc}")

    results = []
    failed_at = None
    for index, step in enumerate(steps):
        error = None
        try:
            fire(process, step["actor"], step["activity"], payload=step.get("payload"))
        except EngineError as exc:
            error = exc
        passed, detail = _check_expectation(step.get("expect"), error, set(process.marking))
        results.append(
            {
                "step": index,
                "actor": step["actor"],
                "activity": step["activity"],
                "passed": passed,
                "detail": detail,
            }
        )
        if not passed:
            failed_at = index
            break

    if as_json:
        click.echo(
            json.dumps(
                {
                    "scenario": doc.get("name", scenario),
                    "passed": failed_at is None,
                    "failed_step": failed_at,
                    "results": results,
                    "final_marking": sorted(process.marking),
                    "status": process.status,
                },
                indent=2,
            )
        )
    else:
        for r in results:
            mark = "ok " if r["passed"] else "FAIL"
            click.echo(f"step {r['step']:2} {mark} fire({r['actor']}, {r['activity']}): {r['detail']}")
        click.echo(f"final marking: {sorted(process.marking)}  status: {process.status}")
    if save:
        from .interchange import process_to_dict

        bundle = {
            "process": process_to_dict(process),
            "implemented_protocol": process.protocol.to_full_dict(),
            "environment": env.to_dict(),
        }
        Path(save).write_text(json.dumps(bundle, indent=2, sort_keys=True))
    if failed_at is not None:
        click.echo(f"scenario failed at step {failed_at}", err=True)
        sys.exit(1)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--store", type=click.Path(file_okay=False), help="store to resolve the protocol from")
@click.option("--json", "as_json", is_flag=True)
def inspect(file: str, store: str | None, as_json: bool) -> None:
    """Print a process's marking, enabled-activity table, and trace.

    FILE is either a bundle (process + implemented_protocol) as written
    by `run --save`, or a bare process document plus --store.
    """
    doc = _load_json(file)
    if "process" in doc and "implemented_protocol" in doc:
        protocol = implemented_from_full_dict(doc["implemented_protocol"])
        process_doc = doc["process"]
    elif store:
        process_doc = doc
        file_store = FileStore(store)
        implemented_entry = load_artifact(
            file_store, "implemented", doc["implemented_protocol_id"]
        )
        abstract_entry = load_artifact(
            file_store, "abstract", implemented_entry.document["abstract_protocol_id"]
        )
        protocol = implemented_from_dict(
            implemented_entry.document, protocol_from_dict(abstract_entry.document)
        )
    else:
        _fail("need a bundle file or --store to resolve the protocol")
    try:
        process = process_from_dict(process_doc, protocol)
    except EngineError as exc:
        _fail(f"{exc.code}: {exc}")

    inbox = {}
    for member in sorted(process.assigned_collaborators()):
        inbox[member] = enabled_activities(process, member)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "id": process.id,
                    "status": process.status,
                    "marking": sorted(process.marking),
                    "enabled": inbox,
                    "trace_len": len(process.trace),
                },
                indent=2,
            )
        )
        return
    click.echo(f"process {process.id}  status={process.status}  marking={sorted(process.marking)}")
    click.echo("enabled activities:")
    for member, activities in inbox.items():
        click.echo(f"  {member:12} {', '.join(activities) if activities else '-'}")
    click.echo(f"trace ({len(process.trace)} entries):")
    for entry in process.trace:
        doc_entry = entry.to_dict()
        if doc_entry["kind"] == "fire":
            click.echo(
                f"  {doc_entry['seq']:3} fire {doc_entry['activity']} by {doc_entry['collaborator']}"
            )
        else:
            click.echo(f"  {doc_entry['seq']:3} adaptation {doc_entry['new_version'][:12]}")


@main.command()
@click.argument("env_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("person")
@click.option("--depth", default=2, show_default=True, help="maximum BFS distance")
@click.option("--exclude", multiple=True, help="person ids to skip (e.g. already assigned)")
@click.option("--json", "as_json", is_flag=True)
def substitutes(env_file: str, person: str, depth: int, exclude: tuple[str, ...], as_json: bool) -> None:
    """Rank substitute candidates for PERSON from an environment file."""
    env = SocialEnvironment.from_dict(_load_json(env_file))
    try:
        hits = env.find_substitutes(person, max_depth=depth, verbose=True)
    except EngineError as exc:
        _fail(f"{exc.code}: {exc}")
    hits = [h for h in hits if h.person not in set(exclude)]
    if as_json:
        click.echo(
            json.dumps(
                [
                    {"person": h.person, "distance": h.distance, "path": list(h.path)}
                    for h in hits
                ],
                indent=2,
            )
        )
        return
    if not hits:
        click.echo("no candidates")
        return
    for h in hits:
        click.echo(f"{h.person:12} distance {h.distance}  via {' -> '.join(h.path)}")


@main.command()
@click.option("--addr", default="127.0.0.1:8000", show_default=True)
@click.option("--store", type=click.Path(file_okay=False), help="artifact store directory")
@click.option("--demo", is_flag=True, help="preload the brainstorming fixture")
def serve(addr: str, store: str | None, demo: bool) -> None:
    """Run the HTTP service."""
    from .service import serve as _serve

    try:
        _serve(addr=addr, store_path=store, demo=demo)
    except OSError as exc:
        _fail(f"cannot bind {addr}: {exc}")


if __name__ == "__main__":
    main()
