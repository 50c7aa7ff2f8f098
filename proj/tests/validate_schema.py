"""Run `chainrec analyze` on every config and validate the reports against the
published JSON schema, plus the quasi-attractor consistency rule."""

import argparse
import json
import pathlib
import subprocess
import sys

import jsonschema


def check_consistency(report):
    problems = []
    ids = {c["id"] for c in report["classes"]}
    has_out = {a for a, _ in report["condensation_edges"]}
    for a, b in report["condensation_edges"]:
        if a not in ids or b not in ids:
            problems.append(f"edge {a}->{b} names an unknown class")
    minimal = sorted(i for i in ids if i not in has_out)
    if sorted(report["quasi_attractors"]) != minimal:
        problems.append("quasi_attractors do not match condensation minimality")
    for c in report["classes"]:
        if c["quasi_attractor"] != (c["id"] in minimal):
            problems.append(f"class {c['id']}: quasi_attractor flag disagrees with the edges")
        if c["box_count"] != len(c["boxes"]):
            problems.append(f"class {c['id']}: box_count != len(boxes)")
    for o in report["periodic_orbits"]:
        if o["class_id"] not in ids:
            problems.append(f"orbit {o['id']} names an unknown class")
        if len(o["points"]) != o["period"]:
            problems.append(f"orbit {o['id']}: period != number of points")
    return problems


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    ap.add_argument("--schema", required=True)
    ap.add_argument("--configs", required=True)
    ap.add_argument("--workdir", required=True)
    args = ap.parse_args()

    schema = json.loads(pathlib.Path(args.schema).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    work = pathlib.Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)

    failures = 0
    configs = sorted(pathlib.Path(args.configs).glob("*.json"))
    if not configs:
        print("no configs found", file=sys.stderr)
        return 1
    for cfg in configs:
        out = work / (cfg.stem + ".report.json")
        proc = subprocess.run([args.cli, "analyze", "--config", str(cfg), "--out", str(out)],
                              capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"FAIL {cfg.name}: exit {proc.returncode}: {proc.stderr.strip()}")
            failures += 1
            continue
        report = json.loads(out.read_text())
        errors = [e.message for e in validator.iter_errors(report)]
        errors += check_consistency(report)
        if errors:
            failures += 1
            print(f"FAIL {cfg.name}:")
            for e in errors[:10]:
                print(f"  {e}")
        else:
            print(f"ok   {cfg.name}: {len(report['classes'])} classes, "
                  f"{len(report['periodic_orbits'])} orbits")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
