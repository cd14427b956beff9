"""The documented commands run as written and land in their stated bands."""

import importlib
import json
import math
import re
import shlex
from pathlib import Path

import pytest

from gpsselect.cli import main

DOCS = Path(__file__).resolve().parent.parent / "docs"
README = DOCS.parent / "README.md"

COMMAND = re.compile(r"```sh\n(.*?)```", re.S)
CHECK = re.compile(r"<!-- check (\S+) (.*?) -->")
EXISTS = re.compile(r"<!-- exists (\S+) -->")
TERM = re.compile(r"^([\w.]+)(>=|<=|=)(\S+)$")


def _commands(text):
    return [line.strip() for block in COMMAND.findall(text)
            for line in block.splitlines() if line.strip().startswith("gpsselect ")]


def _parse_checks(text):
    """``[(file, key, op, value, tol)]`` from the check comments."""
    out = []
    prose = re.sub(r"```.*?```", "", text, flags=re.S)
    for fname, body in CHECK.findall(prose):
        tokens = body.split()
        opts = dict(t.split("=", 1) for t in tokens if t.startswith(("base=", "tol=")))
        base, tol = opts.get("base"), float(opts.get("tol", 0))
        for tok in tokens:
            if tok.startswith(("base=", "tol=")):
                continue
            m = TERM.match(tok)
            assert m, f"malformed check term {tok!r}"
            key, op, value = m.groups()
            out.append((fname, f"{base}.{key}" if base else key, op, value, tol))
    return out


def _lookup(doc, dotted):
    node = doc
    for part in dotted.split("."):
        node = node[int(part)] if isinstance(node, list) else node[part]
    return node


REPRO = (DOCS / "reproduce.md").read_text()
CHECKS = _parse_checks(REPRO)


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("repro")
    codes = {}
    with pytest.MonkeyPatch.context() as mp:
        mp.chdir(root)
        for cmd in _commands(REPRO):
            codes[cmd] = main(shlex.split(cmd)[1:])
    return root, codes


@pytest.mark.slow
def test_reproduce_commands_succeed(workdir):
    _, codes = workdir
    assert len(codes) >= 8
    assert {c: v for c, v in codes.items() if v != 0} == {}


@pytest.mark.slow
@pytest.mark.parametrize("fname,key,op,value,tol", CHECKS, ids=[f"{c[0]}:{c[1]}" for c in CHECKS])
def test_reproduce_band(workdir, fname, key, op, value, tol):
    root, _ = workdir
    got = _lookup(json.loads((root / fname).read_text()), key)
    try:
        target = float(value)
    except ValueError:
        assert got == value
        return
    if op == "=":
        assert math.isclose(got, target, abs_tol=tol), f"{key} = {got}, want {target} +- {tol}"
    elif op == ">=":
        assert got >= target, f"{key} = {got}"
    else:
        assert got <= target, f"{key} = {got}"


@pytest.mark.slow
@pytest.mark.parametrize("fname", EXISTS.findall(re.sub(r"```.*?```", "", REPRO, flags=re.S)))
def test_reproduce_files(workdir, fname):
    root, _ = workdir
    lines = [l for l in (root / fname).read_text().splitlines() if not l.startswith("#")]
    assert len(lines) > 10 and all(len(l.split()) == 2 for l in lines)


@pytest.mark.slow
def test_verify_invariants_hold(workdir):
    root, _ = workdir
    records = [json.loads(l) for l in (root / "verify.jsonl").read_text().splitlines()]
    assert records and all(r["passed"] for r in records if r["kind"] == "invariant")


def test_code_map_has_no_dangling_names():
    text = (DOCS / "algorithm.md").read_text()
    names = set(re.findall(r"`(gpsselect(?:\.\w+)+)`", text))
    assert len(names) > 10
    for dotted in sorted(names):
        mod, attr = dotted.rsplit(".", 1)
        assert hasattr(importlib.import_module(mod), attr), dotted


def test_cli_manual_lists_every_subcommand():
    text = (DOCS / "cli.md").read_text()
    for sub in ("fit", "simulate", "bench", "verify", "replay"):
        assert f"## {sub}" in text


@pytest.mark.parametrize("path", sorted(DOCS.glob("*.md")) + [README], ids=lambda p: p.name)
def test_prose_has_no_em_dashes(path):
    if path.exists():
        assert "\u2014" not in path.read_text()
