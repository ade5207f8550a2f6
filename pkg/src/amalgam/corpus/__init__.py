"""Curated examples with their expected verdicts.

The manifest (``data/manifest.json``) lists one entry per example: the files
it needs, the command to run and the expected tag, one of ``Witness``,
``ExhaustedNo``, ``NoUpToBound`` (optionally with the bound, as in
``NoUpToBound(2)``) or ``Error(<exception name>)``.
"""
from __future__ import annotations

import fnmatch
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

from ..construct import amalgamate, merge_shared_transitive
from ..dsl import load_theory
from ..errors import AmalgamError, CorpusFileMissing
from ..io import load_triple
from ..search import (
    NO_UP_TO_BOUND, SearchBudget, decide_bounded, decide_into_union, search_counterexample,
)

TAGS = ("Witness", "ExhaustedNo", "NoUpToBound")
COMMANDS = ("decide", "amalgamate", "merge-shared", "search")


def data_dir():
    return str(resources.files(__package__) / "data")


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    cite: str
    command: str
    expected: str
    files: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        tag = self.expected.split("(")[0]
        if tag not in TAGS and tag != "Error":
            raise ValueError(f"{self.name}: unknown expected tag {self.expected!r}")
        if self.command not in COMMANDS:
            raise ValueError(f"{self.name}: unknown command {self.command!r}")


_FILE_KEYS = ("theory", "triple", "parts")


def load_manifest(path=None):
    path = path or os.path.join(data_dir(), "manifest.json")
    if not os.path.exists(path):
        raise CorpusFileMissing(path)
    base = os.path.dirname(path)
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    entries = []
    for item in raw:
        item = dict(item)
        files = {}
        for key in _FILE_KEYS:
            if key not in item:
                continue
            val = item.pop(key)
            paths = [os.path.join(base, v) for v in (val if isinstance(val, list) else [val])]
            for p in paths:
                if not os.path.exists(p):
                    raise CorpusFileMissing(p)
            files[key] = paths if isinstance(val, list) else paths[0]
        name, cite = item.pop("name"), item.pop("cite", "")
        command, expected = item.pop("command"), item.pop("expected")
        entries.append(CorpusEntry(name, cite, command, expected, files, item))
    return entries


def select(entries, pattern=None):
    if not pattern:
        return list(entries)
    if any(ch in pattern for ch in "*?["):
        return [e for e in entries if fnmatch.fnmatchcase(e.name, pattern)]
    return [e for e in entries if pattern in e.name]


def _decide(entry, th, t):
    prop = entry.options["property"]
    extra = entry.options.get("extra")
    if prop in ("sapu", "apu"):
        return decide_into_union(t, th, strong=prop == "sapu")
    if prop in ("sap", "ap"):
        return decide_bounded(t, th, strong=prop == "sap",
                              budget=SearchBudget(max_extra_elements=extra))
    raise ValueError(f"unsupported property {prop!r}")


def _check_witness(entry, d):
    """Extra assertions on a witness; returns a problem description or None."""
    for r, tuples in entry.options.get("expect_tuples", {}).items():
        missing = [t for t in tuples if tuple(t) not in d.rel(r)]
        if missing:
            return f"missing {r} tuples {missing}"
    low = entry.options.get("min_size")
    if low is not None and d.size < low:
        return f"witness has {d.size} elements, expected at least {low}"
    return None


def run_entry(entry):
    """(tag, detail) for one entry; library errors become ``Error(<name>)``."""
    try:
        if entry.command == "search":
            th = load_theory(entry.files["theory"])
            budget = SearchBudget(max_extra_elements=entry.options.get("extra", 2))
            got = search_counterexample(th, entry.options["max_c"], entry.options["max_side"],
                                        budget)
            if got is None:
                return "none", "no counterexample within the bounds"
            t, dec = got
            return str(dec), f"|C|={t.c.size} |A|={t.a.size} |B|={t.b.size}"
        t = load_triple(entry.files["triple"])
        if entry.command == "merge-shared":
            parts = [load_theory(p) for p in entry.files["parts"]]
            res = merge_shared_transitive(t, [(p.signature, p) for p in parts],
                                          entry.options["shared"])
            return "Witness", _check_witness(entry, res.d) or f"size {res.d.size}"
        th = load_theory(entry.files["theory"])
        if entry.command == "amalgamate":
            res = amalgamate(t, th, entry.options.get("method", "auto"))
            problem = _check_witness(entry, res.d)
            return ("Mismatch", problem) if problem else ("Witness", f"size {res.d.size}")
        dec = _decide(entry, th, t)
        if dec.witness is not None:
            problem = _check_witness(entry, dec.witness.d)
            if problem:
                return "Mismatch", problem
            return str(dec), f"size {dec.witness.d.size}"
        return str(dec), ""
    except AmalgamError as exc:
        return f"Error({type(exc).__name__})", str(exc)


def matches(expected, got):
    if "(" in expected or got.startswith("Error"):
        return expected == got
    return got.split("(")[0] == expected


@dataclass
class CorpusRow:
    entry: CorpusEntry
    got: str
    detail: str

    @property
    def passed(self):
        return matches(self.entry.expected, self.got)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}  {self.entry.name:<28} expected {self.entry.expected:<26} "
                f"got {self.got:<26} [{self.entry.cite}]")


@dataclass
class CorpusReport:
    rows: list

    @property
    def ok(self):
        return all(r.passed for r in self.rows)

    def text(self):
        lines = [r.line() for r in self.rows]
        passed = sum(r.passed for r in self.rows)
        lines.append(f"{passed}/{len(self.rows)} entries passed")
        return "\n".join(lines) + "\n"


def run_corpus(filter=None, manifest=None, workers=1):
    entries = select(load_manifest(manifest), filter)
    if workers and workers > 1 and len(entries) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_entry, entries))
    else:
        outcomes = [run_entry(e) for e in entries]
    return CorpusReport([CorpusRow(e, got, detail) for e, (got, detail) in zip(entries, outcomes)])


__all__ = ["CorpusEntry", "CorpusReport", "load_manifest", "run_corpus", "run_entry",
           "NO_UP_TO_BOUND"]
