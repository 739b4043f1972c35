"""Theorem cases stored as text stanzas, and the runner that checks them.

A suite file holds ``let NAME = expr`` macros and ``case NAME`` stanzas::

    case curv-E
    lhs: dH(dH(E))
    rhs: bracket(F, E)
    mode: exact
    provenance: squared horizontal derivative is linear in the curvature

Indented lines continue the previous key.  Lines starting with ``#`` are
comments.
"""
from __future__ import annotations

import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Iterator, Optional

from . import calculus as calc
from .algebra import DEFAULT_REGISTRY, AlgebraError, Expression, Registry
from .dsl import DSLError, parse, pretty, tokenize

MODES = ("exact", "onshell", "flat", "vertical")
SUITE_SUFFIX = ".suite"
SUITE_DIR_ENV = "FSFORMS_SUITE_DIR"


class SuiteError(Exception):
    """Malformed suite file or case."""


class UnknownSuiteError(SuiteError, KeyError):
    def __str__(self) -> str:
        return f"unknown suite {self.args[0]!r}"


@dataclass(frozen=True)
class TheoremCase:
    name: str
    lhs: str
    rhs: str
    mode: str = "exact"
    provenance: str = ""
    env: tuple = ()            # (name, source) macro definitions, in order
    expected: str = "equal"

    def __post_init__(self):
        if self.mode not in MODES:
            raise SuiteError(f"case {self.name}: unknown mode {self.mode!r}")


@dataclass
class CaseResult:
    name: str
    verdict: str
    residual: Optional[str]
    lhs_terms: int
    rhs_terms: int
    seconds: float
    mode: str
    provenance: str
    error: Optional[str] = None

    def to_dict(self, timings: bool = True) -> dict:
        out = {"name": self.name, "verdict": self.verdict, "mode": self.mode,
               "citations": [self.provenance] if self.provenance else [],
               "lhs_terms": self.lhs_terms, "rhs_terms": self.rhs_terms}
        if self.residual is not None:
            out["residual"] = self.residual
        if self.error is not None:
            out["error"] = self.error
        if timings:
            out["seconds"] = round(self.seconds, 6)
        return out


@dataclass
class Report:
    suite: str
    cases: list[CaseResult]
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    seed: Optional[int] = None
    seconds: float = 0.0

    @property
    def passed(self) -> int:
        return sum(c.verdict == "pass" for c in self.cases)

    @property
    def ok(self) -> bool:
        return self.passed == len(self.cases)

    def to_dict(self, timings: bool = True) -> dict:
        out = {"suite": self.suite,
               "cases": [c.to_dict(timings) for c in self.cases],
               "environment": environment()}
        if timings:
            out["timestamp"] = self.timestamp
            out["seconds"] = round(self.seconds, 6)
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    def to_text(self) -> str:
        lines = [f"suite {self.suite}: {self.passed}/{len(self.cases)} pass"]
        for c in self.cases:
            lines.append(f"  {c.verdict.upper():4} {c.name} [{c.mode}] "
                         f"({c.lhs_terms}|{c.rhs_terms} terms, {c.seconds:.3f}s)")
            if c.error:
                lines.append(f"       error: {c.error}")
            elif c.residual:
                lines.append(f"       residual: {c.residual}")
        return "\n".join(lines)


def environment() -> dict:
    from . import __version__
    return {"python": platform.python_version(), "implementation": platform.python_implementation(),
            "package": "fsforms", "version": __version__}


# ---------------------------------------------------------------------------
# loading


def suite_dir() -> Path:
    override = os.environ.get(SUITE_DIR_ENV)
    if override:
        return Path(override)
    return Path(str(resources.files("fsforms") / "suites"))


def available_suites(directory: Optional[Path] = None) -> list[str]:
    directory = directory or suite_dir()
    if not directory.is_dir():
        return []
    return sorted(p.name[: -len(SUITE_SUFFIX)] for p in directory.glob("*" + SUITE_SUFFIX))


def parse_suite(text: str, source: str = "<suite>") -> list[TheoremCase]:
    env: list[tuple[str, str]] = []
    cases: list[TheoremCase] = []
    current: Optional[dict] = None
    last_key: Optional[str] = None

    def close():
        if current is None:
            return
        missing = {"lhs", "rhs"} - current.keys()
        if missing:
            raise SuiteError(f"{source}: case {current['name']} lacks {sorted(missing)}")
        cases.append(TheoremCase(current["name"], current["lhs"], current["rhs"],
                                 current.get("mode", "exact"), current.get("provenance", ""),
                                 tuple(env)))

    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        if raw[0] in " \t":
            if current is None or last_key is None:
                raise SuiteError(f"{source}:{lineno}: continuation without a key")
            current[last_key] += " " + raw.strip()
            continue
        line = raw.strip()
        if line.startswith("let "):
            name, eq, body = line[4:].partition("=")
            if not eq or not name.strip().isidentifier():
                raise SuiteError(f"{source}:{lineno}: malformed let")
            env.append((name.strip(), body.strip()))
            last_key = None
        elif line.startswith("case "):
            close()
            current = {"name": line[5:].strip()}
            last_key = None
            if any(c.name == current["name"] for c in cases):
                raise SuiteError(f"{source}:{lineno}: duplicate case {current['name']}")
        else:
            key, colon, value = line.partition(":")
            key = key.strip()
            if not colon or current is None or key not in ("lhs", "rhs", "mode", "provenance"):
                raise SuiteError(f"{source}:{lineno}: unexpected line {line!r}")
            current[key] = value.strip()
            last_key = key
    close()
    return cases


def load_suite(name: str, directory: Optional[Path] = None) -> list[TheoremCase]:
    directory = directory or suite_dir()
    path = directory / (name + SUITE_SUFFIX)
    if not path.is_file():
        raise UnknownSuiteError(name)
    return parse_suite(path.read_text(encoding="utf-8"), str(path))


# ---------------------------------------------------------------------------
# running


def build_env(case: TheoremCase, registry: Registry = DEFAULT_REGISTRY) -> dict:
    env: dict[str, Expression] = {}
    for name, src in case.env:
        try:
            env[name] = parse(src, registry, env)
        except DSLError as exc:
            raise SuiteError(f"case {case.name}: macro {name}: {exc}") from exc
    return env


def reduce(e: Expression, mode: str, ym: calc.YM) -> Expression:
    """Put one side into comparable form: curvature expanded, corners lifted,
    then the mode's substitution applied."""
    e = calc.lift_corners(calc.expand_curvature(e, ym))
    if mode == "onshell":
        e = calc.onshell_reduce(e, ym)
    elif mode == "flat":
        e = calc.flat_reduce(e, ym)
    elif mode == "vertical":
        e = calc.vertical_reduce(e, ym)
    return e


def compare(case: TheoremCase, rhs_source: Optional[str] = None,
            registry: Registry = DEFAULT_REGISTRY, env: Optional[dict] = None):
    """Return ``(lhs, rhs, residual)`` after reduction; raises on DSL errors."""
    env = build_env(case, registry) if env is None else env
    ym = calc.YM.of(registry)
    lhs = parse(case.lhs, registry, env)
    rhs = parse(case.rhs if rhs_source is None else rhs_source, registry, env)
    left, right = reduce(lhs, case.mode, ym), reduce(rhs, case.mode, ym)
    return lhs, rhs, left - right


def run_case(case: TheoremCase, registry: Registry = DEFAULT_REGISTRY) -> CaseResult:
    start = time.perf_counter()
    try:
        lhs, rhs, residual = compare(case, registry=registry)
    except (AlgebraError, SuiteError) as exc:
        return CaseResult(case.name, "fail", None, 0, 0, time.perf_counter() - start,
                          case.mode, case.provenance, error=f"case {case.name}: {exc}")
    ok = residual.is_zero()
    return CaseResult(case.name, "pass" if ok else "fail", None if ok else pretty(residual),
                      len(lhs.terms), len(rhs.terms), time.perf_counter() - start,
                      case.mode, case.provenance)


def run_cases(name: str, cases: list[TheoremCase], jobs: int = 1,
              registry: Registry = DEFAULT_REGISTRY) -> Report:
    start = time.perf_counter()
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda c: run_case(c, registry), cases))
    else:
        results = [run_case(c, registry) for c in cases]
    return Report(name, results, seconds=time.perf_counter() - start)


def run_suite(name: str, jobs: int = 1, directory: Optional[Path] = None) -> Report:
    return run_cases(name, load_suite(name, directory), jobs)


# ---------------------------------------------------------------------------
# mutation testing


def sign_mutants(source: str) -> Iterator[tuple[str, str]]:
    """Yield ``(label, mutated_source)`` for each single-sign edit of ``source``:
    every ``+``/``-`` token flipped, every numeric coefficient negated, and the
    whole expression negated."""
    for tok in tokenize(source):
        if tok.kind == "op" and tok.text in "+-":
            flipped = "-" if tok.text == "+" else "+"
            yield (f"flip {tok.text!r} at column {tok.column}",
                   source[: tok.pos] + flipped + source[tok.pos + 1:])
        elif tok.kind == "num":
            yield (f"negate {tok.text} at column {tok.column}",
                   source[: tok.pos] + f"(-{tok.text})" + source[tok.pos + len(tok.text):])
    yield ("negate rhs", f"-({source})")


@dataclass
class MutationResult:
    case: str
    label: str
    killed: bool
    equivalent: bool


def mutation_run(case: TheoremCase, registry: Registry = DEFAULT_REGISTRY) -> list[MutationResult]:
    """Check every sign mutant of the rhs.  Mutants that parse to the same
    expression as the original (e.g. negating a literal zero) are flagged
    ``equivalent`` and are not counted as survivors."""
    env = build_env(case, registry)
    original = parse(case.rhs, registry, env)
    out = []
    for label, src in sign_mutants(case.rhs):
        try:
            mutant = parse(src, registry, env)
        except AlgebraError:
            out.append(MutationResult(case.name, label, True, False))
            continue
        if mutant == original:
            out.append(MutationResult(case.name, label, False, True))
            continue
        _, _, residual = compare(case, src, registry, env)
        out.append(MutationResult(case.name, label, not residual.is_zero(), False))
    return out


if __name__ == "__main__":  # pragma: no cover
    for name in sys.argv[1:] or available_suites():
        print(run_suite(name).to_text())
