"""Command line front end: scenario files in, machine-readable reports out.

Scenario files are JSON documents with sections "dims", "functions",
"maps", "spaces", and "task"; every numeric literal is exact (integers,
decimal strings, or "p/q" rational strings).  Each command prints one
report document on standard output and exits with:

    0   every verdict passed
    1   a mathematical verdict failed under satisfied hypotheses (a bug)
    2   hypotheses unsatisfied (reported, not a failure)
    3   input error (unreadable file, bad field, dimension mismatch)

JSON reports are fully deterministic: keys sorted, exact rationals as
strings, a sha256 digest of the input instead of timestamps.
"""
import argparse
import hashlib
import json
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .convexfn import (
    AffineFunctional,
    H_FORM,
    PolyhedralFunction,
    SublinearFunctional,
    V_FORM,
    evaluate,
)
from .duality import DualityScenario, verify
from .geometry import AffineMap, Polytope
from .interiority import (
    SublevelQuery,
    boundedness_condition,
    corollary21_auto,
    interiority_margin,
    lemma19a_check,
    theorem20_equivalence,
)
from .numerics import (
    EXACT,
    FLOAT,
    NEG_INF,
    POS_INF,
    PreconditionError,
    StructuralError,
    Vec,
    comparison_slack,
    frac,
)
from .oracle import GridSpec, crosscheck_scenario
from .sandwich import (
    HypothesisViolated,
    SandwichInstance,
    check_separator,
    find_separator,
    hypothesis_check,
)

EXIT_PASS = 0
EXIT_MATH_FAILURE = 1
EXIT_HYPOTHESES = 2
EXIT_INPUT = 3

DUALITY_KINDS = (
    "sublevel", "trivariate", "fenchel", "quadrivariate",
    "bibivariate", "partial_infconv", "indicator_linear",
)


class ScenarioError(Exception):
    """Input problem tied to a specific field of the scenario file."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(message)


# ---------------------------------------------------------------------------
# exact number handling


def to_frac(value, field: str) -> Fraction:
    if isinstance(value, bool):
        raise ScenarioError(field, "expected a number, found a boolean")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ScenarioError(field, f"not an exact number: {value!r}") from None
    raise ScenarioError(field, f"expected a number, found {type(value).__name__}")


def to_vector(value, field: str) -> Vec:
    if not isinstance(value, list):
        raise ScenarioError(field, "expected a list of numbers")
    return tuple(to_frac(v, f"{field}[{i}]") for i, v in enumerate(value))


def to_int(value, field: str) -> int:
    f = to_frac(value, field)
    if f.denominator != 1:
        raise ScenarioError(field, f"expected an integer, found {f}")
    return int(f)


def encode_scalar(value):
    """Exact values as strings, floats as numbers, infinities by name."""
    if value is None or isinstance(value, bool):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if value == POS_INF:
            return "inf"
        if value == NEG_INF:
            return "-inf"
        return value
    raise TypeError(f"cannot encode {type(value).__name__}")


def encode_vector(v) -> Optional[list]:
    if v is None:
        return None
    return [encode_scalar(c) for c in v]


def encode_query(q: AffineFunctional) -> dict:
    return {"coeffs": encode_vector(q.coeffs), "constant": encode_scalar(q.constant)}


# ---------------------------------------------------------------------------
# scenario files


@dataclass(frozen=True)
class Scenario:
    """One parsed scenario file: named objects plus the raw task section."""

    dims: dict
    functions: dict
    maps: dict
    spaces: dict
    task: dict
    description: Optional[str]
    expect: Optional[dict]


def _section(doc: dict, name: str, default=None):
    value = doc.get(name, {} if default is None else default)
    if not isinstance(value, dict):
        raise ScenarioError(name, "section must be an object")
    return value


def _parse_function(name: str, body, field: str) -> PolyhedralFunction:
    if not isinstance(body, dict) or "form" not in body:
        raise ScenarioError(field, "a function needs a \"form\" key")
    form = body["form"]
    if form == "V":
        raw = body.get("samples")
        if not isinstance(raw, list) or not raw:
            raise ScenarioError(f"{field}.samples", "need a nonempty list of [point, value] pairs")
        samples = []
        for i, entry in enumerate(raw):
            where = f"{field}.samples[{i}]"
            if not isinstance(entry, list) or len(entry) != 2:
                raise ScenarioError(where, "each sample is a [point, value] pair")
            samples.append((to_vector(entry[0], where), to_frac(entry[1], where)))
        dim = len(samples[0][0])
        try:
            return PolyhedralFunction.v_form(dim, samples)
        except StructuralError as exc:
            raise ScenarioError(field, str(exc)) from None
    if form == "H":
        raw = body.get("pieces")
        if not isinstance(raw, list) or not raw:
            raise ScenarioError(f"{field}.pieces", "need a nonempty list of [coeffs, constant] pairs")
        pieces = []
        for i, entry in enumerate(raw):
            where = f"{field}.pieces[{i}]"
            if not isinstance(entry, list) or len(entry) != 2:
                raise ScenarioError(where, "each piece is a [coeffs, constant] pair")
            pieces.append((to_vector(entry[0], where), to_frac(entry[1], where)))
        dim = len(pieces[0][0])
        try:
            return PolyhedralFunction.h_form(dim, pieces)
        except StructuralError as exc:
            raise ScenarioError(field, str(exc)) from None
    raise ScenarioError(f"{field}.form", f"unknown form {form!r} (expected \"V\" or \"H\")")


def _parse_map(name: str, body, field: str) -> AffineMap:
    if not isinstance(body, dict) or "matrix" not in body:
        raise ScenarioError(field, "a map needs a \"matrix\" key")
    raw = body["matrix"]
    if not isinstance(raw, list):
        raise ScenarioError(f"{field}.matrix", "expected a list of rows")
    rows = [to_vector(r, f"{field}.matrix[{i}]") for i, r in enumerate(raw)]
    offset = None
    if "offset" in body:
        offset = to_vector(body["offset"], f"{field}.offset")
    in_dim = None
    if "in_dim" in body:
        in_dim = to_int(body["in_dim"], f"{field}.in_dim")
    try:
        return AffineMap.from_rows(rows, offset, in_dim)
    except StructuralError as exc:
        raise ScenarioError(field, str(exc)) from None


def _parse_space(name: str, body, field: str):
    if isinstance(body, dict) and "vector_space" in body:
        return to_int(body["vector_space"], f"{field}.vector_space")
    if isinstance(body, list):
        try:
            return Polytope.of([to_vector(v, f"{field}[{i}]") for i, v in enumerate(body)])
        except StructuralError as exc:
            raise ScenarioError(field, str(exc)) from None
    raise ScenarioError(field, "a space is a vertex list or {\"vector_space\": dim}")


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    try:
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            "document", f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(doc, dict):
        raise ScenarioError("document", "the top level must be an object")
    dims = {}
    for name, value in _section(doc, "dims").items():
        dims[name] = to_int(value, f"dims.{name}")
    functions = {}
    for name, body in _section(doc, "functions").items():
        functions[name] = _parse_function(name, body, f"functions.{name}")
    maps = {}
    for name, body in _section(doc, "maps").items():
        maps[name] = _parse_map(name, body, f"maps.{name}")
    spaces = {}
    for name, body in _section(doc, "spaces").items():
        spaces[name] = _parse_space(name, body, f"spaces.{name}")
    task = doc.get("task")
    if not isinstance(task, dict) or "kind" not in task:
        raise ScenarioError("task", "the task section needs a \"kind\" key")
    description = doc.get("description")
    expect = doc.get("expect")
    return Scenario(dims, functions, maps, spaces, task, description, expect)


def scenario_to_document(sc: Scenario) -> dict:
    """Canonical serialization; parsing it back reproduces the content."""
    doc = {}
    if sc.description is not None:
        doc["description"] = sc.description
    if sc.dims:
        doc["dims"] = dict(sorted(sc.dims.items()))
    if sc.functions:
        doc["functions"] = {}
        for name, f in sorted(sc.functions.items()):
            if f.form == V_FORM:
                body = {"form": "V", "samples": [
                    [encode_vector(p), encode_scalar(v)] for p, v in f.samples
                ]}
            else:
                body = {"form": "H", "pieces": [
                    [encode_vector(c), encode_scalar(k)] for c, k in f.pieces
                ]}
            doc["functions"][name] = body
    if sc.maps:
        doc["maps"] = {}
        for name, m in sorted(sc.maps.items()):
            doc["maps"][name] = {
                "matrix": [encode_vector(r) for r in m.linear],
                "offset": encode_vector(m.offset),
                "in_dim": m.in_dim,
            }
    if sc.spaces:
        doc["spaces"] = {}
        for name, s in sorted(sc.spaces.items()):
            if isinstance(s, int):
                doc["spaces"][name] = {"vector_space": s}
            else:
                doc["spaces"][name] = [encode_vector(v) for v in s.vertices]
    doc["task"] = _normalize_task(sc.task)
    if sc.expect is not None:
        doc["expect"] = sc.expect
    return doc


def _normalize_task(value):
    if isinstance(value, dict):
        return {k: _normalize_task(v) for k, v in sorted(value.items())}
    if isinstance(value, list):
        return [_normalize_task(v) for v in value]
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (int, Fraction, str)):
        try:
            return encode_scalar(to_frac(value, "task"))
        except ScenarioError:
            return value
    return value


# ---------------------------------------------------------------------------
# named lookups with diagnostics


def _named(sc: Scenario, section: str, name, field: str):
    table = getattr(sc, section)
    if not isinstance(name, str):
        raise ScenarioError(field, f"expected the name of an entry in \"{section}\"")
    if name not in table:
        raise ScenarioError(field, f"unknown {section[:-1]} name {name!r}")
    return table[name]


def _describe(sc: Scenario, name) -> str:
    if isinstance(name, str) and name in sc.functions:
        f = sc.functions[name]
        return f"function {name!r} (dimension {f.dim})"
    if isinstance(name, str) and name in sc.maps:
        m = sc.maps[name]
        return f"map {name!r} ({m.in_dim} -> {m.out_dim})"
    if isinstance(name, str) and name in sc.spaces:
        return f"space {name!r}"
    return repr(name)


def _task_queries(sc: Scenario) -> list:
    raw = sc.task.get("queries")
    if not isinstance(raw, list) or not raw:
        raise ScenarioError("task.queries", "need a nonempty list of queries")
    queries = []
    for i, q in enumerate(raw):
        where = f"task.queries[{i}]"
        if isinstance(q, dict):
            coeffs = to_vector(q.get("coeffs", []), f"{where}.coeffs")
            constant = to_frac(q.get("constant", 0), f"{where}.constant")
            queries.append(AffineFunctional(coeffs, constant))
        else:
            queries.append(to_vector(q, where))
    return queries


def _task_mode(sc: Scenario) -> str:
    return sc.task.get("hypothesis_mode", "boundedness")


def build_duality_scenario(sc: Scenario) -> DualityScenario:
    """Resolve task references into a scenario, naming objects on failure."""
    kind = sc.task["kind"]
    t = sc.task
    names = [t.get(k) for k in ("f", "g", "phi", "psi", "link", "a", "b", "c", "d")
             if t.get(k) is not None]
    try:
        if kind == "fenchel":
            return DualityScenario.fenchel(
                _named(sc, "functions", t.get("f"), "task.f"),
                _named(sc, "functions", t.get("g"), "task.g"),
                _named(sc, "maps", t.get("link"), "task.link"),
                _task_queries(sc), _task_mode(sc),
            )
        if kind == "sublevel":
            gamma = None
            if "gamma" in t:
                gamma = to_frac(t["gamma"], "task.gamma")
            return DualityScenario.sublevel(
                _named(sc, "functions", t.get("phi"), "task.phi"),
                _named(sc, "maps", t.get("b"), "task.b"),
                gamma, _task_mode(sc),
            )
        if kind == "trivariate":
            return DualityScenario.trivariate(
                _named(sc, "functions", t.get("psi"), "task.psi"),
                _named(sc, "maps", t.get("a"), "task.a"),
                _named(sc, "maps", t.get("b"), "task.b"),
                _task_queries(sc), _task_mode(sc),
            )
        if kind == "quadrivariate":
            raw = t.get("dims")
            if not isinstance(raw, list) or len(raw) != 4:
                raise ScenarioError("task.dims", "need the four block sizes [u, v, w, x]")
            blocks = [sc.dims[d] if isinstance(d, str) and d in sc.dims
                      else to_int(d, f"task.dims[{i}]") for i, d in enumerate(raw)]
            return DualityScenario.quadrivariate(
                _named(sc, "functions", t.get("psi"), "task.psi"),
                _named(sc, "maps", t.get("c"), "task.c"),
                _named(sc, "maps", t.get("d"), "task.d"),
                blocks, _task_queries(sc), _task_mode(sc),
            )
        if kind == "bibivariate":
            return DualityScenario.bibivariate(
                _named(sc, "functions", t.get("f"), "task.f"),
                _named(sc, "functions", t.get("g"), "task.g"),
                _named(sc, "maps", t.get("c"), "task.c"),
                _named(sc, "maps", t.get("d"), "task.d"),
                _task_queries(sc), _task_mode(sc),
            )
        if kind == "partial_infconv":
            x_dim = t.get("x_dim")
            if isinstance(x_dim, str) and x_dim in sc.dims:
                x_dim = sc.dims[x_dim]
            else:
                x_dim = to_int(x_dim, "task.x_dim")
            return DualityScenario.partial_infconv(
                _named(sc, "functions", t.get("f"), "task.f"),
                _named(sc, "functions", t.get("g"), "task.g"),
                x_dim, _task_queries(sc), _task_mode(sc),
            )
        if kind == "indicator_linear":
            return DualityScenario.indicator_linear(
                _named(sc, "functions", t.get("g"), "task.g"),
                _named(sc, "maps", t.get("c"), "task.c"),
                _named(sc, "maps", t.get("d"), "task.d"),
                _task_queries(sc), _task_mode(sc),
            )
    except StructuralError as exc:
        involved = ", ".join(_describe(sc, n) for n in names)
        raise ScenarioError("task", f"{exc} [objects: {involved}]") from None
    raise ScenarioError("task.kind", f"unknown task kind {sc.task['kind']!r}")


def build_sandwich_instance(sc: Scenario) -> SandwichInstance:
    t = sc.task
    upper = _named(sc, "functions", t.get("upper"), "task.upper")
    if upper.form != H_FORM:
        raise ScenarioError("task.upper", "the upper function must be in H form")
    for i, (coeffs, constant) in enumerate(upper.pieces):
        if constant != 0:
            raise ScenarioError(
                f"functions.{t['upper']}.pieces[{i}]",
                "sublinear upper functions need zero constants",
            )
    lower = _named(sc, "functions", t.get("lower"), "task.lower")
    link = _named(sc, "maps", t.get("link"), "task.link")
    space = None
    if t.get("space") is not None:
        space = _named(sc, "spaces", t["space"], "task.space")
        if isinstance(space, int):
            space = None
    try:
        return SandwichInstance(
            SublinearFunctional.of([c for c, _ in upper.pieces]), lower, link, space
        )
    except StructuralError as exc:
        involved = ", ".join(
            _describe(sc, t.get(k)) for k in ("upper", "lower", "link") if t.get(k)
        )
        raise ScenarioError("task", f"{exc} [objects: {involved}]") from None


# ---------------------------------------------------------------------------
# command runners: each returns (exit_code, report_body)


def run_verify(sc: Scenario, mode: str, tolerance, crosscheck: bool):
    kind = sc.task["kind"]
    if kind == "sandwich":
        return run_sandwich(sc, mode, tolerance)
    if kind == "interiority":
        return run_interiority(sc, mode, tolerance)
    s = build_duality_scenario(sc)
    slack = comparison_slack(mode, tolerance)
    try:
        reports = verify(s, mode, tolerance)
    except PreconditionError as exc:
        return EXIT_HYPOTHESES, {"kind": kind, "queries": [], "notes": [str(exc)]}
    checks = [None] * len(reports)
    if crosscheck:
        checks = crosscheck_scenario(s, GridSpec(3), mode, tolerance, reports)
    records = []
    code = EXIT_PASS
    for report, check in zip(reports, checks):
        record = {
            "query": encode_query(report.query),
            "lhs": encode_scalar(report.lhs),
            "rhs": encode_scalar(report.rhs),
            "gap": encode_scalar(report.gap),
            "witness": encode_vector(report.witness),
            "lhs_witness": encode_vector(report.lhs_witness),
            "attained": report.attained,
            "unbounded_direction": encode_vector(report.unbounded_direction),
            "hypothesis_flags": dict(sorted(report.hypothesis_flags.items())),
            "notes": list(report.notes),
        }
        gap_zero = abs(report.gap) <= slack
        if report.all_hypotheses_hold:
            finite = report.lhs not in (POS_INF, NEG_INF)
            if not gap_zero or (finite and not report.attained):
                record["verdict"] = "math_failure"
                code = EXIT_MATH_FAILURE
            else:
                record["verdict"] = "pass"
        else:
            record["verdict"] = "hypotheses_unsatisfied"
            if not gap_zero:
                record["notes"].append("equality not asserted; hypotheses unsatisfied")
            if code == EXIT_PASS:
                code = EXIT_HYPOTHESES
        if check is not None:
            oracle = check.lhs_oracle
            record["crosscheck"] = {
                "lhs_oracle": None if oracle is None else encode_scalar(oracle.value),
                "resolution": None if oracle is None else oracle.resolution,
                "bound": None if oracle is None else encode_scalar(oracle.bound),
                "lhs_ok": check.lhs_ok,
                "witness_ok": check.witness_ok,
                "scan_ok": check.scan_ok,
                "ok": check.ok,
                "notes": list(check.notes),
            }
            if not check.ok:
                record["verdict"] = "math_failure"
                code = EXIT_MATH_FAILURE
        records.append(record)
    return code, {"kind": kind, "queries": records}


def run_sandwich(sc: Scenario, mode: str, tolerance):
    inst = build_sandwich_instance(sc)
    check = hypothesis_check(inst, mode, tolerance)
    body = {
        "kind": "sandwich",
        "hypothesis": {
            "holds": check.holds,
            "minimum": encode_scalar(check.value),
            "witness": encode_vector(check.witness),
        },
    }
    if not check.holds:
        body["verdict"] = "hypotheses_unsatisfied"
        return EXIT_HYPOTHESES, body
    try:
        sep = find_separator(inst, mode, tolerance)
    except HypothesisViolated as exc:
        body["hypothesis"] = {
            "holds": False,
            "minimum": encode_scalar(exc.value),
            "witness": encode_vector(exc.witness),
        }
        body["verdict"] = "hypotheses_unsatisfied"
        return EXIT_HYPOTHESES, body
    valid = check_separator(inst, sep.x_prime, mode, tolerance)
    body["separator"] = {
        "x_prime": encode_vector(sep.x_prime),
        "margin": encode_scalar(sep.margin),
        "valid": valid,
    }
    body["verdict"] = "pass" if valid else "math_failure"
    return (EXIT_PASS if valid else EXIT_MATH_FAILURE), body


def run_interiority(sc: Scenario, mode: str, tolerance):
    t = sc.task
    phi = _named(sc, "functions", t.get("function"), "task.function")
    b_map = _named(sc, "maps", t.get("map"), "task.map")
    body = {"kind": "interiority"}
    code = EXIT_PASS

    try:
        if "gamma" in t:
            gamma = to_frac(t["gamma"], "task.gamma")
            q = SublevelQuery.build(phi, b_map, gamma)
            res = interiority_margin(q, mode, tolerance)
            body["margin"] = {
                "gamma": encode_scalar(gamma),
                "holds": res.holds,
                "margin": encode_scalar(res.margin),
                "level_used": encode_scalar(res.level_used),
            }
            if not res.holds:
                code = EXIT_HYPOTHESES
            if "delta" in t:
                delta = to_frac(t["delta"], "task.delta")
                probes = [to_vector(p, f"task.probes[{i}]")
                          for i, p in enumerate(t.get("probes", []))]
                if not probes:
                    raise ScenarioError("task.probes", "the covering check needs probes")
                cover = lemma19a_check(q, delta, probes, mode=mode, tolerance=tolerance)
                body["covering"] = {
                    "delta": encode_scalar(delta),
                    "ok": cover.ok,
                    "assignments": [
                        [encode_vector(p), i] for p, i in cover.assignments
                    ],
                }
                if not cover.ok:
                    code = EXIT_HYPOTHESES
        else:
            res = corollary21_auto(phi, b_map, mode, tolerance)
            body["margin"] = {
                "gamma": encode_scalar(res.gamma),
                "holds": res.margin.holds,
                "margin": encode_scalar(res.margin.margin),
                "level_used": encode_scalar(res.margin.level_used),
            }
        if "z0" in t:
            a_map = _named(sc, "maps", t.get("a"), "task.a")
            z0 = to_vector(t["z0"], "task.z0")
            delta = to_frac(t.get("delta", 1), "task.delta")
            bounded = boundedness_condition(phi, a_map, b_map, z0, delta,
                                            mode, tolerance)
            body["boundedness"] = {
                "z0": encode_vector(z0),
                "delta": encode_scalar(delta),
                "holds": bounded,
            }
            if not bounded:
                code = EXIT_HYPOTHESES
    except PreconditionError as exc:
        body["notes"] = [str(exc)]
        body["verdict"] = "hypotheses_unsatisfied"
        return EXIT_HYPOTHESES, body
    except StructuralError as exc:
        raise ScenarioError(
            "task",
            f"{exc} [objects: {_describe(sc, t.get('function'))}, "
            f"{_describe(sc, t.get('map'))}]",
        ) from None

    body["verdict"] = "pass" if code == EXIT_PASS else "hypotheses_unsatisfied"
    return code, body


def run_theorem20(sc: Scenario, mode: str, tolerance):
    t = sc.task
    phi = _named(sc, "functions", t.get("function"), "task.function")
    b_map = _named(sc, "maps", t.get("map"), "task.map")
    if "gamma" not in t:
        raise ScenarioError("task.gamma", "the equivalence check needs a level")
    gamma = to_frac(t["gamma"], "task.gamma")
    try:
        q = SublevelQuery.build(phi, b_map, gamma)
        res = theorem20_equivalence(q, mode, tolerance)
    except PreconditionError as exc:
        return EXIT_HYPOTHESES, {
            "kind": "theorem20",
            "notes": [str(exc)],
            "verdict": "hypotheses_unsatisfied",
        }
    except StructuralError as exc:
        raise ScenarioError(
            "task",
            f"{exc} [objects: {_describe(sc, t.get('function'))}, "
            f"{_describe(sc, t.get('map'))}]",
        ) from None
    agree = res.c24 == res.c25 == res.c26
    body = {
        "kind": "theorem20",
        "gamma": encode_scalar(gamma),
        "conditions": {
            "positive_margin": res.c24,
            "origin_in_image": res.c25,
            "fiber_below_level": res.c26,
        },
        "fiber_value": encode_scalar(res.fiber_value),
        "verdict": "pass" if agree else "math_failure",
    }
    return (EXIT_PASS if agree else EXIT_MATH_FAILURE), body


def run_conjugate(sc: Scenario, name: str, at: Vec, mode: str, tolerance):
    f = _named(sc, "functions", name, "--function")
    if len(at) != f.dim:
        raise ScenarioError(
            "--at",
            f"covector of dimension {len(at)} against {_describe(sc, name)}",
        )
    value = evaluate(f.conjugate(), at, mode, tolerance)
    body = {
        "kind": "conjugate",
        "function": name,
        "at": encode_vector(at),
        "value": encode_scalar(value),
    }
    if f.form == V_FORM and value not in (POS_INF, NEG_INF):
        best = max(f.samples, key=lambda s: sum(c * x for c, x in zip(at, s[0])) - s[1])
        body["witness"] = encode_vector(best[0])
    body["verdict"] = "pass"
    return EXIT_PASS, body


def run_eval(sc: Scenario, name: str, at: Vec, mode: str, tolerance):
    f = _named(sc, "functions", name, "--function")
    if len(at) != f.dim:
        raise ScenarioError(
            "--at",
            f"point of dimension {len(at)} against {_describe(sc, name)}",
        )
    value = evaluate(f, at, mode, tolerance)
    body = {
        "kind": "eval",
        "function": name,
        "at": encode_vector(at),
        "value": encode_scalar(value),
        "verdict": "pass",
    }
    return EXIT_PASS, body


def run_selftest(seed: int, mode: str, tolerance):
    from .randomgen import (
        random_crosscheck_scenario,
        random_fenchel_scenario,
        random_sandwich_instance,
        random_sublevel_query,
        random_trivariate_scenario,
        random_vform,
    )

    rng = random.Random(seed)
    suites = []

    def suite(name, runs, check):
        failures = 0
        for _ in range(runs):
            if not check():
                failures += 1
        suites.append({"name": name, "runs": runs, "failures": failures})
        return failures == 0

    ok = True

    def biconjugation():
        # f** is the closed convex envelope, so compare evaluations, not
        # raw sample values (dominated samples sit above the envelope)
        f = random_vform(rng, rng.randint(1, 3), max_samples=6)
        ff = f.conjugate().conjugate()
        return all(
            evaluate(ff, p, mode, tolerance) == evaluate(f, p, mode, tolerance)
            for p, _ in f.samples
        )

    ok &= suite("biconjugation", 10, biconjugation)

    def fenchel_gap():
        s = random_fenchel_scenario(rng)
        return all(r.gap == 0 and r.attained for r in verify(s, mode, tolerance))

    ok &= suite("fenchel_duality", 5, fenchel_gap)

    def trivariate_gap():
        s = random_trivariate_scenario(rng)
        return all(r.gap == 0 for r in verify(s, mode, tolerance))

    ok &= suite("trivariate_duality", 5, trivariate_gap)

    def sandwich_separator():
        inst, _ = random_sandwich_instance(rng, satisfy=True)
        sep = find_separator(inst, mode, tolerance)
        return check_separator(inst, sep.x_prime, mode, tolerance)

    ok &= suite("sandwich", 5, sandwich_separator)

    def equivalence():
        res = theorem20_equivalence(random_sublevel_query(rng), mode, tolerance)
        return res.c24 == res.c25 == res.c26

    ok &= suite("interiority_equivalence", 10, equivalence)

    def oracle_agreement():
        kind = rng.choice(("fenchel", "sublevel"))
        s = random_crosscheck_scenario(rng, kind)
        return all(c.ok for c in crosscheck_scenario(s, GridSpec(3), mode, tolerance))

    ok &= suite("oracle_crosscheck", 2, oracle_agreement)

    body = {
        "kind": "selftest",
        "seed": seed,
        "suites": suites,
        "verdict": "pass" if ok else "math_failure",
    }
    return (EXIT_PASS if ok else EXIT_MATH_FAILURE), body


# ---------------------------------------------------------------------------
# report documents


def _digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def make_document(command: str, digest: str, mode: str, code: int, body: dict) -> dict:
    doc = {
        "command": command,
        "input_digest": digest,
        "mode": mode,
        "version": __version__,
    }
    doc.update(body)
    if "verdict" not in doc:
        doc["verdict"] = {
            EXIT_PASS: "pass",
            EXIT_MATH_FAILURE: "math_failure",
            EXIT_HYPOTHESES: "hypotheses_unsatisfied",
            EXIT_INPUT: "input_error",
        }[code]
    return doc


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    lines = [f"{doc['command']}: verdict {doc['verdict']}"]
    for key in sorted(doc):
        if key in ("command", "verdict"):
            continue
        lines.append(f"  {key}: {_flat(doc[key])}")
    return "\n".join(lines) + "\n"


def _flat(value) -> str:
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}: {_flat(v)}" for k, v in sorted(value.items())) + "}"
    if isinstance(value, list):
        return "[" + ", ".join(_flat(v) for v in value) + "]"
    return str(value)


def _error_document(command: str, digest: str, mode: str, exc: ScenarioError) -> dict:
    return make_document(command, digest, mode, EXIT_INPUT, {
        "error": {"field": exc.field, "message": str(exc)},
        "verdict": "input_error",
    })


# ---------------------------------------------------------------------------
# dispatch


def _load(path: Path):
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ScenarioError("file", f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(data.decode("utf-8"), str(path)), _digest(data)


def _run_single(command: str, path: Path, args) -> tuple:
    digest = "sha256:" + "0" * 64
    try:
        sc, digest = _load(path)
        if command == "verify":
            code, body = run_verify(sc, args.mode, args.tolerance, args.crosscheck)
        elif command == "sandwich":
            if sc.task["kind"] != "sandwich":
                raise ScenarioError("task.kind", "the sandwich command needs a sandwich task")
            code, body = run_sandwich(sc, args.mode, args.tolerance)
        elif command == "interiority":
            code, body = run_interiority(sc, args.mode, args.tolerance)
        elif command == "theorem20":
            code, body = run_theorem20(sc, args.mode, args.tolerance)
        elif command == "conjugate":
            code, body = run_conjugate(sc, args.function, args.at, args.mode, args.tolerance)
        else:
            code, body = run_eval(sc, args.function, args.at, args.mode, args.tolerance)
        if sc.description is not None:
            body.setdefault("description", sc.description)
        return code, make_document(command, digest, args.mode, code, body)
    except ScenarioError as exc:
        return EXIT_INPUT, _error_document(command, digest, args.mode, exc)
    except RuntimeError as exc:
        body = {"error": {"field": None, "message": str(exc)}, "verdict": "math_failure"}
        return EXIT_MATH_FAILURE, make_document(command, digest, args.mode,
                                                EXIT_MATH_FAILURE, body)


def _run_batch(command: str, directory: Path, args) -> tuple:
    paths = sorted(p for p in directory.iterdir() if p.suffix == ".json")
    if not paths:
        raise ScenarioError("file", f"no scenario files in {directory}")
    with ThreadPoolExecutor(max_workers=min(8, len(paths))) as pool:
        results = list(pool.map(lambda p: _run_single(command, p, args), paths))
    files = []
    codes = []
    for path, (code, doc) in zip(paths, results):
        codes.append(code)
        entry = {"file": path.name, "exit": code}
        entry.update(doc)
        del entry["command"]
        files.append(entry)
    digest = _digest("".join(
        f"{p.name}:{e['input_digest']}\n" for p, e in zip(paths, files)
    ).encode("utf-8"))
    batch = EXIT_PASS
    for level in (EXIT_MATH_FAILURE, EXIT_INPUT, EXIT_HYPOTHESES):
        if level in codes:
            batch = level
            break
    doc = make_document(command, digest, args.mode, batch, {"files": files})
    return batch, doc


def _parse_at(text: str) -> Vec:
    parts = [p.strip() for p in text.split(",")] if text.strip() else []
    out = []
    for i, part in enumerate(parts):
        try:
            out.append(Fraction(part))
        except (ValueError, ZeroDivisionError):
            raise ScenarioError("--at", f"not an exact number: {part!r}") from None
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sandwichkit",
        description="Exact verification of polyhedral conjugation identities.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_file=True):
        if needs_file:
            p.add_argument("file", help="scenario file (or directory for batches)")
        p.add_argument("--mode", choices=(EXACT, FLOAT),
                       default=os.environ.get("SANDWICHKIT_MODE", EXACT))
        p.add_argument("--tolerance", default=None,
                       help="acceptance slack, float mode only")
        p.add_argument("--report", choices=("json", "text"), default="text")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--crosscheck", action="store_true",
                       help="attach independent grid-oracle runs")

    p = sub.add_parser("conjugate", help="evaluate a named function's conjugate")
    common(p)
    p.add_argument("--function", required=True)
    p.add_argument("--at", required=True, help="comma-separated exact covector")

    p = sub.add_parser("eval", help="evaluate a named function")
    common(p)
    p.add_argument("--function", required=True)
    p.add_argument("--at", required=True, help="comma-separated exact point")

    for name, text in (
        ("sandwich", "check the hypothesis and produce a separator"),
        ("verify", "verify the task's conjugation identity two-sidedly"),
        ("interiority", "margin, covering, and boundedness checks"),
        ("theorem20", "three-way interiority equivalence at a level"),
    ):
        p = sub.add_parser(name, help=text)
        common(p)

    p = sub.add_parser("selftest", help="run the random property suites")
    common(p, needs_file=False)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    mode = args.mode
    if mode not in (EXACT, FLOAT):
        mode = EXACT
    tolerance = None
    try:
        if args.tolerance is not None:
            if mode == EXACT:
                raise ScenarioError("--tolerance", "tolerance applies to float mode only")
            tolerance = frac(args.tolerance)
    except (ValueError, ZeroDivisionError):
        exc = ScenarioError("--tolerance", f"not an exact number: {args.tolerance!r}")
        doc = _error_document(args.command, "sha256:" + "0" * 64, mode, exc)
        sys.stdout.write(render(doc, args.report))
        return EXIT_INPUT
    except ScenarioError as exc:
        doc = _error_document(args.command, "sha256:" + "0" * 64, mode, exc)
        sys.stdout.write(render(doc, args.report))
        return EXIT_INPUT
    args.tolerance = tolerance
    args.mode = mode

    if args.command == "selftest":
        code, body = run_selftest(args.seed, mode, tolerance)
        doc = make_document("selftest", _digest(f"seed:{args.seed}".encode()),
                            mode, code, body)
        sys.stdout.write(render(doc, args.report))
        return code

    try:
        if args.command in ("conjugate", "eval"):
            args.at = _parse_at(args.at)
        path = Path(args.file)
        if path.is_dir():
            if args.command != "verify":
                raise ScenarioError("file", "directory batches run under verify only")
            code, doc = _run_batch(args.command, path, args)
        else:
            code, doc = _run_single(args.command, path, args)
    except ScenarioError as exc:
        doc = _error_document(args.command, "sha256:" + "0" * 64, mode, exc)
        code = EXIT_INPUT
    sys.stdout.write(render(doc, args.report))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
