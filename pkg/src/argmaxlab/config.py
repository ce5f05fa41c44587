"""Experiment configuration: JSON files with a versioned ``schema`` field.

Each experiment kind accepts a fixed set of fields; unknown fields and
ill-typed values are rejected before any computation starts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ArgmaxLabError

SCHEMA = "argmaxlab.config/1"

KINDS = (
    "pk-check",
    "corollary1a",
    "corollary1b",
    "corollary2",
    "corollary3-weak",
    "corollary3-semistrong",
    "value-convergence",
    "limit-sample",
)

PK_FAMILIES = ("remark3", "lemma2a", "lemma2b", "constant")
VALUE_FAMILIES = ("break", "boundary", "weakid")


class ConfigError(ArgmaxLabError, ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, message, field=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.field = field
        self.line = line


# field name -> (type tag, default); "req" marks required fields
_num = "number"
_int = "int"
_vec = "vector"
_mat = "matrix"
_str = "string"
_optnum = "number|null"
_list = "int-list"

COMMON = {
    "schema": (_str, SCHEMA),
    "kind": (_str, "req"),
    "seed": (_int, 20261016),
    "reps": (_int, 2000),
    "limit_draws": (_int, 100_000),
    "out": (_str, None),
    "threads": (_int, None),
    "description": (_str, ""),
}

BREAK_FIELDS = {
    "T": (_int, 2000),
    "beta": (_vec, [1.0, 1.0]),
    "delta0": (_vec, [1.0, 1.0]),
    "kappa": (_num, 0.25),
    "lambda1": (_num, 0.15),
    "lambda2": (_num, 0.85),
    "sigma": (_num, 1.0),
    "C": (_optnum, None),
    "step": (_num, 0.01),
}

BOUNDARY_FIELDS = {
    "n": (_int, 2000),
    "A": (_mat, [[-1.0]]),
    "g0": (_vec, None),
    "theta0": (_vec, None),
    "drift": (_vec, None),
    "sigma": (_num, 1.0),
}

WEAKID_FIELDS = {
    "n": (_int, 4000),
    "c": (_num, 1.0),
    "beta": (_num, None),
    "pi2": (_num, None),
    "sigma": (_num, 1.0),
    "grid_points": (_int, 2001),
    "rate_ns": (_list, [1000, 4000]),
    "rate_reps": (_int, 0),
}

SCHEMAS: dict[str, dict] = {
    "pk-check": {
        "family": (_str, "remark3"),
        "K": (_vec, None),
        "grid_step": (_num, None),
        "n_schedule": (_list, None),
        "a": (_num, -0.5),
        "tau": (_num, 0.5),
        "kappa": (_num, 0.25),
        "lambda1": (_num, 0.15),
        "lambda2": (_num, 0.85),
        "points": (_vec, [0.25, 0.5, 0.75]),
        "conv_tol": (_optnum, None),
    },
    "corollary1a": {**BREAK_FIELDS, "tau": (_num, 0.5)},
    "corollary1b": {**BREAK_FIELDS, "a": (_num, -1.0)},
    "corollary2": BOUNDARY_FIELDS,
    "corollary3-weak": {**WEAKID_FIELDS},
    "corollary3-semistrong": {**WEAKID_FIELDS},
    "limit-sample": {
        "delta0": (_vec, [1.0, 1.0]),
        "Omega1": (_mat, None),
        "Omega2": (_mat, None),
        "Q1": (_mat, None),
        "Q2": (_mat, None),
        "constraint": (_optnum, None),
        "C": (_optnum, None),
        "step": (_num, 0.01),
    },
}

# value-convergence fields depend on the family
VALUE_SCHEMAS: dict[str, dict] = {
    "break": {**BREAK_FIELDS, "tau": (_optnum, 0.5), "a": (_optnum, None)},
    "boundary": BOUNDARY_FIELDS,
    "weakid": {
        **{k: v for k, v in WEAKID_FIELDS.items() if k not in ("rate_ns", "rate_reps")},
        "regime": (_str, "weak"),
    },
}


def schema_for(kind: str, family: str | None = None) -> dict:
    """Field table for ``kind`` (and ``family`` for value-convergence)."""
    if kind == "value-convergence":
        fam = family or "break"
        if fam not in VALUE_SCHEMAS:
            raise ConfigError(f"unknown family; expected one of {', '.join(VALUE_FAMILIES)}", "family")
        return {"family": (_str, "break"), **VALUE_SCHEMAS[fam]}
    return SCHEMAS[kind]


ANCHORS = {
    "pk-check": "numeric Painleve-Kuratowski limits of set sequences (directed-distance characterization)",
    "corollary1a": "break-date argmax over the full line: v_T^2(k_hat - k0) => argmax_{s in R} M(s)",
    "corollary1b": "break date outside the trimming window: v_T^2(k_hat - k0) => argmax over the constraint (-inf, a] of M(s)",
    "corollary2": "boundary-constrained estimator: sqrt(n)(theta_hat - theta_n) => argmax over the linearized set Lambda = {b + G h <= 0}",
    "corollary3-weak": "weak identification: (beta_hat, sqrt(n)(pi_hat - pi_n)) => argmax of M^W over Lambda^W = B^W x R^{d_pi}",
    "corollary3-semistrong": "semi-strong identification: (a_n(beta_hat - beta_n), sqrt(n)(pi_hat - pi_n)) => argmax over B^SS x R^{d_pi}",
    "value-convergence": "maximized objective: sup over Lambda_n of M_n => sup over Lambda of M",
    "limit-sample": "draws of the constrained argmax and supremum of the two-sided limit process M(s)",
}

FAMILY_TEXT = {
    "remark3": "Lambda_n = {1/n, 1 - 1/n} on K = [0, 1], also intersected with F = [0, 1/2] u {1}",
    "lemma2a": "v_T^2(Lambda_T - k0) with k0 = [tau T] on K = [-3, 3]",
    "lemma2b": "v_T^2(Lambda_T - k0) with k0 = [lambda2 T - a v_T^-2] on K = [-3, 3]",
    "constant": "a constant finite set ('points') on K = [0, 1]",
}


@dataclass
class ExperimentConfig:
    kind: str
    params: dict
    seed: int
    reps: int
    limit_draws: int
    out: str | None = None
    threads: int | None = None
    description: str = ""
    raw: dict = field(default_factory=dict)

    def get(self, key, default=None):
        v = self.params.get(key, default)
        return default if v is None else v


def _check_type(name, tag, value):
    if value is None:
        return None
    if tag == _str:
        if not isinstance(value, str):
            raise ConfigError("expected a string", name)
        return value
    if tag == _int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError("expected an integer", name)
        return value
    if tag in (_num, _optnum):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError("expected a number", name)
        if not math.isfinite(value):
            raise ConfigError("expected a finite number", name)
        return float(value)
    if tag in (_vec, _list):
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError("expected a list of numbers", name)
        if tag == _list:
            if not all(isinstance(v, int) for v in value):
                raise ConfigError("expected a list of integers", name)
            return list(value)
        return [float(v) for v in value]
    if tag == _mat:
        if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
            raise ConfigError("expected a list of rows", name)
        width = len(value[0])
        rows = []
        for r in value:
            if len(r) != width:
                raise ConfigError("matrix rows have unequal length", name)
            rows.append(_check_type(name, _vec, r))
        return rows
    raise ConfigError(f"unknown type tag {tag}", name)


def validate(obj: dict) -> ExperimentConfig:
    """Check ``obj`` against the schema of its kind and fill defaults."""
    if not isinstance(obj, dict):
        raise ConfigError("top level must be a JSON object")
    if "kind" not in obj:
        raise ConfigError("missing required field", "kind")
    kind = obj["kind"]
    if kind not in KINDS:
        raise ConfigError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", "kind")
    schema = obj.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise ConfigError(f"unsupported schema {schema!r}; expected {SCHEMA!r}", "schema")
    family = obj.get("family")
    if kind == "value-convergence" and family is not None and not isinstance(family, str):
        raise ConfigError("expected a string", "family")
    allowed = {**COMMON, **schema_for(kind, family)}
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown field(s) for kind {kind}: {', '.join(unknown)}", unknown[0])
    values = {}
    for name, (tag, default) in allowed.items():
        if name in obj:
            values[name] = _check_type(name, tag, obj[name])
        elif default == "req":
            raise ConfigError("missing required field", name)
        else:
            values[name] = default
    for name in ("reps", "limit_draws"):
        if values[name] < 1 and not (name == "reps" and kind in ("pk-check", "limit-sample")):
            raise ConfigError("must be at least 1", name)
    if values["seed"] < 0 or values["seed"] >= 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer", "seed")
    if values["threads"] is not None and values["threads"] < 1:
        raise ConfigError("must be at least 1", "threads")
    if kind == "pk-check" and values["family"] not in PK_FAMILIES:
        raise ConfigError(f"unknown family; expected one of {', '.join(PK_FAMILIES)}", "family")
    if kind == "value-convergence" and values["family"] == "break" and "a" in obj and "tau" not in obj:
        values["tau"] = None  # a drift target replaces the default interior break
    if kind == "value-convergence" and values["family"] == "break" and (values["tau"] is None) == (values["a"] is None):
        raise ConfigError("give exactly one of tau and a (set the other to null)", "a")
    if kind == "value-convergence" and values["family"] == "weakid" and values["regime"] not in ("weak", "semistrong"):
        raise ConfigError("regime must be 'weak' or 'semistrong'", "regime")
    if "lambda1" in values and "lambda2" in values and not 0 < values["lambda1"] < values["lambda2"] < 1:
        raise ConfigError("trimming order violated: need 0 < lambda1 < lambda2 < 1", "lambda2")
    params = {k: v for k, v in values.items() if k not in COMMON}
    return ExperimentConfig(
        kind,
        params,
        values["seed"],
        values["reps"],
        values["limit_draws"],
        values["out"],
        values["threads"],
        values["description"],
        dict(obj),
    )


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", line=exc.lineno) from None
    try:
        return validate(obj)
    except ConfigError as exc:
        if exc.field is not None and exc.line is None:
            line = _line_of(text, exc.field)
            if line is not None:
                raise ConfigError(str(exc).split(": ", 1)[-1], exc.field, line) from None
        raise


def _line_of(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def describe_kind(kind: str) -> str:
    if kind not in KINDS:
        raise ConfigError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", "kind")
    lines = [f"kind: {kind}", f"verifies: {ANCHORS[kind]}", f"schema: {SCHEMA}", "fields:"]
    fmt = lambda name, tag, default: "  {}: {} ({})".format(  # noqa: E731
        name, tag, "required" if default == "req" else f"default {json.dumps(default)}"
    )
    table = COMMON if kind == "value-convergence" else {**COMMON, **SCHEMAS[kind]}
    lines += [fmt(n, t, d) for n, (t, d) in table.items()]
    if kind == "value-convergence":
        lines.append('  family: string (default "break")')
        for fam, fields in VALUE_SCHEMAS.items():
            lines.append(f"family {fam} fields:")
            lines += [fmt(n, t, d) for n, (t, d) in fields.items()]
    if kind == "pk-check":
        lines.append("built-in families:")
        lines += [f"  {k}: {v}" for k, v in FAMILY_TEXT.items()]
    return "\n".join(lines)
