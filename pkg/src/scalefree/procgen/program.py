"""Parse and run operation programs (JSON arrays of op objects)."""

from __future__ import annotations

import json
import math

from ..errors import OpError, ProgramSyntaxError, ProgramValidationError
from .ops import REGISTRY, Context, Op, evaluate_condition, validate_condition

RESERVED = ("type", "from", "out", "condition")


def _names(v, what):
    if v is None:
        return ()
    if isinstance(v, str):
        v = [v]
    if not isinstance(v, list) or not all(isinstance(s, str) and s for s in v):
        raise ValueError(f"'{what}' must be a non-empty group name or a list of them")
    return tuple(v)


def _number(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or math.isnan(v):
        raise ValueError(f"expected a number, got {v!r}")
    return float(v)


def _coerce(kind, v, where):
    if kind == "number":
        return _number(v)
    if kind == "int":
        if isinstance(v, bool) or not (isinstance(v, int) or (isinstance(v, float) and v.is_integer())):
            raise ValueError(f"expected an integer, got {v!r}")
        return int(v)
    if kind == "bool":
        if not isinstance(v, bool):
            raise ValueError(f"expected true/false, got {v!r}")
        return v
    if kind == "string":
        if not isinstance(v, str):
            raise ValueError(f"expected a string, got {v!r}")
        return v
    if kind == "vec3":
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return (float(v),) * 3
        if not isinstance(v, list) or len(v) != 3:
            raise ValueError(f"expected [x, y, z], got {v!r}")
        return tuple(_number(c) for c in v)
    if kind == "vec3list":
        if not isinstance(v, list):
            raise ValueError("expected a list of [x, y, z]")
        return tuple(_coerce("vec3", p, where) for p in v)
    if kind == "matrix23":
        if not (isinstance(v, list) and len(v) == 2 and all(isinstance(r, list) and len(r) == 3 for r in v)):
            raise ValueError("expected a 2x3 matrix [[a, b, c], [d, e, f]]")
        return tuple(tuple(_number(c) for c in r) for r in v)
    if kind == "list":
        if not isinstance(v, list):
            raise ValueError(f"expected a list, got {v!r}")
        return tuple(v)
    if kind == "ops":
        if not isinstance(v, list):
            raise ValueError("expected a list of ops")
        return tuple(_parse_op(o, f"{where}.{k}") for k, o in enumerate(v))
    if kind == "cond":
        validate_condition(v)
        return v
    raise AssertionError(kind)


def _parse_op(obj, where) -> Op:
    if not isinstance(obj, dict):
        raise ValueError(f"op {where} is not an object")
    t = obj.get("type")
    if not isinstance(t, str):
        raise ValueError(f"op {where} has no 'type'")
    spec = REGISTRY.get(t)
    if spec is None:
        raise ValueError(f"unknown op type {t!r} (op {where})")
    try:
        sources = _names(obj.get("from"), "from")
        outputs = _names(obj.get("out"), "out")
        if spec.needs_from and not sources:
            raise ValueError("missing 'from'")
        if spec.needs_out and not outputs:
            raise ValueError("missing 'out'")
        if len(outputs) > spec.max_out:
            raise ValueError(f"at most {spec.max_out} output group(s)")
        unknown = set(obj) - set(RESERVED) - set(spec.params)
        if unknown:
            raise ValueError(f"unknown parameter(s) {sorted(unknown)}")
        params = {}
        for name, p in spec.params.items():
            if name in obj:
                params[name] = None if obj[name] is None and not p.required else _coerce(p.kind, obj[name], where)
            elif p.required:
                raise ValueError(f"missing required parameter {name!r}")
            else:
                params[name] = p.default
        cond = obj.get("condition")
        if cond is not None:
            validate_condition(cond)
    except ValueError as exc:
        msg = str(exc)
        raise ValueError(msg if f"op {where}" in msg else f"{t} (op {where}): {msg}") from None
    return Op(t, sources, outputs, params, cond)


def parse_program(text: str) -> list:
    """Parse a JSON op program; a lone op object counts as a one-op program."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProgramSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    if isinstance(doc, dict):
        doc = [doc]
    if not isinstance(doc, list):
        raise ProgramValidationError("a program must be a JSON array of op objects")
    ops = []
    for k, obj in enumerate(doc):
        try:
            ops.append(_parse_op(obj, str(k)))
        except ValueError as exc:
            raise ProgramValidationError(str(exc), k) from None
    return ops


def load_program(path) -> list:
    with open(path, encoding="utf-8") as f:
        return parse_program(f.read())


def _run_op(ctx: Context, op: Op) -> None:
    if op.condition is not None and not evaluate_condition(ctx, op.condition):
        return
    REGISTRY[op.type].fn(ctx, op)


def _exec_ops(ctx: Context, ops, label: str = "") -> None:
    base = ctx.path
    for k, op in enumerate(ops):
        ctx.path = f"{base}/{label}{k}"
        _run_op(ctx, op)
    ctx.path = base


def _snapshot(store: dict) -> dict:
    return {k: list(v) for k, v in store.items()}


def run_program(program, seed: int = 0, initial=None) -> dict:
    """Apply ``program`` to a copy of ``initial``; pure in ``(program, seed, initial)``."""
    store = _snapshot(initial or {})
    ctx = Context(store, int(seed))
    ctx.exec_ops = _exec_ops
    for k, op in enumerate(program):
        before = _snapshot(ctx.store)
        ctx.path = f"/{k}"
        try:
            _run_op(ctx, op)
        except (ValueError, ArithmeticError, IndexError, KeyError) as exc:
            raise OpError(k, f"{op.type}: {exc}", before) from exc
    return ctx.store
