"""Tiny parser for ``name(arg, key=value, ...)`` call strings."""

import re

from .errors import ParseError

_CALL = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$", re.S)


def parse_call(text):
    """Split ``name(a, b=1)`` into ``("name", ["a"], {"b": "1"})``.

    Values are returned as stripped strings; callers convert them.
    """
    m = _CALL.match(text)
    if m is None:
        raise ParseError(f"cannot parse {text!r}; expected name(arg, key=value, ...)")
    name, body = m.group(1).lower(), m.group(2)
    args, kwargs = [], {}
    if body is None or not body.strip():
        return name, args, kwargs
    for part in _split_top(body, ","):
        part = part.strip()
        if not part:
            raise ParseError(f"empty argument in {text!r}")
        if "=" in part:
            key, _, value = part.partition("=")
            key = key.strip().lower()
            if key in kwargs:
                raise ParseError(f"duplicate argument in {text!r}", field=key)
            kwargs[key] = value.strip()
        else:
            if kwargs:
                raise ParseError(f"positional argument after keyword in {text!r}")
            args.append(part)
    return name, args, kwargs


def split_product(text):
    """Split ``a(..)*b(..)`` at top-level ``*`` signs."""
    return [p.strip() for p in _split_top(text, "*")]


def _split_top(text, sep):
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError(f"unbalanced parentheses in {text!r}")
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise ParseError(f"unbalanced parentheses in {text!r}")
    parts.append("".join(cur))
    return parts


def to_float(value, field):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ParseError(f"expected a number, got {value!r}", field=field) from None


def bind(name, args, kwargs, params, aliases=None):
    """Bind positional/keyword strings to the ordered parameter names ``params``."""
    aliases = aliases or {}
    out = {}
    if len(args) > len(params):
        raise ParseError(f"{name}() takes at most {len(params)} positional arguments")
    for key, value in zip(params, args):
        out[key] = value
    for key, value in kwargs.items():
        key = aliases.get(key, key)
        if key not in params:
            raise ParseError(f"unknown argument for {name}()", field=key)
        if key in out:
            raise ParseError(f"argument given twice for {name}()", field=key)
        out[key] = value
    return out
