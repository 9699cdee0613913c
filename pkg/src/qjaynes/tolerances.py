"""Numerical tolerances shared by every module.

Defaults live in a frozen :class:`Tolerances`. A different set can be made
active for a block of code with :func:`override`; the active set is held in a
context variable so concurrent tasks do not see each other's overrides.
"""

from __future__ import annotations

import contextlib
import contextvars
import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10
    trace: float = 1e-10
    psd: float = 1e-10
    # relative to the largest eigenvalue
    support: float = 1e-9
    tp: float = 1e-10
    peripheral: float = 1e-9
    cluster: float = 1e-8
    eig: float = 1e-9
    dual: float = 1e-9
    # relative to the largest singular value
    rank: float = 1e-9
    defect: float = 1e-7
    fit: float = 1e-10
    gamma_max: float = 50.0
    max_newton: int = 100


_ACTIVE: contextvars.ContextVar[Tolerances] = contextvars.ContextVar(
    "qjaynes_tolerances", default=Tolerances()
)


def current() -> Tolerances:
    return _ACTIVE.get()


def names() -> list[str]:
    return [f.name for f in dataclasses.fields(Tolerances)]


def parse_overrides(items) -> dict:
    """Turn ``["key=value", ...]`` into keyword arguments for :func:`override`."""
    out = {}
    valid = {f.name: f.type for f in dataclasses.fields(Tolerances)}
    for item in items or ():
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in valid:
            raise ValueError(f"unknown tolerance override {item!r}; known keys: {', '.join(valid)}")
        out[key] = int(value) if key == "max_newton" else float(value)
    return out


@contextlib.contextmanager
def override(**changes):
    token = _ACTIVE.set(dataclasses.replace(_ACTIVE.get(), **changes))
    try:
        yield _ACTIVE.get()
    finally:
        _ACTIVE.reset(token)
