"""Budget configuration.

Defaults are desk-scale guardrails. ``PCSPLAB_BUDGET`` overrides them with a
comma separated list such as ``domain=200000,nodes=50000000,enum=1000000``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, replace

DEFAULT_MAX_DOMAIN = 10**6
DEFAULT_NODE_LIMIT = 10**7
DEFAULT_ENUMERATION_CAP = 10**7

_ENV_KEYS = {"domain": "max_domain", "nodes": "node_limit", "enum": "enumeration_cap"}


@dataclass(frozen=True)
class Budget:
    max_domain: int = DEFAULT_MAX_DOMAIN
    node_limit: int = DEFAULT_NODE_LIMIT
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP

    def __post_init__(self):
        for field in ("max_domain", "node_limit", "enumeration_cap"):
            if getattr(self, field) < 1:
                raise ValueError(f"{field} must be at least 1")

    def with_overrides(self, **changes) -> "Budget":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)


def parse_budget_spec(text: str, base: Budget | None = None) -> Budget:
    base = base or Budget()
    changes = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep or key.strip() not in _ENV_KEYS:
            raise ValueError(f"bad budget entry {item!r}")
        changes[_ENV_KEYS[key.strip()]] = int(value)
    return base.with_overrides(**changes)


def default_budget() -> Budget:
    spec = os.environ.get("PCSPLAB_BUDGET")
    if spec:
        return parse_budget_spec(spec)
    return Budget()
