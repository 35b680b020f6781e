"""End-to-end compilation: SXQL text -> parsed -> expanded -> bound -> scoped QET."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .flux import FluxIndex
from .planner import CostEstimate, ScopeSpec, build_qet, estimate_cost, intersect_indices
from .storage import Federation
from .sxql import expand_macros, parse, validate
from .sxql.typecheck import BoundQuery, BoundSelectItem


@dataclass
class CompiledQuery:
    text: str
    bound: BoundQuery
    scope: ScopeSpec
    qet: object
    estimate: CostEstimate
    select: list[BoundSelectItem]

    @property
    def output_class(self) -> str:
        return self.bound.cls.name

    @property
    def column_names(self) -> list[str]:
        from .engine.executor import expand_select
        return expand_select(self.select)


def load_flux(fed: Federation) -> FluxIndex | None:
    path = Path(fed.path) / "flux.idx"
    return FluxIndex.load(path) if path.exists() else None


def compile_query(text: str, fed: Federation, flux: FluxIndex | None = None) -> CompiledQuery:
    tree = parse(text)
    expanded = expand_macros(tree, fed.schema)
    bound = validate(expanded, fed.schema)
    scope = intersect_indices(bound, fed, flux)
    qet = build_qet(bound, scope)
    est = estimate_cost(qet, fed)
    return CompiledQuery(text, bound, scope, qet, est, bound.select)
