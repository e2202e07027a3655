"""DOT rendering of feature-induced posets (one df-path colour per feature set)."""
from __future__ import annotations

from typing import Mapping, Sequence

from .event_model import Observation
from .poset import Poset, build_poset, transitive_reduction
from .relations import FeatureSet, Model, RelationCache, attributed_pairs

_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _quote(text) -> str:
    s = str(text).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{s}"'


def export_dot(poset: Poset, model: Model,
               edge_sources: Mapping[tuple[int, int], Sequence[FeatureSet]] | None = None,
               name: str = "ekg") -> str:
    """Transitive reduction of ``poset`` as a DOT digraph.

    ``edge_sources`` maps poset edges (dense indices) to the feature sets that
    induced them; reduced edges missing from it are labelled by the model.
    """
    reduced = transitive_reduction(poset)
    colours = {fs: _PALETTE[i % len(_PALETTE)] for i, fs in enumerate(model.sorted_sets())}
    lines = [f"digraph {_quote(name)} {{", "  rankdir=TB;", "  node [shape=circle];"]
    for i in range(poset.n):
        lines.append(f"  {_quote(poset.label(i))};")
    for a, b in sorted(reduced.edges):
        sets = list(edge_sources.get((a, b), ())) if edge_sources else []
        label = " ".join(str(fs) for fs in sets) if sets else str(model)
        colour = ":".join(colours[fs] for fs in sets if fs in colours) or "black"
        lines.append(f"  {_quote(poset.label(a))} -> {_quote(poset.label(b))} "
                     f"[features={_quote(label)}, color={_quote(colour)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def observation_dot(obs: Observation, model: Model, cache: RelationCache | None = None,
                    name: str = "ekg") -> str:
    """Build the poset of ``obs`` under ``model`` and render it with edge attribution."""
    cache = cache or RelationCache(obs.table)
    rels = cache.for_model(model)
    poset = build_poset(obs, model, rels)
    pos = {e: i for i, e in enumerate(obs.members)}
    sources = {(pos[a], pos[b]): sets for (a, b), sets in attributed_pairs(obs, model, rels).items()}
    return export_dot(poset, model, sources, name)
