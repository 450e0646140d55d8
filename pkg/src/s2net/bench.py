"""Timing of tag and region graph construction on generated families."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import families
from .geometry import edge_fans
from .tag import build_dual_graph, build_tag, component_labels

FAMILIES = {
    "stacked-cubes": (families.stacked_cubes, lambda n: n + 1),
    "tet-chain": (families.tetrahedron_chain, lambda n: n + 1),
}


@dataclass(frozen=True)
class BenchRow:
    size: int
    triangles: int
    nodes: int
    median_seconds: float
    runs: tuple

    def as_dict(self) -> dict:
        return {"size": self.size, "triangles": self.triangles, "nodes": self.nodes,
                "median_seconds": self.median_seconds, "runs": list(self.runs)}


def construct(complex):
    """Edge fans, tag graph, components and region graph: the timed pipeline."""
    fans = edge_fans(complex)
    tag = build_tag(complex, fans)
    labels = component_labels(tag)
    return build_dual_graph(complex, labels)


def time_family(family: str, sizes, repeats: int = 5) -> list:
    make, expected_nodes = FAMILIES[family]
    rows = []
    for n in sizes:
        cx = make(int(n))
        construct(cx)  # warm-up
        runs = []
        dual = None
        for _ in range(repeats):
            t0 = time.perf_counter()
            dual = construct(cx)
            runs.append(time.perf_counter() - t0)
        if dual.n_nodes != expected_nodes(int(n)):
            raise AssertionError(f"{family} size {n}: {dual.n_nodes} region nodes, expected {expected_nodes(int(n))}")
        rows.append(BenchRow(int(n), cx.n_triangles, dual.n_nodes, float(np.median(runs)), tuple(runs)))
    return rows


def loglog_slope(rows) -> float:
    """Least-squares slope of log(time) against log(triangle count)."""
    x = np.log([r.triangles for r in rows])
    y = np.log([r.median_seconds for r in rows])
    return float(np.polyfit(x, y, 1)[0])


def bench_csv(rows) -> str:
    lines = ["size,triangles,nodes,median_seconds"]
    lines += [f"{r.size},{r.triangles},{r.nodes},{r.median_seconds:.6e}" for r in rows]
    return "\n".join(lines) + "\n"
