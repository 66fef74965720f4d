"""Optimality regions of saturated path designs, for any number of alternatives.

An optimal saturated design puts weight 1/(m-1) on each edge of a labeled
Hamiltonian path.  For the canonically labeled path 1-2-...-m its region of
optimality in parameter space is cut out by

    g(i, j) = lambda_ij * sum_{k=i}^{j-1} 1 / lambda_{k,k+1}  <=  1

over all pairs; consecutive pairs give exactly 1.  Any other path's region
is the relabeling of this one, which here is evaluated directly from vertex
positions along the path.  Regions are closed: boundary points count as
inside.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .core import Design, Pair, Parameters, all_pairs, intensity_table
from .graphs import path_vertex_orders

Scalar = Union[float, np.ndarray]


@dataclass(frozen=True)
class PathDesign:
    """A labeled Hamiltonian path, stored with its lower-numbered end first."""

    order: tuple[int, ...]

    def __post_init__(self) -> None:
        order = tuple(int(v) for v in self.order)
        if sorted(order) != list(range(1, len(order) + 1)):
            raise ValueError(f"path order must visit each of 1..{len(order)} once, got {order}")
        if order[0] > order[-1]:
            order = order[::-1]
        object.__setattr__(self, "order", order)

    @property
    def m(self) -> int:
        return len(self.order)

    def edges(self) -> tuple[Pair, ...]:
        return tuple(Pair(self.order[k], self.order[k + 1]) for k in range(self.m - 1))

    def design(self) -> Design:
        """The rigid equal-weight design on the path's edges."""
        return Design.equal_on(self.m, self.edges())

    @classmethod
    def canonical(cls, m: int) -> "PathDesign":
        return cls(tuple(range(1, m + 1)))


def enumerate_path_designs(m: int) -> list[PathDesign]:
    """All m!/2 labeled paths (a path and its reverse count once)."""
    return [PathDesign(order) for order in path_vertex_orders(m)]


@dataclass(frozen=True)
class RegionMembership:
    """Evaluation of one path's region inequalities at one parameter point.

    g_values holds g - offsets for the non-edge pairs only (edges are
    identically 1); margin is the largest g - 1 over those pairs and the
    point is inside exactly when margin <= 0.
    """

    path: PathDesign
    g_values: Mapping[Pair, float]
    inside: bool
    margin: float


def g_value_from_intensities(path: PathDesign, lam: Mapping[Pair, Scalar], pair: Pair) -> Scalar:
    """g for one pair, given intensities (scalars or broadcastable arrays)."""
    pos = {v: k for k, v in enumerate(path.order)}
    a, b = sorted((pos[pair.i], pos[pair.j]))
    if b == a + 1:
        return 1.0  # the sum collapses to lambda/lambda; exact by definition
    edges = path.edges()
    total = sum(1.0 / lam[edges[k]] for k in range(a, b))
    return lam[pair] * total


def g_value(path: PathDesign, params: Parameters, pair: Pair) -> float:
    """Region inequality value g(i, j) of the path at a parameter point."""
    return float(g_value_from_intensities(path, intensity_table(params).values, pair))


def region_membership(path: PathDesign, params: Parameters) -> RegionMembership:
    """Evaluate all non-edge inequalities of the path's region at beta."""
    table = intensity_table(params)
    edge_set = set(path.edges())
    g_values = {
        p: float(g_value_from_intensities(path, table.values, p))
        for p in all_pairs(path.m)
        if p not in edge_set
    }
    margin = max(g_values.values(), default=0.0) - 1.0 if g_values else 0.0
    return RegionMembership(path=path, g_values=g_values, inside=margin <= 0.0, margin=margin)


def find_optimal_saturated(params: Parameters) -> tuple[PathDesign, RegionMembership] | None:
    """The path whose region contains beta, or None when no region does.

    Region interiors are pairwise disjoint, so ties can only happen on
    boundaries; the path with the smallest margin is returned there.
    """
    best: tuple[PathDesign, RegionMembership] | None = None
    for path in enumerate_path_designs(params.m):
        membership = region_membership(path, params)
        if best is None or membership.margin < best[1].margin:
            best = (path, membership)
    if best is not None and best[1].inside:
        return best
    return None
