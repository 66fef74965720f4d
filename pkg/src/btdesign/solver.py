"""Iterative locally D-optimal design solver on the weight simplex.

The iteration is the classical multiplicative one: with directional values
d_ij = lambda_ij f^T M(w)^{-1} f, update w_ij <- w_ij * d_ij / (m-1).  The
update preserves the simplex (the weighted average of the d_ij is m-1) and
log det M(w) never decreases along it.  Weights decaying below the prune
threshold are removed periodically; every prune is validated against the
full optimality criterion and undone if it was premature.  When pruning
leaves a spanning saturated support, the weights snap to the rigid equal
values, which is the exact restricted optimum on such a support.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import (
    Design,
    Pair,
    Parameters,
    SingularMatrixError,
    all_pairs,
    cholesky_pivots,
    design_from_vector,
    intensity_vector,
    regression_matrix,
)
from .graphs import SupportGraph, is_tree
from .optimality import KwCertificate, kw_check


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 100_000
    kw_tolerance: float = 1e-8
    prune_threshold: float = 1e-9
    prune_interval: int = 50
    initial_design: Design | None = None

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.kw_tolerance <= 0 or self.prune_threshold <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class SolverResult:
    design: Design
    certificate: KwCertificate
    iterations: int
    converged: bool


@dataclass(frozen=True)
class RestrictedSolverResult:
    """Result of optimizing over designs confined to a fixed support."""

    design: Design
    certificate: KwCertificate
    full_certificate: KwCertificate
    iterations: int
    converged: bool


def _directional_values(w: np.ndarray, lam: np.ndarray, F: np.ndarray) -> np.ndarray | None:
    """d_ij = lambda_ij f^T M(w)^{-1} f for all pairs, None if M is singular."""
    M = F.T @ (F * (w * lam)[:, None])
    if cholesky_pivots(M) is None:
        return None
    X = np.linalg.solve(M, F.T)
    return lam * np.einsum("ij,ji->i", F, X)


def _multiplicative_step(w: np.ndarray, lam: np.ndarray, F: np.ndarray, m: int) -> np.ndarray:
    """One multiplicative update, renormalized; exposed for property tests."""
    d = _directional_values(w, lam, F)
    if d is None:
        raise SingularMatrixError("information matrix is singular")
    w = w * d / (m - 1)
    return w / w.sum()


def _solve_on_mask(
    params: Parameters, allowed: np.ndarray, config: SolverConfig
) -> tuple[np.ndarray, int, bool]:
    """Core iteration over weights confined to the allowed pairs.

    Returns the final weight vector, the iteration count, and whether the
    restricted criterion max d_ij <= (m-1) + kw_tolerance was met on the
    allowed set.
    """
    m = params.m
    pairs = all_pairs(m)
    F = regression_matrix(m)
    lam = intensity_vector(params)
    k = len(pairs)

    if config.initial_design is not None:
        if config.initial_design.m != m:
            raise ValueError("initial design and parameters disagree on m")
        w = config.initial_design.as_vector()
        if np.any(w[~allowed] > 0):
            raise ValueError("initial design puts weight outside the allowed support")
    else:
        w = np.where(allowed, 1.0 / allowed.sum(), 0.0)

    d = _directional_values(w, lam, F)
    if d is None:
        raise SingularMatrixError("initial design has a singular information matrix")

    threshold = (m - 1) + config.kw_tolerance
    pruned: dict[int, float] = {}
    protected = np.zeros(k, dtype=bool)  # restored pairs are never re-pruned
    iterations = 0
    converged = False

    for iterations in range(1, config.max_iterations + 1):
        live = w > 0.0
        live_max = d[live & allowed].max()
        allowed_max = d[allowed].max()

        if allowed_max <= threshold:
            w = _finalize(w, lam, F, m, pairs, allowed, threshold)
            converged = True
            break

        if pruned and live_max <= threshold < allowed_max:
            # A pruned pair violates optimality while the live part has
            # converged: the prune was premature, put the weights back.
            for idx, value in pruned.items():
                w[idx] = value
                protected[idx] = True
            pruned.clear()
            w /= w.sum()
        else:
            w[live] *= d[live] / (m - 1)
            w /= w.sum()

            if iterations % config.prune_interval == 0:
                small = live & ~protected & (w < config.prune_threshold)
                if small.any() and (w > 0.0).sum() - small.sum() >= m - 1:
                    saved = {int(i): float(w[i]) for i in np.flatnonzero(small)}
                    w[small] = 0.0
                    w /= w.sum()
                    pruned.update(saved)
                    w = _snap_if_saturated(w, pairs, m)

        d = _directional_values(w, lam, F)
        if d is None:  # pragma: no cover - pruning is validated, det is monotone
            for idx, value in pruned.items():
                w[idx] = value
            pruned.clear()
            w /= w.sum()
            d = _directional_values(w, lam, F)
            if d is None:
                raise SingularMatrixError("iteration produced a singular information matrix")

    return w, iterations, converged


def _snap_if_saturated(w: np.ndarray, pairs: tuple[Pair, ...], m: int) -> np.ndarray:
    """Replace a spanning (m-1)-pair support by its rigid equal weights."""
    live = np.flatnonzero(w > 0.0)
    if len(live) != m - 1:
        return w
    g = SupportGraph(m, frozenset(pairs[i] for i in live))
    if not is_tree(g):
        return w
    w = np.zeros_like(w)
    w[live] = 1.0 / (m - 1)
    return w


# Converged iterates can carry stragglers just above the support threshold:
# the optimality criterion settles faster than off-support weights decay.
# Weights below this band are candidates for certificate-gated removal.
_CLEANUP_BAND = 1e-4


def _finalize(
    w: np.ndarray,
    lam: np.ndarray,
    F: np.ndarray,
    m: int,
    pairs: tuple[Pair, ...],
    allowed: np.ndarray,
    threshold: float,
) -> np.ndarray:
    """Drop sub-band weights if the simplified design still meets the criterion.

    The simplification is adopted only when the full directional check passes
    on it, so a genuinely needed small weight is never lost.
    """
    small = (w > 0.0) & (w < _CLEANUP_BAND)
    if not small.any():
        return w
    trial = w.copy()
    trial[small] = 0.0
    if (trial > 0.0).sum() < m - 1:
        return w
    trial /= trial.sum()
    trial = _snap_if_saturated(trial, pairs, m)
    d = _directional_values(trial, lam, F)
    if d is None or d[allowed].max() > threshold:
        return w
    return trial


def solve(params: Parameters, config: SolverConfig = SolverConfig()) -> SolverResult:
    """Find a locally D-optimal design for the given parameter point."""
    allowed = np.ones(len(all_pairs(params.m)), dtype=bool)
    w, iterations, _ = _solve_on_mask(params, allowed, config)
    design = design_from_vector(params.m, w)
    certificate = kw_check(design, params, tolerance=config.kw_tolerance)
    converged = certificate.max_violation <= config.kw_tolerance
    return SolverResult(design=design, certificate=certificate, iterations=iterations, converged=converged)


def solve_restricted(
    params: Parameters, support: Iterable[Pair], config: SolverConfig = SolverConfig()
) -> RestrictedSolverResult:
    """Best design among those supported on the given pairs.

    The support must span all alternatives, otherwise every design on it is
    singular.  The returned certificate covers the restricted design space;
    the full-space certificate is reported alongside it.
    """
    m = params.m
    pairs = all_pairs(m)
    support = set(support)
    for p in support:
        if p not in pairs:
            raise ValueError(f"pair {p} is not a valid comparison for m={m}")
    g = SupportGraph(m, frozenset(support))
    if not g.is_connected_spanning():
        raise SingularMatrixError("support does not span all alternatives")

    allowed = np.array([p in support for p in pairs])
    w, iterations, converged = _solve_on_mask(params, allowed, config)
    design = design_from_vector(m, w)

    full = kw_check(design, params, tolerance=config.kw_tolerance)
    restricted_derivs = {p: v for p, v in full.derivatives.items() if p in support}
    if full.singular:
        restricted = full
    else:
        max_violation = max(restricted_derivs.values())
        restricted = KwCertificate(
            derivatives=restricted_derivs,
            max_violation=max_violation,
            is_optimal=max_violation <= config.kw_tolerance,
            equality_pairs=frozenset(
                p for p, v in restricted_derivs.items() if abs(v) <= config.kw_tolerance
            ),
        )
    return RestrictedSolverResult(
        design=design,
        certificate=restricted,
        full_certificate=full,
        iterations=iterations,
        converged=restricted.max_violation <= config.kw_tolerance,
    )
