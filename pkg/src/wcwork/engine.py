"""Exact trajectory enumeration and work-distribution assembly.

A trajectory visits one level per protocol node (len(steps) + 1 nodes);
its probability is the initial occupation times the product of transition
matrix entries, and its work is the sum of per-change energy differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ResourceLimitError, SupportMismatchError
from .model import DiagonalState, HamiltonianChange, Protocol

DEFAULT_BIN_TOLERANCE = 1e-9
DEFAULT_ENUMERATION_CAP = 10**7


@dataclass(frozen=True)
class Trajectory:
    nodes: tuple
    work: float
    probability: float


@dataclass(frozen=True)
class WorkDistribution:
    """Finite set of (work, probability) atoms, sorted by work.

    Atom values closer than ``bin_tolerance`` have been merged.
    """

    atoms: tuple
    bin_tolerance: float = DEFAULT_BIN_TOLERANCE

    def __post_init__(self):
        if len(self.atoms) == 0:
            raise InvalidInputError("work distribution needs at least one atom")
        object.__setattr__(
            self, "atoms", tuple((float(w), float(p)) for w, p in self.atoms)
        )

    @property
    def works(self) -> np.ndarray:
        return np.array([w for w, _ in self.atoms])

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms])

    def prob_at(self, w: float):
        """Probability of the atom matching ``w`` within bin_tolerance, or None."""
        tol = max(self.bin_tolerance, 1e-12)
        idx = np.flatnonzero(np.abs(self.works - w) <= tol)
        if idx.size == 0:
            return None
        return float(self.probs[idx[0]])


def _step_matrix(step) -> np.ndarray:
    return step.matrix


def _enumerate_arrays(
    protocol: Protocol,
    rho0: DiagonalState,
    cap: int = DEFAULT_ENUMERATION_CAP,
    prune_below: float = 0.0,
    track_nodes: bool = False,
):
    """Vectorized depth-first expansion over all positive-probability paths.

    Returns (start_levels, levels, works, probs, nodes_or_None, pruned_mass).
    """
    d = protocol.d
    if rho0.d != d:
        raise InvalidInputError("state dimension does not match protocol")
    n_nodes = len(protocol.steps) + 1
    if d**n_nodes > cap:
        raise ResourceLimitError(
            f"{d}^{n_nodes} trajectories exceed the cap of {cap}; "
            "use Monte Carlo sampling instead"
        )
    lands = protocol.landscapes()

    keep = rho0.probs > max(prune_below, 0.0)
    level = np.flatnonzero(keep)
    prob = rho0.probs[level].copy()
    work = np.zeros(level.size)
    start = level.copy()
    nodes = level[:, None] if track_nodes else None
    pruned = float(rho0.probs[~keep].sum())

    for k, step in enumerate(protocol.steps):
        m = _step_matrix(step)
        trans = m[:, level].T  # trans[n, j] = p(level[n] -> j)
        new_prob = prob[:, None] * trans
        if isinstance(step, HamiltonianChange):
            d_e = step.target.energies[None, :] - lands[k].energies[level][:, None]
            new_work = work[:, None] + d_e
        else:
            new_work = np.broadcast_to(work[:, None], new_prob.shape)
        new_level = np.broadcast_to(np.arange(d)[None, :], new_prob.shape)
        new_start = np.broadcast_to(start[:, None], new_prob.shape)

        flat_prob = new_prob.ravel()
        mask = flat_prob > max(prune_below, 0.0)
        if prune_below > 0.0:
            pruned += float(flat_prob[~mask & (flat_prob > 0)].sum())
        if mask.sum() > cap:
            raise ResourceLimitError(
                f"live trajectory count exceeds the cap of {cap}; "
                "use Monte Carlo sampling instead"
            )
        prob = flat_prob[mask]
        work = new_work.ravel()[mask]
        level = new_level.ravel()[mask]
        start = new_start.ravel()[mask]
        if track_nodes:
            rep = np.repeat(nodes, d, axis=0)
            nodes = np.concatenate([rep, new_level.reshape(-1, 1)], axis=1)[mask]

    return start, level, work, prob, nodes, pruned


def enumerate_trajectories(
    protocol: Protocol,
    rho0: DiagonalState,
    cap: int = DEFAULT_ENUMERATION_CAP,
    prune_below: float = 0.0,
) -> list:
    """Every trajectory with probability > 0 (or > prune_below), as objects."""
    _, _, work, prob, nodes, _ = _enumerate_arrays(
        protocol, rho0, cap=cap, prune_below=prune_below, track_nodes=True
    )
    return [
        Trajectory(nodes=tuple(int(x) for x in nodes[i]), work=float(work[i]),
                   probability=float(prob[i]))
        for i in range(prob.size)
    ]


def trajectory_work(protocol: Protocol, nodes) -> float:
    """Recompute the work of a node sequence under a protocol."""
    if len(nodes) != len(protocol.steps) + 1:
        raise InvalidInputError("node count must be len(steps) + 1")
    lands = protocol.landscapes()
    w = 0.0
    for k, step in enumerate(protocol.steps):
        if isinstance(step, HamiltonianChange):
            w += step.target.energies[nodes[k + 1]] - lands[k].energies[nodes[k]]
    return float(w)


def bin_works(
    works: np.ndarray, probs: np.ndarray, bin_tolerance: float = DEFAULT_BIN_TOLERANCE
) -> WorkDistribution:
    """Merge work values into atoms whenever adjacent sorted values are within
    bin_tolerance; atom positions are probability-weighted means."""
    works = np.asarray(works, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if works.size == 0:
        raise InvalidInputError("no trajectories to bin")
    order = np.argsort(works, kind="stable")
    w = works[order]
    p = probs[order]
    cuts = np.flatnonzero(np.diff(w) > bin_tolerance) + 1
    atoms = []
    for seg_w, seg_p in zip(np.split(w, cuts), np.split(p, cuts)):
        mass = seg_p.sum()
        atoms.append((float(np.dot(seg_w, seg_p) / mass), float(mass)))
    return WorkDistribution(atoms=tuple(atoms), bin_tolerance=bin_tolerance)


def work_distribution(
    protocol: Protocol,
    rho0: DiagonalState,
    bin_tolerance: float = DEFAULT_BIN_TOLERANCE,
    restrict_start=None,
    cap: int = DEFAULT_ENUMERATION_CAP,
    prune_below: float = 0.0,
) -> WorkDistribution:
    """Work distribution by exact enumeration.

    With ``restrict_start`` (an iterable of level indices) the distribution is
    conditioned on trajectories starting in those levels.
    """
    start, _, work, prob, _, _ = _enumerate_arrays(
        protocol, rho0, cap=cap, prune_below=prune_below
    )
    if restrict_start is not None:
        sel = np.isin(start, np.fromiter(restrict_start, dtype=int))
        work, prob = work[sel], prob[sel]
        if prob.size == 0:
            raise InvalidInputError("no trajectories start in the restricted set")
        prob = prob / prob.sum()
    return bin_works(work, prob, bin_tolerance)


def worst_case_work(dist: WorkDistribution, restrict=None, prob_floor: float = 0.0):
    """Largest work value with probability above ``prob_floor``.

    ``restrict`` narrows the maximization to an explicit trajectory subset.
    """
    if restrict is not None:
        works = [t.work for t in restrict if t.probability > prob_floor]
        if not works:
            raise InvalidInputError("restricted trajectory set is empty")
        return float(max(works))
    works = dist.works[dist.probs > prob_floor]
    if works.size == 0:
        raise InvalidInputError("work distribution has no atom above prob_floor")
    return float(works.max())


def epsilon_guaranteed_work(dist: WorkDistribution, eps: float):
    """Smallest x with p(w > x) <= eps, plus the distribution cut at x.

    The cut removes atoms above x and renormalizes by the retained mass.
    """
    if not (0.0 <= eps < 1.0):
        raise InvalidInputError(f"eps must be in [0, 1), got {eps}")
    w = dist.works
    p = dist.probs
    tail = np.concatenate([np.cumsum(p[::-1])[::-1][1:], [0.0]])  # p(W > w_k)
    ok = np.flatnonzero(tail <= eps + 1e-15)
    k = int(ok[0])
    w_eps = float(w[k])
    kept_w = w[: k + 1]
    kept_p = p[: k + 1]
    retained = kept_p.sum()
    cut = WorkDistribution(
        atoms=tuple(zip(kept_w.tolist(), (kept_p / retained).tolist())),
        bin_tolerance=dist.bin_tolerance,
    )
    return w_eps, cut


def variation_distance(p, q) -> float:
    """Half the L1 distance between two probability vectors."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise InvalidInputError("probability vectors differ in length")
    return float(0.5 * np.abs(p - q).sum())


def crooks_residual(
    fwd: WorkDistribution,
    rev: WorkDistribution,
    z0: float,
    zf: float,
    beta: float,
) -> float:
    """Max over the forward support of
    |log p_fwd(w) - log p_rev(-w) - log(Zf/Z0) - beta w|.

    A forward atom without a partner at -w in the reverse distribution is a
    structural violation and raises SupportMismatchError.
    """
    log_ratio = math.log(zf / z0)
    worst = 0.0
    for w, p in fwd.atoms:
        q = rev.prob_at(-w)
        if q is None:
            raise SupportMismatchError(
                f"no reverse atom at {-w!r} matching forward work {w!r}"
            )
        worst = max(worst, abs(math.log(p) - math.log(q) - log_ratio - beta * w))
    return worst


def jarzynski_sum(dist: WorkDistribution, beta: float) -> float:
    """The exponential work average sum_w p(w) exp(-beta w)."""
    return float(np.dot(dist.probs, np.exp(-beta * dist.works)))
