import numpy as np

from dataclasses import dataclass

from ..degree_structure import degree_stats
from ..graph import Graph
from ..logger import logger
from .two_k import GenerationError

__all__ = [
    "RewireResult",
    "rewire_to_assortativity",
]


# Random draws are taken from the generator in blocks of this size
_DRAW_BLOCK = 4096


@dataclass(frozen=True, eq=False)
class RewireResult:
    graph: Graph
    achieved_r: float
    initial_r: float
    target_r: float
    steps: int
    accepted_swaps: int
    # False when max_steps ran out (or the degree sequence cannot move r) before reaching the tolerance band
    reached: bool


def rewire_to_assortativity(
    g: Graph,
    target_r: float,
    tolerance: float,
    max_steps: int,
    seed: int,
) -> RewireResult:
    """
    Greedy degree-preserving rewiring. Each step picks two random edges (a, b), (c, d) and proposes either (a, d),
    (c, b) or (a, c), (b, d). A proposal is accepted when it keeps the graph simple and moves
    S = sum over edges of k_u k_v closer to the value that gives target_r; r is affine in S for a fixed degree sequence.
    Stops once |r - target_r| <= tolerance or after max_steps proposals.
    """

    if not (-1.0 <= target_r <= 1.0):
        raise GenerationError(f"target assortativity must lie in [-1, 1], got {target_r}")
    if g.edge_count < 2:
        raise GenerationError("rewiring needs at least 2 edges")

    stats = degree_stats(g)
    initial_r = stats.assortativity

    deg = g.degree
    m = g.edge_count
    mean_q = float(stats.degrees @ stats.q)
    var_q = stats.var_q

    def r_of(s: float) -> float:
        return (s / m - mean_q * mean_q) / var_q if var_q > 0 else 0.0

    if abs(initial_r - target_r) <= tolerance:
        return RewireResult(g, initial_r, initial_r, target_r, 0, 0, True)

    if var_q <= 0:
        logger.warning(f"All edge ends share one degree: r is fixed at 0 and target {target_r} is unreachable")
        return RewireResult(g, initial_r, initial_r, target_r, 0, 0, False)

    u, v = g.edges()
    us, vs = u.tolist(), v.tolist()
    dl = deg.tolist()
    n = g.node_count
    edge_keys = set((u * n + v).tolist())

    s_target = m * (target_r * var_q + mean_q * mean_q)
    s = float(sum(dl[a] * dl[b] for a, b in zip(us, vs)))

    rng = np.random.default_rng(seed)
    steps = 0
    accepted = 0
    reached = False

    while steps < max_steps:
        block = min(_DRAW_BLOCK, max_steps - steps)
        picks = rng.integers(m, size=(block, 2)).tolist()
        flips = rng.integers(2, size=block).tolist()

        for (i, j), flip in zip(picks, flips):
            steps += 1
            if i == j:
                continue

            a, b = us[i], vs[i]
            c, d = (us[j], vs[j]) if flip else (vs[j], us[j])
            # proposal: (a, d), (c, b)
            if a == d or c == b or a == c or b == d:
                continue

            k1, k2 = min(a, d) * n + max(a, d), min(c, b) * n + max(c, b)
            if k1 in edge_keys or k2 in edge_keys:
                continue

            delta = dl[a] * dl[d] + dl[c] * dl[b] - dl[a] * dl[b] - dl[c] * dl[d]
            if abs(s + delta - s_target) >= abs(s - s_target):
                continue

            edge_keys.discard(min(a, b) * n + max(a, b))
            edge_keys.discard(min(c, d) * n + max(c, d))
            edge_keys.add(k1)
            edge_keys.add(k2)
            us[i], vs[i] = a, d
            us[j], vs[j] = c, b
            s += delta
            accepted += 1

            if abs(r_of(s) - target_r) <= tolerance:
                reached = True
                break

        if reached:
            break

    rewired = Graph.from_edges(n, np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64))
    achieved_r = degree_stats(rewired).assortativity

    if reached:
        logger.info(f"Rewired to r={achieved_r:.4f} (target {target_r}) in {steps} steps, {accepted} swaps accepted")
    else:
        logger.warning(
            f"Rewiring stopped at r={achieved_r:.4f} after {steps} steps without reaching target {target_r} "
            f"(tolerance {tolerance})"
        )

    return RewireResult(
        graph=rewired,
        achieved_r=achieved_r,
        initial_r=initial_r,
        target_r=target_r,
        steps=steps,
        accepted_swaps=accepted,
        reached=reached,
    )
