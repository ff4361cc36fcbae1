"""The seed-option tree and its height, the omniscient adversary's bias horizon.

Every node is a seed.  Its option count is one honest fallback plus ``G``
adversary scores beating the best honest score, where
``Pr[G = j] = a^j (1 - a)``.  A node with two or more options gets one child
per option (red, expanded).  A node with a single option is a forced stop
(red, leaf).  Trees are sampled straight from the offspring law; no VRF is
evaluated.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analytics import RECURRENCE_THRESHOLD, expected_stop_bound, offspring_mean
from .distributions import check_alpha
from .errors import DivergenceError, DomainError
from .seeding import SeedLike, generator

DEFAULT_DEPTH_CAP = 64
DEFAULT_NODE_CAP = 10**6


class _WinnerCounts:
    """Buffered draws of ``G`` with ``Pr[G = j] = a^j (1 - a)``."""

    def __init__(self, alpha: float, rng: np.random.Generator, batch: int = 4096) -> None:
        self.alpha = alpha
        self.rng = rng
        self.batch = batch
        self._buf: list[int] = []

    def __call__(self) -> int:
        if not self._buf:
            # geometric(p) counts trials up to the first success, so subtract one
            self._buf = (self.rng.geometric(1.0 - self.alpha, size=self.batch) - 1).tolist()
            self._buf.reverse()
        return self._buf.pop()


@dataclass
class OptionTree:
    """Array-backed tree; node 0 is the root."""

    option_counts: list[int] = field(default_factory=list)
    parents: list[int] = field(default_factory=list)
    depths: list[int] = field(default_factory=list)
    expanded: list[bool] = field(default_factory=list)
    depth_cap: int = DEFAULT_DEPTH_CAP
    node_cap: int = DEFAULT_NODE_CAP
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.option_counts)

    def add(self, parent: int, depth: int, option_count: int) -> int:
        self.option_counts.append(option_count)
        self.parents.append(parent)
        self.depths.append(depth)
        self.expanded.append(False)
        return len(self.option_counts) - 1

    def children(self, node: int) -> list[int]:
        return [i for i, p in enumerate(self.parents) if p == node]

    def color(self, node: int) -> str:
        """Red once processed (expanded or a forced stop); black if cut off by a cap."""
        if self.expanded[node] or self.option_counts[node] < 2:
            return "red"
        return "black"


def grow_tree(
    alpha: float,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    node_cap: int = DEFAULT_NODE_CAP,
    rng: SeedLike = None,
    *,
    _draw: Optional[_WinnerCounts] = None,
) -> OptionTree:
    """Sample one option tree, breadth first, honouring the depth and node caps."""
    alpha = check_alpha(alpha)
    if depth_cap < 1 or node_cap < 1:
        raise DomainError("caps must be >= 1")
    draw = _draw or _WinnerCounts(alpha, generator(rng))
    tree = OptionTree(depth_cap=depth_cap, node_cap=node_cap)
    tree.add(-1, 0, 1 + draw())
    queue = deque([0])
    while queue:
        node = queue.popleft()
        options = tree.option_counts[node]
        if options < 2:
            continue
        depth = tree.depths[node]
        if depth >= depth_cap or len(tree) + options > node_cap:
            tree.truncated = True
            continue
        tree.expanded[node] = True
        for _ in range(options):
            queue.append(tree.add(node, depth + 1, 1 + draw()))
    return tree


def tree_height(tree: OptionTree) -> int:
    """Longest root-to-leaf path in edges.

    For a truncated tree this is only a lower bound: ``depth_cap`` when the
    depth cap bit, else the deepest node built (see ``tree.truncated``).
    """
    if not tree.option_counts:
        raise DomainError("empty tree")
    h = max(tree.depths)
    if tree.truncated and any(
        d >= tree.depth_cap and c >= 2 for d, c in zip(tree.depths, tree.option_counts)
    ):
        h = max(h, tree.depth_cap)
    return h


@dataclass
class ForcedStopSummary:
    alpha: float
    trials: int
    mean_height_plus_one: float
    std_error: float
    tail_frequencies: dict[int, float]
    bound: Optional[float]
    diverges: bool
    truncated_trees: int
    offspring_histogram: dict[int, int]

    def tail_std_error(self, k: int) -> float:
        p = self.tail_frequencies.get(k, 0.0)
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def possibly_biased(self) -> bool:
        """True when truncation or supercriticality makes the mean a lower bound only."""
        return self.truncated_trees > 0 or self.alpha >= RECURRENCE_THRESHOLD


def forced_stop_stats(
    alpha: float,
    trials: int,
    rng: SeedLike = None,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    node_cap: int = DEFAULT_NODE_CAP,
) -> ForcedStopSummary:
    """Monte Carlo height statistics over ``trials`` independent option trees.

    ``mean_height_plus_one`` upper-bounds the mean time to the first forced stop
    and is reported next to the analytic bound.  Truncated trees count as
    reaching their cap.
    """
    alpha = check_alpha(alpha)
    if trials < 1:
        raise DomainError("trials must be >= 1")
    draw = _WinnerCounts(alpha, generator(rng))
    heights = np.empty(trials, dtype=np.int64)
    hist: dict[int, int] = {}
    truncated = 0
    for t in range(trials):
        tree = grow_tree(alpha, depth_cap, node_cap, _draw=draw)
        heights[t] = tree_height(tree)
        truncated += tree.truncated
        for c in tree.option_counts:
            hist[c - 1] = hist.get(c - 1, 0) + 1
    plus_one = heights + 1
    max_h = int(heights.max())
    tails = {k: float(np.mean(heights >= k)) for k in range(max_h + 2)}
    try:
        bound: Optional[float] = expected_stop_bound(alpha)
        diverges = False
    except DivergenceError:
        bound, diverges = None, True
    se = float(plus_one.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return ForcedStopSummary(
        alpha=alpha,
        trials=trials,
        mean_height_plus_one=float(plus_one.mean()),
        std_error=se,
        tail_frequencies=tails,
        bound=bound,
        diverges=diverges,
        truncated_trees=truncated,
        offspring_histogram=dict(sorted(hist.items())),
    )


def expected_children_per_expanded_node(alpha: float) -> float:
    """Exact ``E[1 + G | G >= 1] = sum_{j>=1} (j+1) a^j (1-a) / a``."""
    return offspring_mean(alpha) / check_alpha(alpha)
