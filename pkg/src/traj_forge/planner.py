#!/usr/bin/env python3
# 🌀 Eidosian Trajectory Planner
"""
Trajectory sampling over an occupancy grid.

The planner turns a map into camera trajectories in four stages:

1. :func:`build_graph` places random nodes in safe free space and links
   node pairs with :func:`rrt_star`.
2. :func:`sample_loop` walks the graph until it closes a cycle.
3. :func:`smooth_path` runs a centripetal Catmull–Rom spline through the
   loop, falling back to straight segments wherever the spline collides.
4. :func:`randomize_poses` walks the smoothed path with random step
   lengths and orientation jitter bounded by a :class:`DifficultyProfile`.

Collision queries go through :func:`traj_forge.mapper.safe_mask`: a point
is collision-free when its voxel is free and has the required clearance.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ConfigError, PlanningError
from .geom import Pose, pose_from_body, wrap_angle
from .mapper import STRUCTURE_26, OccupancyGrid, safe_mask, segments_clear
from .utils.seeding import stream

logger = logging.getLogger("traj_forge.planner")

RngLike = Union[int, np.random.Generator]


def _rng(seed: RngLike) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def path_length(path: np.ndarray) -> float:
    """Arc length of a polyline ``(K, 3)``."""
    path = np.asarray(path, dtype=np.float64)
    if len(path) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(path, axis=0), axis=1).sum())


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🌳 RRT*
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class RRTParams:
    step: float = 1.0
    clearance: float = 0.5
    max_iters: int = 5000
    goal_bias: float = 0.05
    rewire_radius: float = 3.0
    gamma: float = 8.0
    shortcut: bool = True


@dataclass(frozen=True, eq=False)
class PlanResult:
    """Outcome of one planning query; ``path`` is empty when ``success`` is False."""

    success: bool
    path: np.ndarray
    cost: float
    iterations: int

    @classmethod
    def failure(cls, iterations: int) -> "PlanResult":
        return cls(False, np.zeros((0, 3)), math.inf, iterations)


def _shortcut(grid: OccupancyGrid, safe: np.ndarray, path: np.ndarray) -> np.ndarray:
    """Greedy pass: from each kept vertex jump to the farthest vertex in sight."""
    kept = [0]
    i = 0
    while i < len(path) - 1:
        later = np.arange(i + 1, len(path))
        clear = segments_clear(grid, safe, np.repeat(path[i][None], len(later), axis=0), path[later])
        visible = later[clear]
        i = int(visible.max()) if len(visible) else i + 1
        kept.append(i)
    return path[kept]


def _tree_path(nodes: np.ndarray, parent: np.ndarray, node: int, goal: np.ndarray) -> np.ndarray:
    chain = []
    while node >= 0:
        chain.append(nodes[node])
        node = int(parent[node])
    return np.vstack([np.asarray(chain[::-1]), goal[None]])


def rrt_star(
    grid: OccupancyGrid,
    start: Sequence[float],
    goal: Sequence[float],
    params: Optional[RRTParams] = None,
    seed: RngLike = 0,
    safe: Optional[np.ndarray] = None,
) -> PlanResult:
    """
    Plan a collision-free polyline between two points.

    Samples are drawn from safe voxels (uniformly inside the voxel) with a
    goal bias. Each new node takes the cheapest collision-free parent in a
    shrinking neighbourhood and then rewires its neighbours, propagating
    cost changes down the tree. Every iteration consumes the same number
    of random draws, so for a fixed stream the best tree cost can only
    drop as ``max_iters`` grows.

    With ``params.shortcut`` the tree path is shortened greedily each time
    the best tree cost improves, and the cheapest path seen so far is
    kept. Both decisions depend only on the iterations already run, so the
    returned cost is non-increasing in ``max_iters`` as well.

    Args:
        grid: Occupancy map
        start: Start position
        goal: Goal position
        params: Planner settings
        seed: Integer seed or generator
        safe: Precomputed :func:`safe_mask` for ``params.clearance``

    Returns:
        :class:`PlanResult`; failure when the endpoints are not connected
        or no path was found within ``max_iters``

    Raises:
        PlanningError: If the start or goal is in collision
    """
    params = params or RRTParams()
    rng = _rng(seed)
    start = np.asarray(start, dtype=np.float64)
    goal = np.asarray(goal, dtype=np.float64)
    if safe is None:
        safe = safe_mask(grid, params.clearance)
    for name, point in (("start", start), ("goal", goal)):
        if not grid.lookup(safe, point[None], outside=False)[0]:
            raise PlanningError(f"{name} {point.tolist()} is in collision at clearance {params.clearance} m")

    if np.linalg.norm(goal - start) < 1e-12:
        return PlanResult(True, start[None].copy(), 0.0, 0)
    if segments_clear(grid, safe, start[None], goal[None])[0]:
        return PlanResult(True, np.stack([start, goal]), float(np.linalg.norm(goal - start)), 0)

    labels, _ = ndimage.label(safe, structure=STRUCTURE_26)
    start_label = labels[tuple(grid.world_to_index(start))]
    if start_label != labels[tuple(grid.world_to_index(goal))]:
        logger.debug("🧭 Start and goal lie in different free-space components")
        return PlanResult.failure(0)
    sample_voxels = np.argwhere(labels == start_label)

    capacity = params.max_iters + 1
    nodes = np.zeros((capacity, 3))
    parent = np.full(capacity, -1, dtype=np.int64)
    cost = np.zeros(capacity)
    children: List[List[int]] = [[] for _ in range(capacity)]
    nodes[0] = start
    count = 1
    goal_links: List[int] = []
    tree_best = math.inf
    best_path: Optional[np.ndarray] = None
    best_cost = math.inf
    res = grid.resolution

    for _ in range(params.max_iters):
        toss, pick = rng.random(), rng.integers(len(sample_voxels))
        jitter = rng.uniform(-0.5, 0.5, 3) * res
        target = goal if toss < params.goal_bias else grid.index_to_world(sample_voxels[pick]) + jitter

        gaps = np.linalg.norm(nodes[:count] - target, axis=1)
        nearest = int(np.argmin(gaps))
        if gaps[nearest] < 1e-9:
            continue
        reach = min(params.step, gaps[nearest])
        new = nodes[nearest] + (target - nodes[nearest]) * (reach / gaps[nearest])
        if not grid.lookup(safe, new[None], outside=False)[0]:
            continue

        radius = params.gamma * (math.log(count + 1) / (count + 1)) ** (1.0 / 3.0)
        radius = max(min(radius, params.rewire_radius), params.step)
        dist = np.linalg.norm(nodes[:count] - new, axis=1)
        near = np.nonzero(dist <= radius)[0]
        if nearest not in near:
            near = np.append(near, nearest)
        clear = segments_clear(grid, safe, nodes[near], np.repeat(new[None], len(near), axis=0))
        if not clear.any():
            continue
        via = np.where(clear, cost[near] + dist[near], np.inf)
        best = int(near[int(np.argmin(via))])

        idx = count
        nodes[idx] = new
        parent[idx] = best
        cost[idx] = cost[best] + dist[best]
        children[best].append(idx)
        count += 1

        # Rewire
        for nb, ok in zip(near, clear):
            nb = int(nb)
            if not ok or nb == best:
                continue
            candidate = cost[idx] + dist[nb]
            if candidate < cost[nb] - 1e-12:
                children[parent[nb]].remove(nb)
                parent[nb] = idx
                children[idx].append(nb)
                delta = cost[nb] - candidate
                pending = [nb]
                while pending:
                    node = pending.pop()
                    cost[node] -= delta
                    pending.extend(children[node])

        to_goal = float(np.linalg.norm(goal - new))
        if to_goal <= params.step and segments_clear(grid, safe, new[None], goal[None])[0]:
            goal_links.append(idx)

        if goal_links:
            links = np.asarray(goal_links)
            totals = cost[links] + np.linalg.norm(nodes[links] - goal, axis=1)
            cheapest = int(np.argmin(totals))
            if totals[cheapest] < tree_best - 1e-12:
                tree_best = float(totals[cheapest])
                path = _tree_path(nodes, parent, int(links[cheapest]), goal)
                if params.shortcut:
                    path = _shortcut(grid, safe, path)
                if path_length(path) < best_cost:
                    best_path, best_cost = path, path_length(path)

    if best_path is None:
        logger.debug(f"🧭 RRT* found no path in {params.max_iters} iterations")
        return PlanResult.failure(params.max_iters)
    return PlanResult(True, best_path, best_cost, params.max_iters)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🕸️ Trajectory graph
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True, eq=False)
class GraphEdge:
    a: int
    b: int
    path: np.ndarray
    cost: float


@dataclass(eq=False)
class TrajectoryGraph:
    """Nodes in safe free space linked by collision-free polylines."""

    nodes: np.ndarray
    edges: List[GraphEdge] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return int(len(self.nodes))

    def neighbors(self) -> Dict[int, List[int]]:
        table: Dict[int, List[int]] = {i: [] for i in range(self.n_nodes)}
        for edge in self.edges:
            table[edge.a].append(edge.b)
            table[edge.b].append(edge.a)
        return {k: sorted(v) for k, v in table.items()}

    def edge(self, a: int, b: int) -> GraphEdge:
        for edge in self.edges:
            if (edge.a, edge.b) in ((a, b), (b, a)):
                return edge
        raise KeyError((a, b))

    def oriented_path(self, a: int, b: int) -> np.ndarray:
        """Polyline of edge ``a-b`` running from node ``a`` to node ``b``."""
        edge = self.edge(a, b)
        return edge.path if edge.a == a else edge.path[::-1]

    def components(self) -> Tuple[int, np.ndarray]:
        """Connected components as ``(count, labels)``."""
        n = self.n_nodes
        if not self.edges:
            return n, np.arange(n)
        rows = [e.a for e in self.edges]
        cols = [e.b for e in self.edges]
        adjacency = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        count, labels = connected_components(adjacency, directed=False)
        return int(count), labels


def _plan_pair(args) -> Tuple[int, int, Optional[np.ndarray], float]:
    grid, safe, a, b, start, goal, params, seed, index = args
    result = rrt_star(grid, start, goal, params, stream(seed, "planner.pair", index), safe=safe)
    return a, b, (result.path if result.success else None), result.cost


def sample_nodes(
    grid: OccupancyGrid, n_nodes: int, clearance: float, seed: RngLike, min_spacing: float = 1.0
) -> np.ndarray:
    """Rejection-sample up to ``n_nodes`` safe positions at least ``min_spacing`` apart."""
    rng = _rng(seed)
    safe = safe_mask(grid, clearance)
    free = np.argwhere(grid.free)
    placed: List[np.ndarray] = []
    if len(free) == 0:
        return np.zeros((0, 3))
    for _ in range(n_nodes * 200):
        if len(placed) == n_nodes:
            break
        point = grid.index_to_world(free[rng.integers(len(free))]) + rng.uniform(-0.5, 0.5, 3) * grid.resolution
        if not grid.lookup(safe, point[None], outside=False)[0]:
            continue
        if placed and np.min(np.linalg.norm(np.asarray(placed) - point, axis=1)) < min_spacing:
            continue
        placed.append(point)
    return np.asarray(placed).reshape(-1, 3)


def build_graph(
    grid: OccupancyGrid,
    n_nodes: int,
    params: Optional[RRTParams] = None,
    seed: int = 0,
    cutoff: float = 40.0,
    workers: int = 1,
) -> TrajectoryGraph:
    """
    Sample nodes and connect every pair within ``cutoff`` meters by RRT*.

    Pair ``k`` (in ``(i, j)`` lexicographic order) plans with stream
    ``(seed, "planner.pair", k)``, so serial and parallel runs give the
    same graph. Pairs that fail to connect are left out.

    Raises:
        PlanningError: If fewer than two nodes can be placed
    """
    params = params or RRTParams(max_iters=800)
    if n_nodes < 2:
        raise PlanningError(f"A trajectory graph needs at least 2 nodes, got {n_nodes}")
    nodes = sample_nodes(grid, n_nodes, params.clearance, stream(seed, "planner.nodes"))
    if len(nodes) < 2:
        raise PlanningError(f"Only {len(nodes)} node(s) could be placed in free space")
    if len(nodes) < n_nodes:
        logger.warning(f"⚠️ Placed {len(nodes)} of {n_nodes} requested graph nodes")

    safe = safe_mask(grid, params.clearance)
    jobs = []
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            if np.linalg.norm(nodes[i] - nodes[j]) <= cutoff:
                jobs.append((grid, safe, i, j, nodes[i], nodes[j], params, seed, len(jobs)))

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_plan_pair, jobs))
    else:
        outcomes = [_plan_pair(job) for job in jobs]

    graph = TrajectoryGraph(nodes)
    for a, b, path, cost in outcomes:
        if path is not None:
            graph.edges.append(GraphEdge(a, b, path, cost))
    logger.info(f"🧭 Trajectory graph: {graph.n_nodes} nodes, {len(graph.edges)}/{len(jobs)} edges")
    return graph


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🔁 Loops
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True, eq=False)
class LoopResult:
    """A closed node walk; ``cycle[0] == cycle[-1]`` on success."""

    success: bool
    cycle: List[int]
    path: np.ndarray


def _two_core(neighbors: Dict[int, List[int]]) -> Dict[int, List[int]]:
    """Repeatedly drop degree < 2 nodes; what remains is where cycles live."""
    core = {k: set(v) for k, v in neighbors.items()}
    pending = [k for k, v in core.items() if len(v) < 2]
    while pending:
        node = pending.pop()
        if node not in core:
            continue
        for other in core.pop(node):
            if other in core:
                core[other].discard(node)
                if len(core[other]) < 2:
                    pending.append(other)
    return {k: sorted(v) for k, v in core.items()}


def sample_loop(graph: TrajectoryGraph, seed: RngLike = 0) -> LoopResult:
    """
    Sample a loop by a non-backtracking random walk.

    The walk starts at a random node and never returns along the edge it
    just used; the first time it reaches a node it has already visited, the
    visited stretch from that node onward is the loop. The loop begins and
    ends at that revisited node, and the lead-in from the walk's first node
    is dropped, so the first node need not lie on the loop.

    Returns:
        :class:`LoopResult`; failure when the graph has no cycle
    """
    rng = _rng(seed)
    core = _two_core(graph.neighbors())
    if not core:
        return LoopResult(False, [], np.zeros((0, 3)))
    starts = sorted(core)
    current = starts[int(rng.integers(len(starts)))]
    walk = [current]
    position = {current: 0}
    previous = -1
    while True:
        options = [n for n in core[current] if n != previous]
        step = options[int(rng.integers(len(options)))]
        previous, current = current, step
        if current in position:
            cycle = walk[position[current] :] + [current]
            break
        position[current] = len(walk)
        walk.append(current)

    pieces = [graph.oriented_path(a, b) for a, b in zip(cycle[:-1], cycle[1:])]
    path = np.vstack([pieces[0]] + [piece[1:] for piece in pieces[1:]])
    return LoopResult(True, cycle, path)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 〰️ Smoothing
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class SmoothParams:
    samples_per_segment: int = 16
    spacing: float = 0.05
    clearance: float = 0.5


def _dedupe(path: np.ndarray) -> np.ndarray:
    keep = np.ones(len(path), dtype=bool)
    keep[1:] = np.linalg.norm(np.diff(path, axis=0), axis=1) > 1e-9
    return path[keep]


def catmull_rom_segment(p0, p1, p2, p3, samples: int) -> np.ndarray:
    """
    Centripetal Catmull–Rom curve from ``p1`` to ``p2``.

    Returns ``samples + 1`` points including both ends.
    """
    pts = [np.asarray(p, dtype=np.float64) for p in (p0, p1, p2, p3)]

    def knot(ti: float, a: np.ndarray, b: np.ndarray) -> float:
        return ti + max(float(np.linalg.norm(b - a)), 1e-12) ** 0.5

    t0 = 0.0
    t1 = knot(t0, pts[0], pts[1])
    t2 = knot(t1, pts[1], pts[2])
    t3 = knot(t2, pts[2], pts[3])
    t = np.linspace(t1, t2, samples + 1)[:, None]
    a1 = (t1 - t) / (t1 - t0) * pts[0] + (t - t0) / (t1 - t0) * pts[1]
    a2 = (t2 - t) / (t2 - t1) * pts[1] + (t - t1) / (t2 - t1) * pts[2]
    a3 = (t3 - t) / (t3 - t2) * pts[2] + (t - t2) / (t3 - t2) * pts[3]
    b1 = (t2 - t) / (t2 - t0) * a1 + (t - t0) / (t2 - t0) * a2
    b2 = (t3 - t) / (t3 - t1) * a2 + (t - t1) / (t3 - t1) * a3
    curve = (t2 - t) / (t2 - t1) * b1 + (t - t1) / (t2 - t1) * b2
    curve[0], curve[-1] = pts[1], pts[2]
    return curve


def resample(path: np.ndarray, spacing: float) -> np.ndarray:
    """Resample a polyline at uniform arc-length spacing; endpoints are kept exactly."""
    path = np.asarray(path, dtype=np.float64)
    if len(path) < 2:
        return path.copy()
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(path, axis=0), axis=1))])
    total = arc[-1]
    if total <= 0:
        return path[:1].copy()
    count = max(int(math.ceil(total / spacing - 1e-9)), 1)
    s = np.linspace(0.0, total, count + 1)
    out = np.stack([np.interp(s, arc, path[:, axis]) for axis in range(3)], axis=1)
    out[0], out[-1] = path[0], path[-1]
    return out


def smooth_path(
    grid: Optional[OccupancyGrid],
    polyline: np.ndarray,
    params: Optional[SmoothParams] = None,
) -> np.ndarray:
    """
    Spline-smooth a waypoint polyline.

    The curve interpolates every waypoint. Open paths use reflected
    phantom end points; closed paths (first point equals last) wrap
    around. A spline segment that fails the clearance check is replaced by
    the straight waypoint segment. The result is resampled uniformly by
    arc length with the end points preserved.
    """
    params = params or SmoothParams()
    points = _dedupe(np.asarray(polyline, dtype=np.float64).reshape(-1, 3))
    if len(points) < 3:
        return resample(points, params.spacing)

    closed = np.linalg.norm(points[0] - points[-1]) < 1e-9 and len(points) > 3
    if closed:
        before, after = points[-2], points[1]
    else:
        before, after = 2 * points[0] - points[1], 2 * points[-1] - points[-2]
    padded = np.vstack([before, points, after])
    safe = safe_mask(grid, params.clearance) if grid is not None else None

    pieces = [points[:1]]
    fallbacks = 0
    for i in range(len(points) - 1):
        curve = catmull_rom_segment(padded[i], padded[i + 1], padded[i + 2], padded[i + 3], params.samples_per_segment)
        if safe is not None and not segments_clear(grid, safe, curve[:-1], curve[1:]).all():
            curve = points[i : i + 2]
            fallbacks += 1
        pieces.append(curve[1:])
    if fallbacks:
        logger.debug(f"〰️ {fallbacks} spline segment(s) fell back to straight lines")
    return resample(np.vstack(pieces), params.spacing)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🎲 Pose randomisation
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class DifficultyProfile:
    """Per-frame motion bounds; ``dof`` is ``"trans+yaw"`` or ``"6dof"``."""

    name: str
    dof: str
    max_trans: float
    max_angle: float

    @property
    def max_angle_rad(self) -> float:
        return math.radians(self.max_angle)

    @property
    def six_dof(self) -> bool:
        return self.dof == "6dof"


PROFILES: Dict[str, DifficultyProfile] = {
    "easy": DifficultyProfile("easy", "trans+yaw", 0.2, 3.0),
    "medium": DifficultyProfile("medium", "6dof", 0.3, 5.0),
    "hard": DifficultyProfile("hard", "6dof", 0.5, 10.0),
}

# Pitch and roll stay inside this band on 6-DoF profiles
MAX_TILT = math.radians(30.0)


def get_profile(name: str) -> DifficultyProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ConfigError(f"Unknown difficulty '{name}', expected one of {', '.join(PROFILES)}") from None


class _PathWalker:
    """Arc-length lookup of positions and headings along a polyline."""

    def __init__(self, path: np.ndarray):
        self.path = path
        seg = np.diff(path, axis=0)
        self.lengths = np.linalg.norm(seg, axis=1)
        self.arc = np.concatenate([[0.0], np.cumsum(self.lengths)])
        self.total = float(self.arc[-1]) if len(path) > 1 else 0.0

    def position(self, s: float) -> np.ndarray:
        if self.total <= 0:
            return self.path[0].copy()
        return np.array([np.interp(s, self.arc, self.path[:, axis]) for axis in range(3)])

    def heading(self, s: float, fallback: float) -> float:
        if self.total <= 0:
            return fallback
        i = int(np.clip(np.searchsorted(self.arc, s, side="right") - 1, 0, len(self.lengths) - 1))
        # Skip zero-length pieces
        while self.lengths[i] <= 1e-12 and i + 1 < len(self.lengths):
            i += 1
        d = self.path[i + 1] - self.path[i]
        if math.hypot(d[0], d[1]) < 1e-9:
            return fallback
        return math.atan2(d[1], d[0])


def _limit_offset_step(forward: np.ndarray, step: np.ndarray, bound: float) -> float:
    """Largest λ in [0, 1] with ``|forward + λ·step| <= bound``."""
    a = float(step @ step)
    if a <= 0:
        return 0.0
    b = 2.0 * float(forward @ step)
    c = float(forward @ forward) - bound * bound
    if a + b + c <= 0:
        return 1.0
    disc = b * b - 4 * a * c
    if disc < 0:
        return 0.0
    return float(np.clip((-b + math.sqrt(disc)) / (2 * a), 0.0, 1.0))


def randomize_poses(
    polyline: np.ndarray,
    profile: DifficultyProfile,
    seed: RngLike = 0,
    n_frames: Optional[int] = None,
    grid: Optional[OccupancyGrid] = None,
    clearance: float = 0.5,
) -> List[Pose]:
    """
    Walk a polyline with randomised per-frame motion.

    - Forward increments are uniform on ``(0, max_trans]``; closed paths
      wrap around, open paths stop at the end.
    - Yaw follows the path heading with a mean-reverting random step.
    - On 6-DoF profiles pitch and roll drift around zero and a lateral /
      vertical offset random-walks inside a ``max_trans`` ball.
    - Every per-axis angle step is at most ``max_angle`` and every
      per-frame translation at most ``max_trans``.
    - With a ``grid``, an offset that would leave safe space is redrawn and
      finally dropped; on a drop the frame does not advance along the path.

    Args:
        polyline: Waypoints ``(K, 3)``
        profile: Motion bounds
        seed: Integer seed or generator
        n_frames: Frame count; by default one traversal of the path
        grid: Occupancy map for the safety check of offset positions
        clearance: Clearance required for offset positions

    Returns:
        Camera poses, one per frame
    """
    rng = _rng(seed)
    path = np.asarray(polyline, dtype=np.float64).reshape(-1, 3)
    if len(path) == 0:
        raise PlanningError("Cannot randomize poses along an empty path")
    walker = _PathWalker(path)
    closed = walker.total > 0 and len(path) > 2 and np.linalg.norm(path[0] - path[-1]) < 1e-6
    if n_frames is None:
        n_frames = max(int(math.ceil(2.0 * walker.total / profile.max_trans)) + 1, 2)
    safe = safe_mask(grid, clearance) if grid is not None else None

    def is_safe(point: np.ndarray) -> bool:
        return safe is None or bool(grid.lookup(safe, point[None], outside=False)[0])

    max_angle = profile.max_angle_rad
    yaw = walker.heading(0.0, 0.0)
    pitch = roll = 0.0
    s = 0.0
    offset = np.zeros(3)
    base = walker.position(0.0)
    poses = [pose_from_body(base, yaw, pitch, roll)]

    for _ in range(1, n_frames):
        increment = profile.max_trans * (1.0 - rng.random())
        noise = rng.uniform(-1.0, 1.0, 3) * max_angle
        jitter = rng.uniform(-1.0, 1.0, (4, 3)) * profile.max_trans

        next_s = (s + increment) % walker.total if closed else min(s + increment, walker.total)
        next_base = walker.position(next_s)

        new_offset = offset
        if profile.six_dof and walker.total > 0:
            forward = next_base - base
            new_offset = None
            for draw in jitter:
                target = offset + draw
                norm = np.linalg.norm(target)
                if norm > profile.max_trans:
                    target *= profile.max_trans / norm
                lam = _limit_offset_step(forward, target - offset, profile.max_trans)
                candidate = offset + lam * (target - offset)
                if is_safe(next_base + candidate):
                    new_offset = candidate
                    break
            if new_offset is None:
                if is_safe(next_base + offset):
                    new_offset = offset
                else:
                    next_s, next_base, new_offset = s, base, np.zeros(3)

        target_yaw = walker.heading(next_s, float(yaw))
        yaw += float(np.clip(0.5 * wrap_angle(target_yaw - yaw) + noise[0], -max_angle, max_angle))
        if profile.six_dof:
            step_pitch = float(np.clip(-0.2 * pitch + noise[1], -max_angle, max_angle))
            step_roll = float(np.clip(-0.2 * roll + noise[2], -max_angle, max_angle))
            pitch = float(np.clip(pitch + step_pitch, -MAX_TILT, MAX_TILT))
            roll = float(np.clip(roll + step_roll, -MAX_TILT, MAX_TILT))

        s, base, offset = next_s, next_base, new_offset
        poses.append(pose_from_body(base + offset, yaw, pitch, roll))
    return poses
