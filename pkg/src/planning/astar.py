"""
A* Road Router
----------------
Shortest street routes over a town's intersection grid.

Intersections form a regular grid; a closed intersection blocks every
street through it. Moves are 4-connected along streets.

Features:
    - Optimal routing between intersections
    - Seeded closure of intersections
    - Corner extraction (drop collinear intersections)

Author: Mehmet Demir
"""

import heapq
import logging
from dataclasses import dataclass
from typing import List, Optional, Set, Tuple

import numpy as np


logger = logging.getLogger(__name__)

Cell = Tuple[int, int]


@dataclass
class Node:
    """Node in the search tree"""
    x: int
    y: int
    g: float = float('inf')  # streets travelled from start
    h: float = 0.0  # remaining Manhattan distance
    parent: Optional['Node'] = None

    @property
    def f(self) -> float:
        return self.g + self.h

    def __lt__(self, other: 'Node') -> bool:
        # ties broken on h so equal-cost routes resolve the same way every run
        return (self.f, self.h, self.x, self.y) < (other.f, other.h, other.x, other.y)


class RoadGrid:
    """
    Intersection grid of a town.

    0 = open intersection
    1 = closed
    """

    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.grid = np.zeros((height, width), dtype=np.int8)

    def close(self, x: int, y: int):
        if self.is_valid(x, y):
            self.grid[y, x] = 1

    def close_random(self, rng: np.random.Generator, count: int):
        """Close `count` distinct interior intersections."""
        interior = [(x, y) for y in range(1, self.height - 1) for x in range(1, self.width - 1)]
        picks = rng.choice(len(interior), size=min(count, len(interior)), replace=False)
        for i in sorted(int(p) for p in picks):
            self.close(*interior[i])

    def is_open(self, x: int, y: int) -> bool:
        return self.is_valid(x, y) and self.grid[y, x] == 0

    def is_valid(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def open_cells(self) -> List[Cell]:
        return [(x, y) for y in range(self.height) for x in range(self.width) if self.is_open(x, y)]

    def degree(self, x: int, y: int) -> int:
        """Number of open streets leaving an intersection."""
        return sum(self.is_open(x + dx, y + dy) for dx, dy in AStarRouter.NEIGHBORS_4)

    def to_list(self) -> List[List[int]]:
        return self.grid.tolist()


class AStarRouter:
    """
    A* over the intersection grid.

    Example:
        grid = RoadGrid(8, 8)
        grid.close(3, 3)

        router = AStarRouter(grid)
        path = router.plan((0, 0), (7, 7))
        corners = router.corners(path)
    """

    NEIGHBORS_4 = [
        (-1, 0), (1, 0), (0, -1), (0, 1)
    ]

    def __init__(self, grid: RoadGrid):
        self.grid = grid

    def heuristic(self, x1: int, y1: int, x2: int, y2: int) -> float:
        """Manhattan distance; admissible for 4-connected moves."""
        return float(abs(x2 - x1) + abs(y2 - y1))

    def get_neighbors(self, node: Node) -> List[Cell]:
        return [
            (node.x + dx, node.y + dy)
            for dx, dy in self.NEIGHBORS_4
            if self.grid.is_open(node.x + dx, node.y + dy)
        ]

    def plan(self, start: Cell, goal: Cell) -> List[Cell]:
        """
        Find the shortest intersection sequence from start to goal.

        Returns:
            List of (x, y) grid cells, empty if no route exists
        """
        start_x, start_y = start
        goal_x, goal_y = goal

        if not self.grid.is_open(start_x, start_y) or not self.grid.is_open(goal_x, goal_y):
            logger.debug("route endpoint closed: %s -> %s", start, goal)
            return []

        start_node = Node(start_x, start_y, g=0)
        start_node.h = self.heuristic(start_x, start_y, goal_x, goal_y)

        open_list = [start_node]
        closed_set: Set[Cell] = set()
        nodes = {(start_x, start_y): start_node}

        while open_list:
            current = heapq.heappop(open_list)
            if (current.x, current.y) in closed_set:
                continue

            if current.x == goal_x and current.y == goal_y:
                return self._reconstruct_path(current)

            closed_set.add((current.x, current.y))

            for nx, ny in self.get_neighbors(current):
                if (nx, ny) in closed_set:
                    continue
                new_g = current.g + 1.0
                neighbor = nodes.get((nx, ny))
                if neighbor is None:
                    neighbor = Node(nx, ny, g=new_g,
                                    h=self.heuristic(nx, ny, goal_x, goal_y), parent=current)
                    nodes[(nx, ny)] = neighbor
                    heapq.heappush(open_list, neighbor)
                elif new_g < neighbor.g:
                    # fresh entry; the old one is skipped as stale
                    neighbor = Node(nx, ny, g=new_g, h=neighbor.h, parent=current)
                    nodes[(nx, ny)] = neighbor
                    heapq.heappush(open_list, neighbor)

        logger.debug("no route: %s -> %s", start, goal)
        return []

    def _reconstruct_path(self, goal_node: Node) -> List[Cell]:
        path = []
        current = goal_node
        while current is not None:
            path.append((current.x, current.y))
            current = current.parent
        path.reverse()
        return path

    @staticmethod
    def corners(path: List[Cell]) -> List[Cell]:
        """Keep endpoints and intersections where the route changes direction."""
        if len(path) <= 2:
            return list(path)
        kept = [path[0]]
        for prev, cur, nxt in zip(path, path[1:], path[2:]):
            d_in = (cur[0] - prev[0], cur[1] - prev[1])
            d_out = (nxt[0] - cur[0], nxt[1] - cur[1])
            if d_in != d_out:
                kept.append(cur)
        kept.append(path[-1])
        return kept
