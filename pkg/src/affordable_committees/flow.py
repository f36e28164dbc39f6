"""Integer max-flow (Dinic) used for affordability and maximin-support checks."""

from __future__ import annotations

from collections import deque


class FlowNetwork:
    """Directed network with integer capacities; build once, solve once."""

    def __init__(self, num_nodes: int) -> None:
        self.num_nodes = num_nodes
        self.graph: list[list[int]] = [[] for _ in range(num_nodes)]
        # edge arrays: head, residual capacity; edge e ^ 1 is the reverse of e
        self.to: list[int] = []
        self.cap: list[int] = []
        self.original: list[int] = []

    def add_edge(self, u: int, v: int, capacity: int) -> int:
        if capacity < 0:
            raise ValueError("capacities must be non-negative")
        e = len(self.to)
        self.to += [v, u]
        self.cap += [capacity, 0]
        self.original += [capacity, 0]
        self.graph[u].append(e)
        self.graph[v].append(e + 1)
        return e

    def flow_on(self, e: int) -> int:
        return self.original[e] - self.cap[e]

    def _bfs(self, s: int, t: int) -> list[int] | None:
        level = [-1] * self.num_nodes
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.graph[u]:
                v = self.to[e]
                if self.cap[e] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level if level[t] >= 0 else None

    def max_flow(self, s: int, t: int) -> int:
        total = 0
        while (level := self._bfs(s, t)) is not None:
            it = [0] * self.num_nodes
            while pushed := self._dfs(s, t, level, it):
                total += pushed
        return total

    def _dfs(self, s: int, t: int, level: list[int], it: list[int]) -> int:
        # iterative augmenting-path search in the level graph
        path: list[int] = []
        u = s
        while True:
            if u == t:
                pushed = min(self.cap[e] for e in path)
                for e in path:
                    self.cap[e] -= pushed
                    self.cap[e ^ 1] += pushed
                return pushed
            edges = self.graph[u]
            while it[u] < len(edges):
                e = edges[it[u]]
                v = self.to[e]
                if self.cap[e] > 0 and level[v] == level[u] + 1:
                    break
                it[u] += 1
            else:
                if u == s:
                    return 0
                level[u] = -1  # dead end
                e = path.pop()
                u = self.to[e ^ 1]
                it[u] += 1
                continue
            path.append(edges[it[u]])
            u = self.to[edges[it[u]]]

    def reachable(self, s: int) -> set[int]:
        """Nodes reachable from ``s`` in the residual graph (source side of a min cut)."""
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.graph[u]:
                v = self.to[e]
                if self.cap[e] > 0 and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen
