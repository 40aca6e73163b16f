"""Device lattices and elimination-pattern trees.

A pattern tree has one node per physical qumode. Edges point from child to
parent and describe where a node's accumulated amplitude is sent during the
elimination of one matrix row. The *main path* is the accumulation spine;
every other node hangs off it as a short (1 node) or long (2 node) branch.

Coordinates are ``(r, c)`` with ``r = 0`` the row the embedding starts from.

Zigzag layout on an ``R x C`` lattice with ``R <= C`` (otherwise the lattice is
transposed first so the main path follows the longer edge):

* rows are grouped in bands of three; the middle row of each band carries
  the main path, the outer rows are branches of the main node in the same
  column;
* consecutive bands are joined at the far column by a vertical run of two
  main-path nodes, and the direction of travel flips;
* ``R % 3 == 2`` leaves a two-row band (main row plus one branch row);
  ``R % 3 == 1`` leaves a single row that is main path only;
* ``1 x C`` strips degenerate to the chain pattern.
"""

import json
import re
from collections import deque
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Lattice:
    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"lattice needs rows, cols >= 1, got {self.rows}x{self.cols}")

    @property
    def size(self):
        return self.rows * self.cols

    def contains(self, coord):
        r, c = coord
        return 0 <= r < self.rows and 0 <= c < self.cols

    def adjacent(self, a, b):
        return (
            self.contains(a)
            and self.contains(b)
            and abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1
        )

    def transposed(self):
        return Lattice(self.cols, self.rows)

    def __str__(self):
        return f"{self.rows}x{self.cols}"


_DEVICE_RE = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")


def parse_device(device):
    """Parse an ``"RxC"`` device string such as ``"6x6"``."""
    if isinstance(device, Lattice):
        return device
    m = _DEVICE_RE.match(str(device))
    if not m:
        raise ValueError(f"device must look like 'RxC' (e.g. '6x6'), got {device!r}")
    return Lattice(int(m.group(1)), int(m.group(2)))


@dataclass(frozen=True)
class PatternTree:
    """Directed tree over lattice nodes.

    Node ``i`` sits at ``coords[i]``; ``parent[i]`` is its parent index or -1
    for the root. Once ``labeled`` is true, node ``i`` carries BFS label
    ``i + 1`` and is the physical qumode with index ``i``.
    """

    coords: tuple
    parent: tuple
    main_path: tuple
    labeled: bool = False
    lattice: Lattice = None

    @property
    def n_nodes(self):
        return len(self.coords)

    @property
    def start(self):
        return self.main_path[0]

    @property
    def end(self):
        return self.main_path[-1]

    @property
    def root(self):
        roots = [i for i, p in enumerate(self.parent) if p < 0]
        if len(roots) != 1:
            raise ValueError(f"tree has {len(roots)} roots")
        return roots[0]

    @property
    def edges(self):
        return [(i, p) for i, p in enumerate(self.parent) if p >= 0]

    @property
    def labels(self):
        if not self.labeled:
            raise ValueError("tree has not been BFS labeled")
        return list(range(1, self.n_nodes + 1))

    def neighbors(self):
        nbrs = [[] for _ in range(self.n_nodes)]
        for child, par in self.edges:
            nbrs[child].append(par)
            nbrs[par].append(child)
        return nbrs

    def is_main(self):
        mask = np.zeros(self.n_nodes, dtype=bool)
        mask[list(self.main_path)] = True
        return mask

    def branch_depths(self):
        """Tree distance from each node to the nearest main-path node."""
        nbrs = self.neighbors()
        depth = [-1] * self.n_nodes
        queue = deque(self.main_path)
        for v in self.main_path:
            depth[v] = 0
        while queue:
            v = queue.popleft()
            for w in nbrs[v]:
                if depth[w] < 0:
                    depth[w] = depth[v] + 1
                    queue.append(w)
        return depth

    def to_dict(self):
        def lab(i):
            return i + 1 if self.labeled else i

        return {
            "nodes": [
                {"r": int(r), "c": int(c), "label": lab(i) if self.labeled else None}
                for i, (r, c) in enumerate(self.coords)
            ],
            "edges": [[lab(ch), lab(p)] for ch, p in self.edges],
            "main_path": [lab(i) for i in self.main_path],
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _snake(lattice):
    """Boustrophedon walk through the lattice along its longer edge."""
    rows, cols = lattice.rows, lattice.cols
    cells = []
    if cols >= rows:
        for r in range(rows):
            order = range(cols) if r % 2 == 0 else range(cols - 1, -1, -1)
            cells.extend((r, c) for c in order)
    else:
        for c in range(cols):
            order = range(rows) if c % 2 == 0 else range(rows - 1, -1, -1)
            cells.extend((r, c) for r in order)
    return cells


def build_chain_pattern(n, device=None):
    """Chain 1 -> 2 -> ... -> n, the pattern behind triangular meshes.

    With a ``device`` the chain follows a snake walk through the lattice so
    every edge stays lattice-adjacent; otherwise nodes sit on a ``1 x n`` strip.
    """
    if n < 2:
        raise ValueError(f"chain pattern needs n >= 2, got {n}")
    if device is None:
        lattice = Lattice(1, n)
        coords = [(0, i) for i in range(n)]
    else:
        lattice = parse_device(device)
        if lattice.size < n:
            raise ValueError(f"device {lattice} has {lattice.size} nodes, need {n}")
        coords = _snake(lattice)[:n]
    parent = tuple(list(range(1, n)) + [-1])
    return PatternTree(tuple(coords), parent, tuple(range(n)), labeled=True, lattice=lattice)


def _zigzag_rows_le_cols(rows, cols):
    full, rem = divmod(rows, 3)
    main_rows = [3 * b + 1 for b in range(full)]
    if rem == 2:
        main_rows.append(3 * full + 1)
    elif rem == 1:
        main_rows.append(3 * full)

    main = []
    for k, mr in enumerate(main_rows):
        order = range(cols) if k % 2 == 0 else range(cols - 1, -1, -1)
        if main:
            # vertical run joining the previous band at its far column
            r0, e = main[-1]
            main.extend((r, e) for r in range(r0 + 1, mr))
        main.extend((mr, c) for c in order)

    index = {cell: i for i, cell in enumerate(main)}
    coords = list(main)
    parent = [i + 1 for i in range(len(main) - 1)] + [-1]

    def attach(cell, target):
        index[cell] = len(coords)
        coords.append(cell)
        parent.append(index[target])

    main_set = set(main)
    # depth 1: hang off the main node directly below, else above, else beside
    pending = []
    for r in range(rows):
        for c in range(cols):
            cell = (r, c)
            if cell in main_set:
                continue
            for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if nb in main_set:
                    attach(cell, nb)
                    break
            else:
                pending.append(cell)
    # depth 2: nodes cut off from the main path hang off a neighbouring branch
    for cell in pending:
        r, c = cell
        for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if nb in index and nb not in main_set and parent[index[nb]] >= 0 \
                    and coords[parent[index[nb]]] in main_set:
                attach(cell, nb)
                break
        else:
            raise RuntimeError(f"zigzag embedding left {cell} unattached")
    return coords, parent, list(range(len(main)))


def zigzag_embed(device):
    """Embed the main-path/branch template into a 2-D lattice (unlabeled)."""
    lattice = parse_device(device)
    if lattice.size < 2:
        raise ValueError(f"device {lattice} is too small to host a pattern")
    if min(lattice.rows, lattice.cols) == 1:
        chain = build_chain_pattern(lattice.size, lattice)
        return PatternTree(chain.coords, chain.parent, chain.main_path, False, lattice)
    transpose = lattice.rows > lattice.cols
    rows, cols = (lattice.cols, lattice.rows) if transpose else (lattice.rows, lattice.cols)
    coords, parent, main = _zigzag_rows_le_cols(rows, cols)
    if transpose:
        coords = [(c, r) for r, c in coords]
    return PatternTree(tuple(coords), tuple(parent), tuple(main), False, lattice)


def _subtree_sizes(nbrs, root):
    """Sizes of every subtree when the tree is hung from ``root``."""
    n = len(nbrs)
    order, par = [], [-1] * n
    seen = [False] * n
    stack = [root]
    seen[root] = True
    while stack:
        v = stack.pop()
        order.append(v)
        for w in nbrs[v]:
            if not seen[w]:
                seen[w] = True
                par[w] = v
                stack.append(w)
    size = [1] * n
    for v in reversed(order):
        if par[v] >= 0:
            size[par[v]] += size[v]
    return size


def bfs_label(tree):
    """Relabel nodes in breadth-first order from the start point.

    Within a node, children are visited short branch first, then long
    branch, then the main-path successor, so branches near the start get the
    lowest labels.
    """
    nbrs = tree.neighbors()
    is_main = tree.is_main()
    size = _subtree_sizes(nbrs, tree.start)
    order = [tree.start]
    seen = {tree.start}
    head = 0
    while head < len(order):
        v = order[head]
        head += 1
        kids = [w for w in nbrs[v] if w not in seen]
        kids.sort(key=lambda w: (bool(is_main[w]), size[w], tree.coords[w]))
        for w in kids:
            seen.add(w)
            order.append(w)
    if len(order) != tree.n_nodes:
        raise ValueError("pattern tree is not connected")
    new_index = {old: new for new, old in enumerate(order)}
    coords = tuple(tree.coords[old] for old in order)
    parent = tuple(
        new_index[tree.parent[old]] if tree.parent[old] >= 0 else -1 for old in order
    )
    main = tuple(new_index[v] for v in tree.main_path)
    return PatternTree(coords, parent, main, True, tree.lattice)


def select_subpattern(tree, n):
    """Keep the ``n`` lowest-labelled nodes.

    The root moves to the highest-label main-path node that survives.
    """
    if not tree.labeled:
        raise ValueError("select_subpattern needs a BFS-labeled tree")
    if n < 1:
        raise ValueError(f"sub-pattern size must be >= 1, got {n}")
    if n > tree.n_nodes:
        raise ValueError(f"cannot select {n} qumodes from a {tree.n_nodes}-node pattern")
    if n == tree.n_nodes:
        return tree
    parent = tuple(p if 0 <= p < n else -1 for p in tree.parent[:n])
    main = tuple(v for v in tree.main_path if v < n)
    sub = PatternTree(tree.coords[:n], parent, main, True, tree.lattice)
    if sub.root != main[-1]:
        raise RuntimeError("sub-pattern root is not the last retained main-path node")
    return sub


def device_pattern(device, n):
    """Zigzag-embed ``device``, BFS label it and keep ``n`` qumodes."""
    tree = bfs_label(zigzag_embed(device))
    return select_subpattern(tree, n)


def tree_violations(tree):
    """List every structural invariant the tree breaks (empty when valid)."""
    problems = []
    n = tree.n_nodes
    edges = tree.edges
    if len(edges) != n - 1:
        problems.append(f"{len(edges)} edges for {n} nodes")
    try:
        root = tree.root
    except ValueError as exc:
        return problems + [str(exc)]
    if root != tree.end:
        problems.append("root is not the end of the main path")
    for v in range(n):
        seen, u = set(), v
        while u != root:
            if u in seen or u < 0:
                problems.append(f"node {v} does not reach the root")
                break
            seen.add(u)
            u = tree.parent[u]
    lattice = tree.lattice
    if lattice is not None:
        for ch, p in edges:
            if not lattice.adjacent(tree.coords[ch], tree.coords[p]):
                problems.append(f"edge {tree.coords[ch]}->{tree.coords[p]} is not lattice-adjacent")
    if len(set(tree.coords)) != n:
        problems.append("two nodes share a lattice site")
    nbrs = tree.neighbors()
    if max(len(x) for x in nbrs) > 4:
        problems.append("node with tree degree > 4")
    for a, b in zip(tree.main_path, tree.main_path[1:]):
        if tree.parent[a] != b:
            problems.append("main path is not a directed chain toward the end")
            break
    if max(tree.branch_depths()) > 2:
        problems.append("branch node deeper than 2 from the main path")
    if tree.labeled:
        problems.extend(_prefix_problems(nbrs))
    return problems


def _prefix_problems(nbrs):
    # adding node r keeps {0..r} connected iff r touches some lower label
    for r in range(1, len(nbrs)):
        if not any(w < r for w in nbrs[r]):
            return [f"labels 1..{r + 1} induce a disconnected subgraph"]
    return []
