"""Tree decompositions: validation, min-fill heuristic, nicification, PACE I/O."""

from __future__ import annotations

from dataclasses import dataclass

from .instance import Instance

LEAF = "leaf"
INTRODUCE = "introduce"
FORGET = "forget"
JOIN = "join"


class InvalidDecompositionError(ValueError):
    pass


@dataclass(frozen=True)
class TreeDecomposition:
    """Bags connected by tree edges; vertex_count is the underlying graph's |V|."""

    vertex_count: int
    bags: tuple  # tuple of frozensets
    edges: tuple  # tuple of (i, j) bag-index pairs

    def __post_init__(self):
        object.__setattr__(self, "bags", tuple(frozenset(b) for b in self.bags))
        object.__setattr__(self, "edges", tuple((min(i, j), max(i, j)) for i, j in self.edges))

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1


@dataclass(frozen=True)
class TdCheck:
    ok: bool
    condition: str | None = None
    witness: object = None

    def __bool__(self):
        return self.ok


def validate_td(td: TreeDecomposition, inst: Instance) -> TdCheck:
    """Check the three decomposition conditions; report the first violation.

    Conditions: every vertex occurs in some bag; every edge has both endpoints
    in a common bag; the bags containing any one vertex form a connected
    subtree.  A malformed tree shape is reported as condition "tree-structure".
    """
    nb = len(td.bags)
    if nb == 0:
        return TdCheck(False, "tree-structure", "no bags")
    adj = [[] for _ in range(nb)]
    for i, j in td.edges:
        if not (0 <= i < nb and 0 <= j < nb) or i == j:
            return TdCheck(False, "tree-structure", (i, j))
        adj[i].append(j)
        adj[j].append(i)
    if len(td.edges) != nb - 1:
        return TdCheck(False, "tree-structure", "edge count")
    seen = [False] * nb
    stack = [0]
    seen[0] = True
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                stack.append(y)
    if not all(seen):
        return TdCheck(False, "tree-structure", "bag tree disconnected")

    occurrences = [[] for _ in range(inst.vertex_count)]
    for idx, bag in enumerate(td.bags):
        for v in bag:
            if not 0 <= v < inst.vertex_count:
                return TdCheck(False, "tree-structure", f"bag vertex {v} out of range")
            occurrences[v].append(idx)
    for v in range(inst.vertex_count):
        if not occurrences[v]:
            return TdCheck(False, "vertex-coverage", v)
    for u, v, _w in inst.edges:
        if not any(u in bag and v in bag for bag in td.bags):
            return TdCheck(False, "edge-coverage", (u, v))
    for v in range(inst.vertex_count):
        occ = set(occurrences[v])
        start = occurrences[v][0]
        seen_v = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in occ and y not in seen_v:
                    seen_v.add(y)
                    stack.append(y)
        if seen_v != occ:
            return TdCheck(False, "connectivity", v)
    return TdCheck(True)


def min_fill_heuristic(inst: Instance) -> TreeDecomposition:
    """Tree decomposition from a min-fill elimination ordering.

    Repeatedly eliminates the vertex whose neighborhood needs the fewest fill
    edges to become a clique (smallest id on ties).  The width is heuristic,
    not guaranteed optimal.
    """
    n = inst.vertex_count
    nbrs = [set() for _ in range(n)]
    for u, v, _w in inst.edges:
        nbrs[u].add(v)
        nbrs[v].add(u)
    remaining = set(range(n))
    order = []
    bags = []
    while remaining:
        best_v, best_fill = -1, None
        for v in sorted(remaining):
            nv = nbrs[v]
            fill = 0
            for a in nv:
                for b in nv:
                    if a < b and b not in nbrs[a]:
                        fill += 1
            if best_fill is None or fill < best_fill:
                best_v, best_fill = v, fill
                if fill == 0:
                    break
        v = best_v
        nv = sorted(nbrs[v])
        bags.append(frozenset([v] + nv))
        for a in nv:
            for b in nv:
                if a != b:
                    nbrs[a].add(b)
        for a in nv:
            nbrs[a].discard(v)
        nbrs[v] = set()
        remaining.discard(v)
        order.append(v)

    pos = {v: i for i, v in enumerate(order)}
    edges = []
    for i, bag in enumerate(bags):
        later = [pos[u] for u in bag if pos[u] > i]
        if later:
            edges.append((i, min(later)))
    return TreeDecomposition(vertex_count=n, bags=tuple(bags), edges=tuple(edges))


# ---------------------------------------------------------------------------
# Nice tree decompositions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NiceTreeDecomposition:
    """Rooted binary decomposition with only leaf/introduce/forget/join nodes.

    Nodes are numbered so that children precede parents; the root is the last
    node and has an empty bag.  kind[i], vertex[i] (introduced/forgotten
    vertex, or None), children[i], bag[i] and subtree[i] (the set V_t of all
    vertices in bags at or below i) describe node i.
    """

    vertex_count: int
    kinds: tuple
    vertices: tuple
    children: tuple
    bags: tuple
    subtree: tuple

    @property
    def node_count(self) -> int:
        return len(self.kinds)

    @property
    def root(self) -> int:
        return len(self.kinds) - 1

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1

    def as_tree_decomposition(self) -> TreeDecomposition:
        edges = []
        for i, childs in enumerate(self.children):
            for c in childs:
                edges.append((c, i))
        return TreeDecomposition(self.vertex_count, self.bags, tuple(edges))


def subtree_vertices(ntd: NiceTreeDecomposition, node: int) -> frozenset:
    """The set V_t of vertices in the bag of `node` or any bag below it."""
    return ntd.subtree[node]


class _Builder:
    def __init__(self):
        self.kinds = []
        self.vertices = []
        self.children = []
        self.bags = []

    def add(self, kind, vertex, children, bag) -> int:
        self.kinds.append(kind)
        self.vertices.append(vertex)
        self.children.append(tuple(children))
        self.bags.append(frozenset(bag))
        return len(self.kinds) - 1

    def chain(self, top: int, from_bag, to_bag) -> int:
        cur, bag = top, set(from_bag)
        for v in sorted(from_bag - to_bag):
            bag.discard(v)
            cur = self.add(FORGET, v, (cur,), bag)
        for v in sorted(to_bag - from_bag):
            bag.add(v)
            cur = self.add(INTRODUCE, v, (cur,), bag)
        return cur

    def leaf_chain(self, bag) -> int:
        cur = self.add(LEAF, None, (), frozenset())
        return self.chain(cur, frozenset(), bag)


def nicify(td: TreeDecomposition) -> NiceTreeDecomposition:
    """Rewrite a decomposition into an equivalent nice one of the same width.

    Adjacent bags are bridged by forget-then-introduce chains, branching nodes
    become joins over copies of the parent bag, and the root is extended by
    forgetting everything so its bag is empty.
    """
    nb = len(td.bags)
    if nb == 0:
        raise InvalidDecompositionError("decomposition has no bags")
    adj = [[] for _ in range(nb)]
    for i, j in td.edges:
        adj[i].append(j)
        adj[j].append(i)
    if len(td.edges) != nb - 1:
        raise InvalidDecompositionError("bag links do not form a tree")
    parent = [-1] * nb
    order = [0]
    seen = [False] * nb
    seen[0] = True
    for x in order:
        for y in sorted(adj[x]):
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                order.append(y)
    if len(order) != nb:
        raise InvalidDecompositionError("bag links do not form a tree")
    kids = [[] for _ in range(nb)]
    for y in order[1:]:
        kids[parent[y]].append(y)

    b = _Builder()
    top = [-1] * nb
    for t in reversed(order):
        bag = td.bags[t]
        tops = [b.chain(top[c], td.bags[c], bag) for c in kids[t]]
        if not tops:
            top[t] = b.leaf_chain(bag)
        elif len(tops) == 1:
            top[t] = tops[0]
        else:
            cur = tops[-1]
            for prev in reversed(tops[:-1]):
                cur = b.add(JOIN, None, (prev, cur), bag)
            top[t] = cur
    b.chain(top[0], td.bags[0], frozenset())

    subtree = [None] * len(b.kinds)
    for i in range(len(b.kinds)):
        acc = set(b.bags[i])
        for c in b.children[i]:
            acc |= subtree[c]
        subtree[i] = frozenset(acc)
    return NiceTreeDecomposition(
        vertex_count=td.vertex_count,
        kinds=tuple(b.kinds),
        vertices=tuple(b.vertices),
        children=tuple(b.children),
        bags=tuple(b.bags),
        subtree=tuple(subtree),
    )


def nice_violations(ntd: NiceTreeDecomposition, inst: Instance | None = None) -> list:
    """Structural violations of the nice-decomposition invariants (for checks)."""
    out = []
    n = ntd.node_count
    is_child = [False] * n
    for i in range(n):
        kind, bag, childs = ntd.kinds[i], ntd.bags[i], ntd.children[i]
        for c in childs:
            if c >= i:
                out.append((i, "children must precede parents"))
            is_child[c] = True
        if kind == LEAF:
            if childs or bag:
                out.append((i, "leaf must have empty bag and no children"))
        elif kind == INTRODUCE:
            v = ntd.vertices[i]
            if len(childs) != 1 or v in ntd.bags[childs[0]] or bag != ntd.bags[childs[0]] | {v}:
                out.append((i, "bad introduce"))
        elif kind == FORGET:
            v = ntd.vertices[i]
            if len(childs) != 1 or v not in ntd.bags[childs[0]] or bag != ntd.bags[childs[0]] - {v}:
                out.append((i, "bad forget"))
        elif kind == JOIN:
            if len(childs) != 2 or any(ntd.bags[c] != bag for c in childs):
                out.append((i, "bad join"))
        else:
            out.append((i, f"unknown kind {kind}"))
        acc = set(bag)
        for c in childs:
            acc |= ntd.subtree[c]
        if ntd.subtree[i] != acc:
            out.append((i, "bad subtree set"))
    if ntd.bags[ntd.root]:
        out.append((ntd.root, "root bag not empty"))
    if sum(1 for x in is_child[:-1] if not x):
        out.append((None, "multiple roots"))
    if inst is not None:
        check = validate_td(ntd.as_tree_decomposition(), inst)
        if not check:
            out.append((None, f"underlying decomposition invalid: {check.condition}"))
    return out


# ---------------------------------------------------------------------------
# PACE 2017 .td format (1-based vertex ids in files, 0-based internally)
# ---------------------------------------------------------------------------

def td_to_pace(td: TreeDecomposition) -> str:
    lines = [f"s td {len(td.bags)} {td.width + 1} {td.vertex_count}"]
    for i, bag in enumerate(td.bags):
        items = " ".join(str(v + 1) for v in sorted(bag))
        lines.append(f"b {i + 1} {items}".rstrip())
    for i, j in sorted(td.edges):
        lines.append(f"{i + 1} {j + 1}")
    return "\n".join(lines) + "\n"


def td_from_pace(text: str) -> TreeDecomposition:
    header = None
    bags = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "s":
            if header is not None:
                raise InvalidDecompositionError(f"line {lineno}: duplicate header")
            if len(parts) != 5 or parts[1] != "td":
                raise InvalidDecompositionError(f"line {lineno}: malformed 's td' header")
            header = (int(parts[2]), int(parts[3]), int(parts[4]))
        elif parts[0] == "b":
            if header is None:
                raise InvalidDecompositionError(f"line {lineno}: bag before header")
            idx = int(parts[1])
            if idx in bags:
                raise InvalidDecompositionError(f"line {lineno}: duplicate bag {idx}")
            bags[idx] = frozenset(int(x) - 1 for x in parts[2:])
        else:
            if header is None:
                raise InvalidDecompositionError(f"line {lineno}: edge before header")
            if len(parts) != 2:
                raise InvalidDecompositionError(f"line {lineno}: malformed edge line")
            edges.append((int(parts[0]) - 1, int(parts[1]) - 1))
    if header is None:
        raise InvalidDecompositionError("missing 's td' header")
    num_bags, _width1, num_vertices = header
    if set(bags) != set(range(1, num_bags + 1)):
        raise InvalidDecompositionError("bag ids must be 1..num_bags")
    return TreeDecomposition(
        vertex_count=num_vertices,
        bags=tuple(bags[i] for i in range(1, num_bags + 1)),
        edges=tuple(edges),
    )


def load_td(path) -> TreeDecomposition:
    with open(path, "r", encoding="utf-8") as fh:
        return td_from_pace(fh.read())


def save_td(td: TreeDecomposition, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(td_to_pace(td))
