"""Qubit mapping: bus-to-tree reduction, round-robin symbol allocation,
intra-register placement, board cleanup and orientation tagging."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import LsqcbError
from .ir.types import CircuitDag, RegisterSymbol
from .qcb.board import EXTERN, IO, LOCAL, REGISTER, ROUTE, Cell, Qcb, Segment, neighbours

ROUTE_PREFERRED = "route"
ROTATE_PREFERRED = "rotate"


class MappingError(LsqcbError):
    code = "mapping-failure"


# -- tree ----------------------------------------------------------------------


@dataclass(eq=False)
class TreeNode:
    children: list["TreeNode"] = field(default_factory=list)
    segment: Segment | None = None
    weight: Fraction = Fraction(0)
    capacity: int = 0
    allocated: int = 0
    # merge point on the board, for internal nodes
    at: Cell | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def value(self) -> Fraction:
        if self.is_leaf:
            return self.weight
        return max(c.value for c in self.children)

    @property
    def anchor(self) -> Cell:
        """Lowest board coordinate under this node, used for left-first tie-breaks."""
        if self.segment is not None:
            return (self.segment.row, self.segment.col)
        return min(c.anchor for c in self.children)

    @property
    def remaining(self) -> int:
        return self.capacity - self.allocated

    def leaves(self) -> list["TreeNode"]:
        if self.is_leaf:
            return [self]
        out = []
        for c in self.children:
            out.extend(c.leaves())
        return out

    def propagate(self, k: Fraction) -> None:
        if self.is_leaf:
            self.weight += k
            return
        share = k / len(self.children)
        for c in self.children:
            c.propagate(share)

    def describe(self, depth: int = 0) -> str:
        pad = "  " * depth
        if self.is_leaf:
            s = self.segment
            return f"{pad}{s.kind}@({s.row},{s.col}) w={self.weight} cap={self.capacity}"
        lines = [f"{pad}node@{self.at} v={self.value} cap={self.capacity}"]
        lines.extend(c.describe(depth + 1) for c in self.children)
        return "\n".join(lines)


@dataclass
class RouteTree:
    root: TreeNode | None
    # contracted route graph size, for diagnostics
    graph_nodes: int = 0

    @property
    def leaves(self) -> list[TreeNode]:
        return [] if self.root is None else self.root.leaves()

    @property
    def capacity(self) -> int:
        return 0 if self.root is None else self.root.capacity


def _segment_contacts(qcb: Qcb, seg: Segment) -> set[Cell]:
    """Route cells through which a segment reaches the bus."""
    out: set[Cell] = set()
    if seg.kind == REGISTER:
        for r, c in seg.cells():
            for nb in ((r - 1, c), (r + 1, c)):
                if qcb.is_routeish(nb):
                    out.add(nb)
    elif seg.kind == EXTERN:
        for r, c in seg.bottom_edge:
            if qcb.is_routeish((r + 1, c)):
                out.add((r + 1, c))
    elif seg.kind == IO:
        for r, c in seg.cells():
            if qcb.is_routeish((r - 1, c)):
                out.add((r - 1, c))
    return out


def contract_bus(qcb: Qcb, contacts: Iterable[Cell]) -> dict[Cell, set[Cell]]:
    """Bus graph with non-branching runs collapsed.

    Kept vertices are route cells whose route degree differs from 2 or that
    touch a segment; every other cell lies on a chain between two kept
    vertices and is folded into the edge joining them.
    """
    routes = set(qcb.cells_of(ROUTE))
    contacts = set(contacts)

    def deg(cell: Cell) -> int:
        return sum(1 for nb in neighbours(cell) if nb in routes)

    keep = {c for c in routes if deg(c) != 2 or c in contacts}
    # rings made only of degree-2 cells need one representative
    uncovered = routes - keep
    for comp in qcb.components(uncovered):
        ends = [c for c in comp if any(nb in keep for nb in neighbours(c))]
        if not ends:
            keep.add(min(comp))
    adj: dict[Cell, set[Cell]] = {c: set() for c in keep}
    for start in sorted(keep):
        for nb in neighbours(start):
            if nb not in routes:
                continue
            prev, cur = start, nb
            while cur not in keep:
                nxt = [x for x in neighbours(cur) if x in routes and x != prev]
                if not nxt:
                    break
                prev, cur = cur, nxt[0]
            if cur in keep and cur != start:
                adj[start].add(cur)
                adj[cur].add(start)
    return adj


def build_tree(qcb: Qcb) -> RouteTree:
    """Grow one subtree per non-route segment over the contracted bus and merge
    them where they meet, weighting leaves by the routing space they absorb."""
    segments = sorted(qcb.segments, key=lambda s: (s.row, s.col))
    if not segments:
        return RouteTree(None)
    contact_of = {id(s): _segment_contacts(qcb, s) for s in segments}
    all_contacts = set().union(*contact_of.values())
    adj = contract_bus(qcb, all_contacts)

    trees: list[TreeNode] = []
    owned: list[set[Cell]] = []
    frontier: list[set[Cell]] = []
    for s in segments:
        leaf = TreeNode(segment=s, capacity=s.width * s.height if s.kind == REGISTER else 0)
        trees.append(leaf)
        owned.append(set())
        frontier.append({c for c in contact_of[id(s)] if c in adj})
        if not frontier[-1] and len(segments) > 1:
            raise MappingError(f"{s.kind} at ({s.row},{s.col}) has no bus contact", "disconnected-bus")

    alive = list(range(len(trees)))
    first = True
    while len(alive) > 1:
        claims: dict[Cell, list[int]] = defaultdict(list)
        for i in alive:
            grow = frontier[i] if first else {nb for c in frontier[i] for nb in adj[c]}
            for cell in grow - owned[i]:
                claims[cell].append(i)
        first = False
        if not claims:
            raise MappingError("bus is disconnected", "disconnected-bus")
        owner_of = {c: i for i in alive for c in owned[i]}
        roots = {i: trees[i] for i in alive}
        flagged: list[tuple[Cell, set[int]]] = []
        single: dict[int, set[Cell]] = defaultdict(set)
        for cell in sorted(claims):
            sharers = set(claims[cell])
            if cell in owner_of:
                sharers.add(owner_of[cell])
            if len(sharers) > 1:
                flagged.append((cell, sharers))
            else:
                single[sharers.pop()].add(cell)
        for i in alive:
            owned[i] |= single.get(i, set())
            frontier[i] = set(single.get(i, set()))
        # union-find over subtree indices so merges can chain within a round
        parent = {i: i for i in alive}

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for cell, sharers in flagged:
            groups = sorted({find(i) for i in sharers}, key=lambda i: trees[i].anchor)
            if len(groups) == 1:
                owned[groups[0]].add(cell)
                frontier[groups[0]].add(cell)
                continue
            root = TreeNode(children=[trees[g] for g in groups], at=cell)
            root.capacity = sum(trees[g].capacity for g in groups)
            new = groups[0]
            for g in groups[1:]:
                parent[g] = new
                owned[new] |= owned[g]
                frontier[new] |= frontier[g]
            owned[new].add(cell)
            frontier[new].add(cell)
            trees[new] = root
            root.propagate(Fraction(1))
        for i, cells in single.items():
            for _ in cells:
                roots[i].propagate(Fraction(1))
        alive = [i for i in alive if find(i) == i]
    return RouteTree(trees[alive[0]], graph_nodes=len(adj))


# -- allocation ---------------------------------------------------------------


def contention(dag: CircuitDag) -> dict[tuple[RegisterSymbol, RegisterSymbol], int]:
    """Number of distinct nodes in which each pair of symbols co-occurs."""
    out: dict[tuple[RegisterSymbol, RegisterSymbol], int] = defaultdict(int)
    for node in dag.nodes:
        for a, b in combinations(sorted(set(node.operands)), 2):
            out[(a, b)] += 1
            out[(b, a)] += 1
    return out


def contention_order(dag: CircuitDag, symbols: Sequence[RegisterSymbol]) -> list[RegisterSymbol]:
    pairs = contention(dag)
    rank = {s: i for i, s in enumerate(symbols)}
    total: dict[RegisterSymbol, int] = defaultdict(int)
    partners: dict[RegisterSymbol, list[RegisterSymbol]] = defaultdict(list)
    for (a, b), n in pairs.items():
        if a in rank and b in rank:
            total[a] += n
            partners[a].append(b)
    done: set[RegisterSymbol] = set()
    order: list[RegisterSymbol] = []
    while len(order) < len(symbols):
        head = min((s for s in symbols if s not in done), key=lambda s: (-total[s], rank[s]))
        order.append(head)
        done.add(head)
        for p in sorted(partners[head], key=lambda p: (-pairs[(head, p)], rank[p])):
            if p not in done:
                order.append(p)
                done.add(p)
    return order


def _descend(node: TreeNode) -> TreeNode:
    node.allocated += 1
    if node.is_leaf:
        return node
    options = [c for c in node.children if c.remaining > 0]
    best = min(options, key=lambda c: (c.allocated, -c.value, c.anchor))
    return _descend(best)


def allocate_symbols(tree: RouteTree, dag: CircuitDag) -> dict[Segment, list[RegisterSymbol]]:
    """Assign register symbols to register segments, most-contended first,
    round-robin over the tree (fewest allocated, then highest score, then leftmost)."""
    symbols = list(dag.register_symbols)
    if len(symbols) > tree.capacity:
        raise MappingError(f"{len(symbols)} symbols for {tree.capacity} register patches", "overflow")
    out: dict[Segment, list[RegisterSymbol]] = {}
    for sym in contention_order(dag, symbols):
        leaf = _descend(tree.root)
        out.setdefault(leaf.segment, []).append(sym)
    return out


def _free_runs(n: int, used: set[int]) -> list[tuple[int, int]]:
    runs = []
    i = 0
    while i < n:
        if i in used:
            i += 1
            continue
        j = i
        while j < n and j not in used:
            j += 1
        runs.append((i, j - i))
        i = j
    return runs


def place_within_register(
    segment: Segment, symbols: Sequence[RegisterSymbol], outer_exposed: tuple[bool, bool] = (True, True)
) -> dict[RegisterSymbol, Cell]:
    """Greedy bisection: each symbol splits the largest free run of the register.

    Within that run the patch maximising the net gain in exposed side edges
    wins, then the most central patch, then the leftmost. ``outer_exposed``
    says whether the patches beyond the left and right ends count as open.
    """
    n = segment.width * segment.height
    if len(symbols) > n:
        raise MappingError(f"{len(symbols)} symbols for a register of {n} patches", "overflow")
    used: set[int] = set()
    out: dict[RegisterSymbol, Cell] = {}

    def open_side(j: int) -> bool:
        if j < 0:
            return outer_exposed[0]
        if j >= n:
            return outer_exposed[1]
        return j not in used

    for sym in symbols:
        runs = _free_runs(n, used)
        start, length = max(runs, key=lambda r: (r[1], -r[0]))
        centre = start + (length - 1) / 2

        def gain(p: int) -> int:
            g = int(open_side(p - 1)) + int(open_side(p + 1))
            g -= int(p - 1 in used) + int(p + 1 in used)
            return g

        pos = max(range(start, start + length), key=lambda p: (gain(p), -abs(p - centre), -p))
        used.add(pos)
        out[sym] = (segment.row, segment.col + pos)
    return out


# -- map, cleanup, orientation ---------------------------------------------------


@dataclass
class QubitMap:
    positions: dict[RegisterSymbol, Cell] = field(default_factory=dict)
    orientation: dict[Cell, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(set(self.positions.values())) != len(self.positions):
            raise MappingError("qubit map is not injective", "mapping-failure")

    def cell(self, sym: RegisterSymbol) -> Cell:
        return self.positions[sym]

    @property
    def cells(self) -> set[Cell]:
        return set(self.positions.values())

    def to_document(self) -> dict:
        return {
            "format_version": 1,
            "symbols": [
                {"symbol": str(s), "cell": list(c), "orientation": self.orientation.get(c, ROTATE_PREFERRED)}
                for s, c in sorted(self.positions.items())
            ],
        }

    @classmethod
    def from_document(cls, doc: Mapping) -> "QubitMap":
        pos = {RegisterSymbol.parse(e["symbol"]): tuple(e["cell"]) for e in doc["symbols"]}
        ori = {tuple(e["cell"]): e["orientation"] for e in doc["symbols"]}
        return cls(pos, ori)


def cleanup_qcb(qcb: Qcb, qmap: QubitMap) -> Qcb:
    """Unmapped register patches become routes; local routes touching the bus join it."""
    qcb = qcb.copy()
    mapped = qmap.cells
    for seg in list(qcb.segments_of(REGISTER)):
        cells = seg.cells()
        if all(c in mapped for c in cells):
            continue
        qcb.remove_segment(seg)
        run: list[Cell] = []
        for cell in cells + [None]:
            if cell is not None and cell in mapped:
                run.append(cell)
                continue
            if run:
                qcb.segments.append(Segment(run[0][0], run[0][1], len(run), 1, REGISTER))
                run = []
            if cell is not None:
                qcb.set(cell, ROUTE)
    changed = True
    while changed:
        changed = False
        for comp in qcb.components(qcb.cells_of(LOCAL)):
            if any(qcb.is_routeish(nb) for c in comp for nb in neighbours(c)):
                for c in comp:
                    qcb.set(c, ROUTE)
                changed = True
    qcb.segments.sort(key=lambda s: (s.row, s.col, s.kind))
    return qcb


def side_cells(cell: Cell, z_sides: str = "NS") -> tuple[list[Cell], list[Cell]]:
    """(Z-boundary neighbours, X-boundary neighbours) of an unrotated patch."""
    r, c = cell
    ns = [(r - 1, c), (r + 1, c)]
    ew = [(r, c - 1), (r, c + 1)]
    return (ns, ew) if z_sides == "NS" else (ew, ns)


def tag_orientation(qcb: Qcb, qmap: QubitMap, z_sides: str = "NS") -> QubitMap:
    """Route-preferred when both an X and a Z side touch the bus, else rotate-preferred."""
    tags = {}
    for cell in qmap.positions.values():
        zs, xs = side_cells(cell, z_sides)
        z_ok = any(qcb.kind(n) == ROUTE for n in zs if qcb.inside(n))
        x_ok = any(qcb.kind(n) == ROUTE for n in xs if qcb.inside(n))
        tags[cell] = ROUTE_PREFERRED if z_ok and x_ok else ROTATE_PREFERRED
    return QubitMap(dict(qmap.positions), tags)


def map_qubits(qcb: Qcb, dag: CircuitDag, z_sides: str = "NS") -> tuple[Qcb, QubitMap, RouteTree]:
    tree = build_tree(qcb)
    positions: dict[RegisterSymbol, Cell] = {}
    for seg, syms in allocate_symbols(tree, dag).items():
        left = (seg.row, seg.col - 1)
        right = (seg.row, seg.col + seg.width)
        exposed = (
            qcb.inside(left) and qcb.kind(left) in (ROUTE, LOCAL),
            qcb.inside(right) and qcb.kind(right) in (ROUTE, LOCAL),
        )
        positions.update(place_within_register(seg, syms, exposed))
    io_cells = sorted(c for s in qcb.segments_of(IO) for c in s.cells())
    if len(io_cells) < len(dag.io):
        raise MappingError(f"{len(dag.io)} IO symbols for {len(io_cells)} IO patches", "overflow")
    for io, cell in zip(dag.io, io_cells):
        positions[io.symbol] = cell
    qmap = QubitMap(positions)
    clean = cleanup_qcb(qcb, qmap)
    return clean, tag_orientation(clean, qmap, z_sides), tree
