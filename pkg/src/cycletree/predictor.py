"""Predict the infinite shape of the cycle-lift tree from a finite prefix.

Each explored node is annotated with a PredictedShape.  The annotation is a
claim about the node's entire (infinite) subtree:

* grows-forever: a single chain whose length multiplies by p at every level.
* splits-then-grows(s, scope): each lift of the node (all, or all but one)
  splits s more times itself and then its descendants grow forever.  The
  all-but-one form recurs in the exceptional lift, which pins a p-adic
  periodic orbit of the node's length.
* stationary-partial-split(d): the node partially splits and its unique
  same-length lift does so again, forever; m, once certified, gives the
  behaviour of every deeper kd-lift family (splits m-1 times, then grows).
* tails-forever(k, bound): the node grows tails at every level; each level
  has a single same-length lift carrying tails of bounded length.
* grows-then-splits: the p = 3, level-1 special case; the single lift splits
  and analysis continues below it.
* undetermined(beyond, reason): full splitting is known down to
  ``split_known_until``; nothing is claimed past ``beyond_level``.

``analyze`` explores with expand_children only (never a global sweep),
deepens undetermined nodes by doubling their horizon, and assembles an
orbit-length report from the theorem-backed stationary chains.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from enum import Enum

from .arith import IntPoly, iterate_series, mult_order, ord_p, exact_orbit
from .errors import BadReductionError, SeparationError
from .graph import (DEFAULT_BUDGET, DEFAULT_MEMBER_CAP, Cycle, describe_map,
                    map_value, map_value_deriv)
from .lifting import (Behavior, CycleNode, expand_children, make_node,
                      multiplier_valuation)

__all__ = [
    "ShapeKind",
    "Scope",
    "UndeterminedReason",
    "PredictedShape",
    "TreeNode",
    "OrbitChain",
    "OrbitReport",
    "AnalyzedTree",
    "SeparationAnalysis",
    "predict",
    "analyze",
    "separation_analysis",
    "check_corollaries",
    "KdLiftSample",
]


class ShapeKind(str, Enum):
    GROWS_FOREVER = "grows-forever"
    SPLITS_THEN_GROWS = "splits-then-grows"
    STATIONARY_PARTIAL_SPLIT = "stationary-partial-split"
    TAILS_FOREVER = "tails-forever"
    GROWS_THEN_SPLITS = "grows-then-splits"
    UNDETERMINED = "undetermined"


class Scope(str, Enum):
    ALL = "all-lifts"
    ALL_BUT_ONE = "all-but-one-lift"


class UndeterminedReason(str, Enum):
    CASE3_AB = "case3-ab"
    PARTIAL_SPLIT_HORIZON = "partial-split-horizon"
    PATHOLOGICAL_SUSPECT = "pathological-suspect"


@dataclass(frozen=True, slots=True)
class PredictedShape:
    kind: ShapeKind
    splits: int | None = None  # lifts split this many times each (then grow)
    scope: Scope | None = None
    d: int | None = None
    m: int | None = None  # certified kd-family rule for stationary partial chains
    tail_bound: int | None = None
    beyond_level: int | None = None  # deepest level at which behaviour is known
    reason: UndeterminedReason | None = None
    split_known_until: int | None = None  # full splitting holds through this level

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "splits": self.splits,
            "scope": self.scope.value if self.scope else None,
            "d": self.d,
            "m": self.m,
            "tailBound": self.tail_bound,
            "beyondLevel": self.beyond_level,
            "reason": self.reason.value if self.reason else None,
            "splitKnownUntil": self.split_known_until,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PredictedShape":
        return cls(
            kind=ShapeKind(d["kind"]),
            splits=d.get("splits"),
            scope=Scope(d["scope"]) if d.get("scope") else None,
            d=d.get("d"),
            m=d.get("m"),
            tail_bound=d.get("tailBound"),
            beyond_level=d.get("beyondLevel"),
            reason=UndeterminedReason(d["reason"]) if d.get("reason") else None,
            split_known_until=d.get("splitKnownUntil"),
        )

    def describe(self) -> str:
        k = self.kind
        if k is ShapeKind.GROWS_FOREVER:
            return "grows forever"
        if k is ShapeKind.SPLITS_THEN_GROWS:
            who = "every lift" if self.scope is Scope.ALL else "all lifts but one"
            tail = "" if self.scope is Scope.ALL else "; the exception repeats this"
            return f"{who} splits {self.splits}x then grows{tail}"
        if k is ShapeKind.STATIONARY_PARTIAL_SPLIT:
            rule = f", kd-lifts split {self.m - 1}x then grow" if self.m is not None else ""
            return f"stationary partial split (d={self.d}{rule})"
        if k is ShapeKind.TAILS_FOREVER:
            return f"grows tails forever (tail length <= {self.tail_bound})"
        if k is ShapeKind.GROWS_THEN_SPLITS:
            return "grows once, then the lift splits"
        return (f"undetermined beyond level {self.beyond_level} "
                f"({self.reason.value}; splits through level {self.split_known_until})")


@functools.lru_cache(maxsize=4096)
def _grows_forever() -> PredictedShape:
    return PredictedShape(ShapeKind.GROWS_FOREVER)


@functools.lru_cache(maxsize=4096)
def _splits_then_grows(s: int, scope: Scope) -> PredictedShape:
    return PredictedShape(ShapeKind.SPLITS_THEN_GROWS, splits=s, scope=scope)


@functools.lru_cache(maxsize=4096)
def _stationary_partial(d: int, m: int | None = None) -> PredictedShape:
    return PredictedShape(ShapeKind.STATIONARY_PARTIAL_SPLIT, d=d, m=m)


@functools.lru_cache(maxsize=4096)
def _tails_forever(k: int, p: int, level: int) -> PredictedShape:
    return PredictedShape(ShapeKind.TAILS_FOREVER,
                          tail_bound=max(p + (level - 2) * k, 0))


@functools.lru_cache(maxsize=4096)
def _undetermined(beyond: int, reason: UndeterminedReason,
                  split_known_until: int) -> PredictedShape:
    return PredictedShape(ShapeKind.UNDETERMINED, beyond_level=beyond, reason=reason,
                          split_known_until=split_known_until)


def _is_kd_lift(node: CycleNode, parent: CycleNode | None) -> bool:
    return (parent is not None
            and parent.classification is not None
            and parent.classification.behavior is Behavior.PARTIALLY_SPLITS
            and node.length == parent.length * parent.classification.d)


def predict(fmap, p: int, node: CycleNode, parent: CycleNode | None = None) -> PredictedShape:
    """Shape of the subtree below ``node`` from its linearization data.

    ``parent`` supplies context for lifts of partially splitting cycles (the
    horizon rule needs the parent's level and d); pass the explored parent
    when available.  Pure: never expands the node.
    """
    if node.lin is None:
        raise ValueError("the level-0 root has no prediction")
    n, k = node.level, node.length
    beh = node.classification.behavior

    if beh is Behavior.GROWS_TAILS:
        return _tails_forever(k, p, n)

    if beh is Behavior.GROWS:
        if n >= 2 or p > 3:
            return _grows_forever()
        # p = 3, level 1: growth continues unless b = c (mod 3), where c is
        # the quadratic coefficient of the iterate at the representative.
        series = iterate_series(fmap, node.rep, k, 2, modulus=p**3, p=p)
        c = series[2] % p
        if node.lin.b_mod_p != c:
            return _grows_forever()
        return PredictedShape(ShapeKind.GROWS_THEN_SPLITS)

    if beh is Behavior.PARTIALLY_SPLITS:
        return _stationary_partial(node.classification.d)

    # Splitting cycles.
    if _is_kd_lift(node, parent):
        # Lift of a partially splitting cycle: the valuation of the iterate
        # multiplier, capped at nu*d, decides the whole subtree.
        nu = parent.level
        d = parent.classification.d
        e = multiplier_valuation(fmap, p, node.cycle, cap=nu * d)
        if e.saturated:
            return _undetermined(nu + nu * d, UndeterminedReason.PARTIAL_SPLIT_HORIZON,
                                 split_known_until=nu + nu * d)
        if e.value < 2:
            raise AssertionError("splitting kd-lift must have e >= 2")
        return _splits_then_grows(e.value - 2, Scope.ALL)

    A, B = node.lin.A, node.lin.B
    if not B.saturated and (A.saturated or B.value < A.value):
        return _splits_then_grows(B.value - 1, Scope.ALL)
    if not A.saturated and (B.saturated or A.value <= B.value):
        return _splits_then_grows(A.value - 1, Scope.ALL_BUT_ONE)
    return _undetermined(2 * n, UndeterminedReason.CASE3_AB, split_known_until=2 * n)


@dataclass(frozen=True, slots=True)
class TreeNode:
    """Flat, serializable view of one analyzed node."""

    id: int
    parent: int | None
    level: int
    length: int
    rep: int
    classification: str | None
    d: int | None
    A: int | None
    B: int | None
    Asat: bool | None
    Bsat: bool | None
    prediction: PredictedShape | None
    bad_reduction: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "parent": self.parent,
            "level": self.level,
            "length": self.length,
            "rep": self.rep,
            "class": self.classification,
            "d": self.d,
            "A": self.A,
            "B": self.B,
            "Asat": self.Asat,
            "Bsat": self.Bsat,
            "prediction": self.prediction.to_dict() if self.prediction else None,
            "badReduction": self.bad_reduction,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        pred = d.get("prediction")
        return cls(d["id"], d["parent"], d["level"], d["length"], d["rep"],
                   d["class"], d.get("d"), d.get("A"), d.get("B"),
                   d.get("Asat"), d.get("Bsat"),
                   PredictedShape.from_dict(pred) if pred else None,
                   bool(d.get("badReduction", False)))


@dataclass(frozen=True)
class OrbitChain:
    """A stationary chain certifying a p-adic periodic orbit."""

    length: int
    kind: str  # "partial-split" | "exceptional-split" | "grows-tails"
    node_id: int
    level: int

    def to_dict(self) -> dict:
        return {"length": self.length, "kind": self.kind,
                "node": self.node_id, "level": self.level}

    @classmethod
    def from_dict(cls, d: dict) -> "OrbitChain":
        return cls(d["length"], d["kind"], d["node"], d["level"])


@dataclass
class OrbitReport:
    confirmed: list[OrbitChain]
    stable_so_far: list[dict]  # {"length": L, "level": deepest explored}
    undetermined_chains: int
    bound: dict

    def confirmed_lengths(self) -> set[int]:
        return {c.length for c in self.confirmed}

    def to_dict(self) -> dict:
        return {
            "confirmed": [c.to_dict() for c in self.confirmed],
            "stableSoFar": [dict(s) for s in self.stable_so_far],
            "undeterminedChains": self.undetermined_chains,
            "bound": dict(self.bound),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OrbitReport":
        return cls([OrbitChain.from_dict(c) for c in d["confirmed"]],
                   [dict(s) for s in d["stableSoFar"]],
                   d["undeterminedChains"], dict(d["bound"]))


def orbit_bound_statement(p: int) -> dict:
    return {
        "maxLength": p * p,
        "form": f"k*r with k <= {p} and r dividing {p - 1}",
        "p3Exception": p == 3,
    }


@dataclass
class AnalyzedTree:
    p: int
    map_desc: dict
    max_level: int
    budget: int
    determined: bool
    budget_exceeded: bool
    nodes: list[TreeNode]
    orbits: OrbitReport
    bad_reduction_classes: list[int] = field(default_factory=list)

    def node_by_id(self, node_id: int) -> TreeNode:
        return self.nodes[node_id]

    def children_of(self, node_id: int) -> list[TreeNode]:
        return [n for n in self.nodes if n.parent == node_id]

    def to_dict(self) -> dict:
        out = {
            "prime": self.p,
            "poly": self.map_desc.get("poly", self.map_desc),
            "maxLevel": self.max_level,
            "budget": self.budget,
            "determined": self.determined,
            "budgetExceeded": self.budget_exceeded,
            "nodes": [n.to_dict() for n in self.nodes],
            "orbits": self.orbits.to_dict(),
            "badReductionClasses": list(self.bad_reduction_classes),
        }
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "AnalyzedTree":
        poly = d["poly"]
        desc = {"poly": poly} if isinstance(poly, list) else dict(poly)
        return cls(
            p=d["prime"],
            map_desc=desc,
            max_level=d["maxLevel"],
            budget=d["budget"],
            determined=d["determined"],
            budget_exceeded=d["budgetExceeded"],
            nodes=[TreeNode.from_dict(n) for n in d["nodes"]],
            orbits=OrbitReport.from_dict(d["orbits"]),
            bad_reduction_classes=list(d.get("badReductionClasses", [])),
        )


class _Analysis:
    """Worklist state for one analyze() run."""

    def __init__(self, fmap, p: int, max_level: int, budget: int,
                 max_deepen: int, member_cap: int, deepen_width: int):
        self.fmap = fmap
        self.p = p
        self.max_level = max_level
        self.budget = budget
        self.max_deepen = max_deepen
        self.member_cap = member_cap
        self.deepen_width = deepen_width
        self.deepen_nodes = 0
        self.work = 0
        self.budget_exceeded = False
        self.unresolved = 0
        self.bad_reduction_classes: list[int] = []

    # -- expansion with work accounting -------------------------------------

    def can_expand(self, node: CycleNode) -> bool:
        if node.level >= self.max_level:
            return False
        cost = 3 * node.length * self.p
        if self.work + cost > self.budget:
            self.budget_exceeded = True
            return False
        return True

    def expand(self, node: CycleNode) -> list[CycleNode]:
        self.work += 3 * node.length * self.p
        try:
            return expand_children(self.fmap, self.p, node, budget=self.budget,
                                   member_cap=self.member_cap)
        except BadReductionError:
            node.bad_reduction = True
            return []

    # -- main recursion ------------------------------------------------------

    def process(self, node: CycleNode, parent: CycleNode | None,
                rounds_left: int, round_until: int) -> None:
        shape = predict(self.fmap, self.p, node, parent)
        node.shape = shape
        kind = shape.kind

        if kind in (ShapeKind.GROWS_FOREVER, ShapeKind.TAILS_FOREVER):
            return
        if kind is ShapeKind.SPLITS_THEN_GROWS and shape.scope is Scope.ALL:
            return
        if kind is ShapeKind.SPLITS_THEN_GROWS:  # all-but-one: case 2
            self._process_exceptional_split(node, parent, shape)
            return
        if kind is ShapeKind.GROWS_THEN_SPLITS:
            if not self.can_expand(node):
                self.unresolved += 1
                return
            for child in self.expand(node):
                self.process(child, node, rounds_left, round_until)
            return
        if kind is ShapeKind.STATIONARY_PARTIAL_SPLIT:
            self._process_partial_chain(node, rounds_left)
            return

        # Undetermined splitting (case 3): deepen by doubling the horizon.
        assert kind is ShapeKind.UNDETERMINED
        if node.level < round_until:
            pass  # continue the current deepening round
        elif rounds_left > 0:
            round_until = min(2 * node.level, self.max_level)
            rounds_left -= 1
        else:
            node.shape = _undetermined(shape.beyond_level,
                                       UndeterminedReason.PATHOLOGICAL_SUSPECT,
                                       shape.split_known_until)
            self.unresolved += 1
            return
        if self.deepen_nodes >= self.deepen_width:
            # deepening frontier got too wide; stay honestly undetermined
            self.unresolved += 1
            return
        if not self.can_expand(node):
            self.unresolved += 1
            return
        self.deepen_nodes += 1
        for child in self.expand(node):
            self.process(child, node, rounds_left, round_until)

    def _process_exceptional_split(self, node: CycleNode, parent: CycleNode,
                                   shape: PredictedShape) -> None:
        """Case 2 of the splitting trichotomy: identify the exceptional lift,
        verify it against the closed-form offset, and close the chain.

        The exceptional lift provably repeats case 2 with the same valuation
        at every deeper level, so one expansion certifies the whole chain.
        """
        chain_entry = (parent is not None and parent.shape is not None
                       and getattr(parent.shape, "kind", None) is ShapeKind.SPLITS_THEN_GROWS
                       and parent.shape.scope is Scope.ALL_BUT_ONE
                       and parent.length == node.length)
        if chain_entry:
            return  # parent's expansion already certified this chain
        if not self.can_expand(node):
            return  # annotation alone still determines the subtree
        children = self.expand(node)
        if node.bad_reduction:
            return
        lin = node.lin
        a_val = lin.A.value
        exceptional = [c for c in children
                       if c.lin.B.saturated or c.lin.B.value >= a_val]
        regular = [c for c in children
                   if not (c.lin.B.saturated or c.lin.B.value >= a_val)]
        if len(exceptional) != 1 or any(c.lin.B.value != a_val - 1 for c in regular):
            raise AssertionError("exceptional-lift pattern violated in case 2")
        # Closed-form check: the exceptional offset is -b/(a-1) at precision A.
        unit = (lin.a - 1) // self.p**a_val % self.p
        z = -(lin.b // self.p**a_val) * pow(unit, -1, self.p) % self.p
        if exceptional[0].offset != z:
            raise AssertionError("exceptional lift disagrees with -b/(a-1) offset")
        for child in children:
            self.process(child, node, 0, 0)

    def _process_partial_chain(self, head: CycleNode, rounds_left: int) -> None:
        """Walk the stationary chain below a partially splitting cycle.

        Every level contributes one same-length lift (which partially splits
        again, same d) and kd-lifts whose multiplier valuation is capped at
        nu*d.  The first unsaturated valuation certifies m and settles every
        deeper kd-family; saturated ones stay undetermined and the chain is
        extended, doubling the horizon up to ``max_deepen`` times.
        """
        d = head.classification.d
        node = head
        m_known: int | None = None
        pending: list[CycleNode] = []
        chain_nodes: list[CycleNode] = []
        round_until = 0
        while True:
            node.shape = _stationary_partial(d, m_known)
            chain_nodes.append(node)
            if m_known is not None:
                break
            if node.level >= round_until:
                if node.parent is None or node is head:
                    round_until = min(2 * max(node.level, 1), self.max_level)
                elif rounds_left > 0:
                    rounds_left -= 1
                    round_until = min(2 * node.level, self.max_level)
                else:
                    break
            if not self.can_expand(node):
                break
            children = self.expand(node)
            if node.bad_reduction:
                break
            k_child = None
            for child in children:
                if child.length == node.length:
                    k_child = child
                    continue
                shape = predict(self.fmap, self.p, child, node)
                child.shape = shape
                if shape.kind is ShapeKind.UNDETERMINED:
                    pending.append(child)
                else:
                    e_own = (1 if shape.kind is ShapeKind.GROWS_FOREVER
                             else shape.splits + 2)
                    if m_known is None:
                        m_known = e_own
                    elif m_known != e_own:
                        raise AssertionError(
                            "kd-lifts of one chain disagree on the certified m")
            if k_child is None or k_child.classification.behavior is not Behavior.PARTIALLY_SPLITS:
                raise AssertionError("partial split lost its same-length lift")
            if k_child.classification.d != d:
                raise AssertionError("partial split changed d along the chain")
            node = k_child
        if m_known is not None:
            for visited in chain_nodes:
                visited.shape = _stationary_partial(d, m_known)
        deferred = []
        for child in pending:
            nu = child.parent.level
            if m_known is not None and nu * d > m_known:
                # the separation rule transfers m to this level
                if m_known == 1:
                    child.shape = _grows_forever()
                else:
                    child.shape = _splits_then_grows(m_known - 2, Scope.ALL)
            else:
                deferred.append(child)
        for child in deferred:
            # below the transfer horizon: fall back to deepening by expansion
            self.process(child, child.parent, self.max_deepen, 0)
        if m_known is None and not pending:
            # chain stopped before any kd-lift was examined
            self.unresolved += 1


def _expand_root(fmap, p: int, budget: int, member_cap: int) -> CycleNode:
    """Level-0 root plus its level-1 children from direct enumeration."""
    from .graph import enumerate_level

    root = CycleNode(Cycle(0, 1, 0, (0,)), None, None, expanded=True)
    level1 = enumerate_level(fmap, p, 1, budget=budget, member_cap=member_cap)
    for cyc in level1.cycles:
        child = make_node(fmap, p, cyc, offset=cyc.rep, start=cyc.rep)
        child.parent = root
        root.children.append(child)
    return root


def analyze(fmap, p: int, max_level: int = 9, budget: int = DEFAULT_BUDGET,
            max_deepen: int = 3, member_cap: int = DEFAULT_MEMBER_CAP,
            deepen_width: int = 4096) -> AnalyzedTree:
    """Explore the lift tree with expand_children, annotate every node with
    its predicted shape, and report possible p-adic orbit lengths.

    ``deepen_width`` bounds how many undetermined nodes one run will deepen;
    past it the frontier is reported undetermined as-is (perpetually splitting
    maps would otherwise force exponential exploration).
    """
    analysis = _Analysis(fmap, p, max_level, budget, max_deepen, member_cap,
                         deepen_width)
    try:
        root = _expand_root(fmap, p, budget, member_cap)
    except BadReductionError:
        root = CycleNode(Cycle(0, 1, 0, (0,)), None, None, expanded=True)
        root.bad_reduction = True
        analysis.unresolved += 1
    for child in root.children:
        analysis.process(child, None, max_deepen, 0)

    if not isinstance(fmap, IntPoly):
        analysis.bad_reduction_classes = [
            x for x in range(p) if fmap.den.eval_mod(x, p) == 0]

    # Flatten breadth-first with children in rep order.
    nodes: list[TreeNode] = []
    order: list[tuple[CycleNode, int | None]] = [(root, None)]
    i = 0
    while i < len(order):
        cnode, parent_id = order[i]
        nid = i
        lin = cnode.lin
        cls = cnode.classification
        nodes.append(TreeNode(
            id=nid,
            parent=parent_id,
            level=cnode.level,
            length=cnode.length,
            rep=cnode.rep,
            classification=cls.behavior.value if cls else None,
            d=cls.d if cls else None,
            A=lin.A.value if lin else None,
            B=lin.B.value if lin else None,
            Asat=lin.A.saturated if lin else None,
            Bsat=lin.B.saturated if lin else None,
            prediction=cnode.shape,
            bad_reduction=cnode.bad_reduction,
        ))
        for child in cnode.children:
            order.append((child, nid))
        i += 1

    # Orbit report: heads of theorem-backed stationary chains.
    confirmed: list[OrbitChain] = []
    cycle_nodes = [cn for cn, _ in order]
    for nid, (cnode, parent_id) in enumerate(order):
        if cnode.classification is None or cnode.shape is None:
            continue
        parent = cnode.parent
        beh = cnode.classification.behavior
        kind = cnode.shape.kind if isinstance(cnode.shape, PredictedShape) else None
        if beh is Behavior.PARTIALLY_SPLITS:
            if not (parent and parent.classification
                    and parent.classification.behavior is Behavior.PARTIALLY_SPLITS
                    and parent.length == cnode.length):
                confirmed.append(OrbitChain(cnode.length, "partial-split", nid, cnode.level))
        elif beh is Behavior.GROWS_TAILS:
            if not (parent and parent.classification
                    and parent.classification.behavior is Behavior.GROWS_TAILS
                    and parent.length == cnode.length):
                confirmed.append(OrbitChain(cnode.length, "grows-tails", nid, cnode.level))
        elif (kind is ShapeKind.SPLITS_THEN_GROWS
              and cnode.shape.scope is Scope.ALL_BUT_ONE):
            parent_shape = parent.shape if parent else None
            if not (isinstance(parent_shape, PredictedShape)
                    and parent_shape.kind is ShapeKind.SPLITS_THEN_GROWS
                    and parent_shape.scope is Scope.ALL_BUT_ONE
                    and parent.length == cnode.length):
                confirmed.append(OrbitChain(cnode.length, "exceptional-split", nid, cnode.level))

    for chain in confirmed:
        if chain.length > p * p:
            raise AssertionError(f"confirmed orbit length {chain.length} exceeds p^2")
        if p > 3 and not _has_orbit_form(chain.length, p):
            raise AssertionError(f"confirmed orbit length {chain.length} violates k*r form")

    stable: dict[int, int] = {}
    undetermined_count = 0
    for cnode in cycle_nodes:
        if (isinstance(cnode.shape, PredictedShape)
                and cnode.shape.kind is ShapeKind.UNDETERMINED
                and not cnode.expanded):
            undetermined_count += 1
            lvl = stable.get(cnode.length, 0)
            stable[cnode.length] = max(lvl, cnode.level)

    orbits = OrbitReport(
        confirmed=sorted(confirmed, key=lambda c: (c.length, c.node_id)),
        stable_so_far=[{"length": L, "level": lvl} for L, lvl in sorted(stable.items())],
        undetermined_chains=undetermined_count,
        bound=orbit_bound_statement(p),
    )
    determined = analysis.unresolved == 0 and not analysis.budget_exceeded
    return AnalyzedTree(
        p=int(p),
        map_desc=describe_map(fmap),
        max_level=max_level,
        budget=budget,
        determined=determined,
        budget_exceeded=analysis.budget_exceeded,
        nodes=nodes,
        orbits=orbits,
        bad_reduction_classes=analysis.bad_reduction_classes,
    )


def _has_orbit_form(c: int, p: int) -> bool:
    """c = k*r with k <= p and r | p-1."""
    for r in range(1, p):
        if (p - 1) % r == 0 and c % r == 0 and c // r <= p:
            return True
    return False


# ---------------------------------------------------------------------------
# Separation of cycles from an exact integer periodic point.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeparationAnalysis:
    """Behaviour of cycles separating from an integer periodic point.

    With h the (k*d)-th iterate: in the generic case (h'(alpha) != 1 with
    m = ord_p(h'(alpha) - 1)), a cycle separating at level n+1 with n > m/d
    stays the same length until level n+m and then grows.  In the
    pathological case (h'(alpha) = 1), with ell the first index >= 2 whose
    iterate Taylor coefficient at alpha is nonzero and m its valuation,
    separations at level n+1 with n > m split n(ell-1) + (m-1) times.
    """

    alpha: int
    k: int
    d: int
    multiplier: int  # h'(alpha), exact
    pathological: bool
    m: int
    ell: int | None
    taylor: tuple[int, ...]  # exact iterate coefficients at alpha, index 0..order

    def formula_splits(self, sep_n: int) -> int:
        """The split-count formula, with no validity gating."""
        if self.pathological:
            return sep_n * (self.ell - 1) + self.m - 1
        return self.m - 1

    def split_count(self, sep_n: int) -> int:
        """Splits before growth for a cycle separating at level sep_n + 1."""
        if not self.valid_at(sep_n):
            raise SeparationError(f"rule not applicable at separation index {sep_n}")
        return self.formula_splits(sep_n)

    def valid_at(self, sep_n: int) -> bool:
        if self.pathological:
            return sep_n > self.m
        return sep_n * self.d > self.m

    def min_splits(self, sep_n: int) -> int:
        """Lower bound on splits when the exact rule is not applicable."""
        if self.pathological:
            return sep_n * self.ell - 1
        return 0

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "k": self.k,
            "d": self.d,
            "pathological": self.pathological,
            "m": self.m,
            "ell": self.ell,
        }


def separation_analysis(f: IntPoly, p: int, alpha: int, k: int,
                        max_order: int = 64) -> SeparationAnalysis:
    """Analyze the cycles separating from the exact periodic point alpha.

    Verifies that alpha has exact period k over the integers and that the
    multiplier is a unit mod p; raises otherwise.
    """
    orbit = exact_orbit(f, alpha, k)  # NotPeriodicError on failure
    fprime = f.derivative()
    g1 = 1
    for x in orbit:
        g1 *= fprime(x)
    if g1 % p == 0:
        raise SeparationError("derivative vanishes mod p on the orbit (tails case)")
    d = mult_order(g1 % p, p)
    h1 = g1**d
    order = max(d, 2)
    taylor = iterate_series(f, alpha, k * d, order)
    if taylor[1] != h1:
        raise AssertionError("iterate series disagrees with multiplier product")
    if h1 != 1:
        m = 0
        v = h1 - 1
        while v % p == 0:
            v //= p
            m += 1
        return SeparationAnalysis(alpha, k, d, h1, False, m, None, tuple(taylor))
    if f.degree <= 1:
        raise SeparationError("f is linear with unit multiplier; no separation rule")
    while True:
        ell = next((i for i in range(2, len(taylor)) if taylor[i] != 0), None)
        if ell is not None:
            break
        if order >= max_order:
            raise SeparationError(
                f"no nonzero iterate coefficient up to order {order}")
        order = min(2 * order, max_order)
        taylor = iterate_series(f, alpha, k * d, order)
    if d > 1 and ell % d != 1:
        # commuting compositions force the first nonzero index = 1 mod d
        raise AssertionError(f"first nonzero iterate coefficient at {ell}, "
                             f"violating ell = 1 (mod {d})")
    m = 0
    v = taylor[ell]
    while v % p == 0:
        v //= p
        m += 1
    return SeparationAnalysis(alpha, k, d, h1, True, m, ell, tuple(taylor))


# ---------------------------------------------------------------------------
# Runtime-checkable consequences of the multiplier identities.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KdLiftSample:
    """A kd-lift of a partially splitting k-cycle at level ``parent_level``."""

    parent_level: int
    k: int
    d: int
    child_rep: int
    child_length: int


def check_identity_sample(fmap, p: int, sample: KdLiftSample) -> dict:
    """Evaluate both sides of the capped-valuation identity

        min(ord_p(h(y) - y) - n, n*d) = min(ord_p(h'(y) - 1), n*d)

    for one kd-lift y, where h is the (k*d)-th iterate and n the parent level.
    """
    n, d, kd = sample.parent_level, sample.d, sample.child_length
    if kd != sample.k * d:
        raise ValueError("child length must be k*d")
    y = sample.child_rep
    cap = n * d

    big = p ** (n + cap + 1)
    x = y
    for _ in range(kd):
        x = map_value(fmap, x, big, p)
    lhs_ord = ord_p((x - y) % big, p, n + cap + 1)
    lhs = min(lhs_ord.value - n, cap)

    med = p ** (cap + 1)
    a = 1
    x = y
    for _ in range(kd):
        val, der = map_value_deriv(fmap, x, med, p)
        a = a * der % med
        x = val
    rhs_ord = ord_p(a - 1, p, cap + 1)
    rhs = min(rhs_ord.value, cap)

    return {"sample": sample, "lhs": lhs, "rhs": rhs, "holds": lhs == rhs}


def check_multiplier_divisibility(f: IntPoly, p: int, alpha: int, k: int) -> dict:
    """Divisibility of the early iterate coefficients by (h'(alpha) - 1).

    Applies only when d > 1; with exact arithmetic this checks
    ord_p(h^(i)(alpha)) >= ord_p(h'(alpha) - 1) for i = 2..d, and exact
    vanishing when h'(alpha) = 1.
    """
    sep = separation_analysis(f, p, alpha, k)
    if sep.d <= 1:
        return {"alpha": alpha, "applicable": False, "holds": None}
    failures = []
    for i in range(2, sep.d + 1):
        deriv_i = sep.taylor[i] * math.factorial(i)
        if sep.multiplier == 1:
            ok = deriv_i == 0
        else:
            target = sep.m
            ok = deriv_i % p**target == 0
        if not ok:
            failures.append(i)
    return {"alpha": alpha, "applicable": True, "holds": not failures,
            "failures": failures, "d": sep.d, "m": sep.m}


def check_displacement_congruence(f: IntPoly, p: int, alpha: int, k: int,
                                  max_n: int = 4) -> dict:
    """Near-fixed-point displacement congruence at an exact periodic point:

        h(y) - y = (y - alpha)(h'(alpha) - 1)   mod p^min(n(d+1), 2n+m)

    for ord_p(y - alpha) = n, with h the (k*d)-th iterate.  Applies for d > 1;
    when h'(alpha) = 1 the modulus is p^{n(d+1)}.
    """
    sep = separation_analysis(f, p, alpha, k)
    if sep.d <= 1:
        return {"alpha": alpha, "applicable": False, "holds": None}
    kd = k * sep.d
    failures = []
    checked = 0
    for n in range(1, max_n + 1):
        prec = (n * (sep.d + 1) if sep.multiplier == 1
                else min(n * (sep.d + 1), 2 * n + sep.m))
        modulus = p**prec
        for unit in (1, p - 1):
            y = (alpha + unit * p**n) % modulus
            x = y
            for _ in range(kd):
                x = f.eval_mod(x, modulus)
            lhs = (x - y) % modulus
            rhs = unit * p**n * (sep.multiplier - 1) % modulus
            checked += 1
            if lhs != rhs:
                failures.append((n, unit))
    return {"alpha": alpha, "applicable": True, "holds": not failures,
            "checked": checked, "failures": failures}


def check_corollaries(fmap, p: int, samples: list[KdLiftSample],
                      periodic_points: list[tuple[int, int]] | None = None) -> dict:
    """Check the capped-valuation identity on every sample and, when exact
    periodic points (alpha, k) are supplied, the multiplier divisibility law
    and the displacement congruence.
    """
    results = [check_identity_sample(fmap, p, s) for s in samples]
    failures = [r for r in results if not r["holds"]]
    prop = []
    displacement = []
    if periodic_points:
        for alpha, k in periodic_points:
            prop.append(check_multiplier_divisibility(fmap, p, alpha, k))
            displacement.append(check_displacement_congruence(fmap, p, alpha, k))
    prop_failures = [r for r in prop if r["applicable"] and not r["holds"]]
    disp_failures = [r for r in displacement
                     if r["applicable"] and not r["holds"]]
    return {
        "identity": {"checked": len(results), "failures": len(failures),
                     "details": failures},
        "divisibility": {"checked": len(prop), "failures": len(prop_failures),
                        "details": prop_failures},
        "displacement": {"checked": len(displacement),
                         "failures": len(disp_failures),
                         "details": disp_failures},
        "all_hold": not failures and not prop_failures and not disp_failures,
    }
