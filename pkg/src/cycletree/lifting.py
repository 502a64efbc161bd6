"""Linearization data of a cycle and the four-way lift classification.

For a k-cycle of f_n through x1, the lift behaviour at level n+1 is governed
by the affine map t -> b + a*t induced on fiber offsets, where

    a = (f^k)'(x1)            (well defined mod p^n)
    b = (f^k(x1) - x1) / p^n  (an integer; here stored mod p^n)

Both are computed exactly by walking the cycle once at working precision
p^{2n}, which is enough for every congruence used downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .arith import IntPoly, Valuation, mult_order, ord_p
from .errors import BudgetExceededError, NotACycleError
from .graph import DEFAULT_BUDGET, DEFAULT_MEMBER_CAP, Cycle, map_value, map_value_deriv

__all__ = [
    "Behavior",
    "Classification",
    "LinearData",
    "CycleNode",
    "compute_lin",
    "compute_lin_at",
    "classify",
    "expand_children",
    "multiplier_valuation",
]


class Behavior(str, Enum):
    GROWS = "grows"
    SPLITS = "splits"
    PARTIALLY_SPLITS = "partially-splits"
    GROWS_TAILS = "grows-tails"


@dataclass(frozen=True, slots=True)
class Classification:
    """Lift behaviour of a cycle; d is set only for partial splits."""

    behavior: Behavior
    d: int | None = None

    def __str__(self) -> str:
        if self.behavior is Behavior.PARTIALLY_SPLITS:
            return f"partially-splits(d={self.d})"
        return self.behavior.value


@dataclass(frozen=True, slots=True)
class LinearData:
    """Slope/intercept of the induced offset map, with capped valuations.

    ``a`` is representative independent mod p^n.  ``b`` is stored as computed
    at one chosen member and is only partly canonical: re-lifting the class to
    another integer shifts it by a multiple of (a - 1), so b mod p^A survives;
    rotating to another member multiplies it by a unit but re-canonicalizing
    re-lifts, so only min(B, A) is fully choice independent.  Predictions
    consume nothing finer: the B < A / A <= B / both-saturated trichotomy and
    B's exact value only when B < A.
    """

    p: int
    level: int
    a: int
    b: int
    A: Valuation  # min(ord_p(a - 1), level), saturation flagged
    B: Valuation  # min(ord_p(b), level), saturation flagged

    @property
    def a_mod_p(self) -> int:
        return self.a % self.p

    @property
    def b_mod_p(self) -> int:
        return self.b % self.p

    @property
    def b_invariant(self) -> int:
        return self.b % self.p ** min(self.A.value, self.level)


def compute_lin_at(fmap, p: int, level: int, length: int, member: int,
                   verify: bool = True) -> LinearData:
    """Linearization data computed from a specific cycle member."""
    if level < 1:
        raise ValueError("linearization data requires level >= 1")
    modulus = p**level
    work = modulus * modulus
    a = 1
    x = member
    if isinstance(fmap, IntPoly):
        # hot path: inline Horner for the value/derivative walk
        rc = tuple(reversed(fmap.coeffs))
        rd = tuple(reversed(fmap.derivative().coeffs))
        for i in range(length):
            der = 0
            for c in rd:
                der = (der * x + c) % work
            val = 0
            for c in rc:
                val = (val * x + c) % work
            a = a * der % work
            x = val
            if verify and i + 1 < length and (x - member) % modulus == 0:
                raise NotACycleError(
                    f"{member} returns after {i + 1} steps, not {length}, "
                    f"at level {level}")
    else:
        for i in range(length):
            val, der = map_value_deriv(fmap, x, work, p)
            a = a * der % work
            x = val
            if verify and i + 1 < length and (x - member) % modulus == 0:
                raise NotACycleError(
                    f"{member} returns after {i + 1} steps, not {length}, "
                    f"at level {level}")
    if (x - member) % modulus != 0:
        raise NotACycleError(f"{member} is not on a {length}-cycle of f_{level}")
    shift = (x - member) % work
    b = (shift // modulus) % modulus
    a %= modulus
    return LinearData(p, level, a, b, ord_p(a - 1, p, level), ord_p(b, p, level))


def compute_lin(fmap, p: int, cycle: Cycle, verify: bool = True) -> LinearData:
    """Linearization data of a cycle, computed at its canonical representative."""
    return compute_lin_at(fmap, p, cycle.level, cycle.length, cycle.rep, verify)


def classify(lin: LinearData, p: int) -> Classification:
    """The four-way lift classification from (a mod p, b mod p)."""
    a, b = lin.a_mod_p, lin.b_mod_p
    if a == 1:
        if b != 0:
            return Classification(Behavior.GROWS)
        return Classification(Behavior.SPLITS)
    if a == 0:
        return Classification(Behavior.GROWS_TAILS)
    return Classification(Behavior.PARTIALLY_SPLITS, mult_order(a, p))


def multiplier_valuation(fmap, p: int, cycle: Cycle, cap: int) -> Valuation:
    """ord_p((f^k)'(x1) - 1) capped at ``cap``, from a high-precision walk.

    The cycle's own LinearData only pins this valuation up to the level, which
    is not enough for the partial-split horizon rule (cap = n*d).
    """
    work = p ** (cap + 1)
    a = 1
    x = cycle.rep
    for _ in range(cycle.length):
        val, der = map_value_deriv(fmap, x, work, p)
        a = a * der % work
        x = val
    return ord_p(a - 1, p, cap)


@dataclass(eq=False, slots=True)
class CycleNode:
    """Tree node: a cycle plus its linearization data and classification.

    ``offset`` is the fiber offset t of this node's walk start relative to its
    parent's canonical representative (None for the root).  Nodes compare by
    identity; the tree mutates them only by attaching children once.
    """

    cycle: Cycle
    lin: LinearData | None
    classification: Classification | None
    children: list["CycleNode"] = field(default_factory=list)
    expanded: bool = False
    offset: int | None = None
    start: int | None = None  # the member the expansion walk started from
    bad_reduction: bool = False
    parent: "CycleNode | None" = field(default=None, repr=False)
    shape: object | None = None  # PredictedShape, attached by the predictor

    @property
    def level(self) -> int:
        return self.cycle.level

    @property
    def length(self) -> int:
        return self.cycle.length

    @property
    def rep(self) -> int:
        return self.cycle.rep


def make_node(fmap, p: int, cycle: Cycle, offset: int | None = None,
              start: int | None = None) -> CycleNode:
    lin = compute_lin(fmap, p, cycle)
    return CycleNode(cycle, lin, classify(lin, p), offset=offset, start=start)


def _expected_child_lengths(classification: Classification, k: int, p: int) -> list[int]:
    b = classification.behavior
    if b is Behavior.GROWS:
        return [p * k]
    if b is Behavior.SPLITS:
        return [k] * p
    if b is Behavior.GROWS_TAILS:
        return [k]
    d = classification.d
    return sorted([k] + [k * d] * ((p - 1) // d))


def expand_children(fmap, p: int, node: CycleNode, budget: int = DEFAULT_BUDGET,
                    member_cap: int = DEFAULT_MEMBER_CAP) -> list[CycleNode]:
    """Children of a node, computed without global enumeration.

    Walks the p residues x1 + p^n t under f^k mod p^{n+1}, groups the induced
    offset map into cycles, and builds one child per offset cycle.  The child
    multiset is asserted against the lift-length law.  Cost is O(k*p) map
    evaluations; the work is charged against ``budget``.
    """
    if node.expanded:
        return node.children
    n, k = node.cycle.level, node.cycle.length
    if k * p > budget:
        raise BudgetExceededError(k * p, budget, what="expansion work units")
    x1 = node.cycle.rep
    base = p**n
    modulus = base * p

    # Induced map on offsets: t -> (f^k(x1 + t p^n) - x1) / p^n  (mod p).
    phi = []
    for t in range(p):
        y = x1 + t * base
        for _ in range(k):
            y = map_value(fmap, y, modulus, p)
        phi.append((y - x1) // base % p)

    # Offsets on cycles of the induced map (p iterations land on a cycle).
    cyclic = set()
    for t in range(p):
        u = t
        for _ in range(p):
            u = phi[u]
        if u not in cyclic:
            cyclic.add(u)
            v = phi[u]
            while v != u:
                cyclic.add(v)
                v = phi[v]

    children = []
    seen = [False] * p
    for t0 in range(p):
        if seen[t0] or t0 not in cyclic:
            continue
        offsets = [t0]
        t = phi[t0]
        while t != t0:
            offsets.append(t)
            t = phi[t]
        for t in offsets:
            seen[t] = True
        r = len(offsets)
        length = r * k
        start = x1 + t0 * base
        members = [start]
        y = map_value(fmap, start, modulus, p)
        while y != start:
            members.append(y)
            y = map_value(fmap, y, modulus, p)
        if len(members) != length:
            raise AssertionError("offset cycle length disagrees with lift length")
        cycle = Cycle(n + 1, length, min(members),
                      tuple(sorted(members)) if length <= member_cap else None)
        children.append(make_node(fmap, p, cycle, offset=t0, start=start))

    # The grows-tails case leaves offsets off any cycle; mark them unseen only.
    children.sort(key=lambda c: c.cycle.rep)
    got = sorted(c.cycle.length for c in children)
    want = _expected_child_lengths(node.classification, k, p)
    if got != want:
        raise AssertionError(
            f"lift-length law violated at level {n}: got {got}, expected {want}")
    for child in children:
        child.parent = node
    node.children = children
    node.expanded = True
    return children
