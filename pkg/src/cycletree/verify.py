"""Differential harness: every analytic claim is checked against the oracle.

``verify_map`` builds the exhaustive lift tree, runs the predictor, and then
checks (a) that the analyzed prefix matches the oracle node for node, and
(b) that every annotation's subtree claim holds in the oracle up to its
horizon.  Auxiliary checkers cover the structural laws that do not need the
predictor at all: the lift-length law, the multiplier/offset chain
congruences, the capped-valuation identity on kd-lifts, orbit-length bounds,
and tail-length bounds.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .arith import IntPoly
from .graph import (DEFAULT_BUDGET, BruteTree, _sweep_level, build_tree_bruteforce,
                    map_value, tail_length_by_cycle)
from .lifting import compute_lin_at
from .predictor import (AnalyzedTree, KdLiftSample, Scope, ShapeKind, analyze,
                        check_identity_sample)

__all__ = [
    "RuleStats",
    "VerifyReport",
    "verify_map",
    "random_poly",
    "check_lift_length_law",
    "check_chain_congruences",
    "collect_kd_samples",
    "check_orbit_lengths",
    "check_tail_bounds",
    "oracle_depth",
]


def oracle_depth(p: int, budget: int) -> int:
    """Deepest level enumerable within the point budget."""
    n = 0
    while p ** (n + 1) <= budget:
        n += 1
    return n


def random_poly(rng: random.Random, p: int, max_degree: int = 5) -> IntPoly:
    """Random polynomial with coefficients uniform in [0, p^2)."""
    return IntPoly(rng.randrange(p * p) for _ in range(max_degree + 1))


@dataclass
class RuleStats:
    checked: int = 0
    mismatches: int = 0

    def record(self, ok: bool):
        self.checked += 1
        if not ok:
            self.mismatches += 1


@dataclass
class VerifyReport:
    p: int
    map_desc: dict
    oracle_levels: int
    rules: dict[str, RuleStats] = field(default_factory=dict)
    details: list[str] = field(default_factory=list)

    def stat(self, name: str) -> RuleStats:
        return self.rules.setdefault(name, RuleStats())

    def record(self, name: str, ok: bool, detail: str = ""):
        self.stat(name).record(ok)
        if not ok and len(self.details) < 50:
            self.details.append(f"{name}: {detail}")

    @property
    def mismatches(self) -> int:
        return sum(s.mismatches for s in self.rules.values())

    @property
    def checked(self) -> int:
        return sum(s.checked for s in self.rules.values())

    @property
    def ok(self) -> bool:
        return self.mismatches == 0


class _OracleChecker:
    """Structural subtree checks over a BruteTree, memoized."""

    def __init__(self, tree: BruteTree, p: int):
        self.tree = tree
        self.p = p
        self.top = tree.max_level
        self._memo: dict[tuple, bool] = {}

    def kids(self, level: int, idx: int) -> list[int]:
        return self.tree.children[level][idx]

    def length(self, level: int, idx: int) -> int:
        return self.tree.lengths[level][idx]

    def grows_chain(self, level: int, idx: int) -> bool:
        """Single lift of length p*k at every level below."""
        key = ("grow", level, idx)
        if key in self._memo:
            return self._memo[key]
        ok = True
        while level < self.top:
            kids = self.kids(level, idx)
            want = self.p * self.length(level, idx)
            if len(kids) != 1 or self.length(level + 1, kids[0]) != want:
                ok = False
                break
            level, idx = level + 1, kids[0]
        self._memo[key] = ok
        return ok

    def own_splits_then_grows(self, level: int, idx: int, s: int) -> bool:
        """This cycle splits s more times itself, then all descendants grow."""
        key = ("own", level, idx, s)
        if key in self._memo:
            return self._memo[key]
        if s == 0:
            ok = self.grows_chain(level, idx)
        elif level >= self.top:
            ok = True  # beyond the oracle horizon; vacuous
        else:
            kids = self.kids(level, idx)
            k = self.length(level, idx)
            ok = (len(kids) == self.p
                  and all(self.length(level + 1, c) == k for c in kids)
                  and all(self.own_splits_then_grows(level + 1, c, s - 1) for c in kids))
        self._memo[key] = ok
        return ok

    def full_split_until(self, level: int, idx: int, until: int) -> bool:
        """Every node in the subtree splits, down through level ``until - 1``."""
        key = ("full", level, idx, until)
        if key in self._memo:
            return self._memo[key]
        if level >= min(until, self.top):
            ok = True
        else:
            kids = self.kids(level, idx)
            k = self.length(level, idx)
            ok = (len(kids) == self.p
                  and all(self.length(level + 1, c) == k for c in kids)
                  and all(self.full_split_until(level + 1, c, until) for c in kids))
        self._memo[key] = ok
        return ok

    def exceptional_chain(self, level: int, idx: int, s: int) -> bool:
        """p same-length lifts; all but one split s times then grow; the
        remaining lift repeats the pattern."""
        if level >= self.top:
            return True
        kids = self.kids(level, idx)
        k = self.length(level, idx)
        if len(kids) != self.p or any(self.length(level + 1, c) != k for c in kids):
            return False
        stray = [c for c in kids if not self.own_splits_then_grows(level + 1, c, s)]
        if len(stray) == 0:
            return True  # horizon too shallow to tell the chain apart
        if len(stray) > 1:
            return False
        return self.exceptional_chain(level + 1, stray[0], s)

    def tails_chain(self, level: int, idx: int) -> bool:
        k = self.length(level, idx)
        while level < self.top:
            kids = self.kids(level, idx)
            if len(kids) != 1 or self.length(level + 1, kids[0]) != k:
                return False
            level, idx = level + 1, kids[0]
        return True

    def partial_chain(self, level: int, idx: int, d: int, m: int | None,
                      analyzed: set[tuple[int, int]]) -> bool:
        """Stationary partial-split chain: one k-lift plus (p-1)/d kd-lifts at
        every level; certified kd-lifts split m-1 times then grow."""
        k = self.length(level, idx)
        while level < self.top:
            kids = self.kids(level, idx)
            same = [c for c in kids if self.length(level + 1, c) == k]
            longer = [c for c in kids if self.length(level + 1, c) == k * d]
            if len(same) != 1 or len(longer) != (self.p - 1) // d or \
                    len(kids) != 1 + (self.p - 1) // d:
                return False
            for c in longer:
                if m is not None and level * d > m:
                    if not self.own_splits_then_grows(level + 1, c, m - 1):
                        return False
                elif (level + 1, c) in analyzed:
                    pass  # covered by that node's own annotation
            level, idx = level + 1, same[0]
        return True

    def grows_then_splits(self, level: int, idx: int) -> bool:
        if level >= self.top:
            return True
        kids = self.kids(level, idx)
        k = self.length(level, idx)
        if len(kids) != 1 or self.length(level + 1, kids[0]) != self.p * k:
            return False
        level, idx = level + 1, kids[0]
        if level >= self.top:
            return True
        kids = self.kids(level, idx)
        k = self.length(level, idx)
        return len(kids) == self.p and all(self.length(level + 1, c) == k for c in kids)


def verify_map(fmap, p: int, budget: int = DEFAULT_BUDGET,
               max_level: int | None = None,
               analyzed: AnalyzedTree | None = None,
               oracle: BruteTree | None = None,
               **analyze_opts) -> VerifyReport:
    """Compare the predictor's annotated tree against the brute-force tree.

    ``max_level`` bounds the oracle depth (default: deepest level within the
    point budget).  Precomputed trees may be passed in to share work.
    """
    top = max_level if max_level is not None else oracle_depth(p, budget)
    if oracle is None:
        oracle = build_tree_bruteforce(fmap, p, top, budget=budget)
    if analyzed is None:
        analyzed = analyze(fmap, p, budget=budget, **analyze_opts)
    from .graph import describe_map

    report = VerifyReport(int(p), describe_map(fmap), top)
    checker = _OracleChecker(oracle, p)

    # Locate every analyzed node in the oracle.
    index: dict[int, tuple[int, int] | None] = {}
    analyzed_pos: set[tuple[int, int]] = set()
    children_of: dict[int, list] = {}
    for node in analyzed.nodes:
        children_of.setdefault(node.parent, []).append(node)
    for node in analyzed.nodes:
        if node.level == 0 or node.level > top:
            index[node.id] = None
            continue
        try:
            idx = oracle.cycle_index(node.level, node.rep)
        except KeyError:
            report.record("prefix", False,
                          f"analyzed cycle rep={node.rep}@{node.level} missing from oracle")
            index[node.id] = None
            continue
        ok = oracle.lengths[node.level][idx] == node.length
        report.record("prefix", ok,
                      f"length mismatch at rep={node.rep}@{node.level}")
        index[node.id] = (node.level, idx) if ok else None
        if ok:
            analyzed_pos.add((node.level, idx))

    # Expanded nodes must reproduce the oracle's child sets exactly.
    for node in analyzed.nodes:
        kids = children_of.get(node.id, [])
        if not kids or node.level + 1 > top:
            continue
        if node.level == 0:
            got = sorted((c.rep, c.length) for c in kids)
            want = sorted(zip(oracle.reps[1], oracle.lengths[1]))
            report.record("prefix", got == want, "level-1 cycle set differs")
            continue
        pos = index.get(node.id)
        if pos is None:
            continue
        level, idx = pos
        got = sorted((c.rep, c.length) for c in kids)
        want = sorted((oracle.reps[level + 1][c], oracle.lengths[level + 1][c])
                      for c in oracle.children[level][idx])
        report.record("prefix", got == want,
                      f"children of rep={node.rep}@{level} differ")

    # Annotation conformance.
    for node in analyzed.nodes:
        shape = node.prediction
        pos = index.get(node.id)
        if shape is None or pos is None:
            continue
        level, idx = pos
        kind = shape.kind
        if kind is ShapeKind.GROWS_FOREVER:
            report.record("grows-forever", checker.grows_chain(level, idx),
                          f"rep={node.rep}@{level}")
        elif kind is ShapeKind.SPLITS_THEN_GROWS and shape.scope is Scope.ALL:
            ok = (level >= top or all(
                checker.own_splits_then_grows(level + 1, c, shape.splits)
                for c in checker.kids(level, idx)))
            report.record("splits-then-grows", ok, f"rep={node.rep}@{level}")
        elif kind is ShapeKind.SPLITS_THEN_GROWS:
            report.record("exceptional-split",
                          checker.exceptional_chain(level, idx, shape.splits),
                          f"rep={node.rep}@{level}")
        elif kind is ShapeKind.STATIONARY_PARTIAL_SPLIT:
            report.record("partial-split",
                          checker.partial_chain(level, idx, shape.d, shape.m,
                                                analyzed_pos),
                          f"rep={node.rep}@{level}")
        elif kind is ShapeKind.TAILS_FOREVER:
            report.record("tails-forever", checker.tails_chain(level, idx),
                          f"rep={node.rep}@{level}")
        elif kind is ShapeKind.GROWS_THEN_SPLITS:
            report.record("grows-then-splits",
                          checker.grows_then_splits(level, idx),
                          f"rep={node.rep}@{level}")
        elif kind is ShapeKind.UNDETERMINED:
            ok = checker.full_split_until(level, idx, shape.split_known_until)
            report.record("undetermined-prefix", ok, f"rep={node.rep}@{level}")
    return report


# ---------------------------------------------------------------------------
# Structural oracle invariants (no predictor involved).
# ---------------------------------------------------------------------------


def check_lift_length_law(tree: BruteTree, p: int,
                          report: VerifyReport | None = None) -> RuleStats:
    """Child-length multisets must be one of the four lawful patterns:
    {pk}, {k x p}, {k}, or {k, kd x (p-1)/d} with d | p-1."""
    stats = report.stat("lift-length-law") if report else RuleStats()
    for level in range(1, tree.max_level):
        for idx, k in enumerate(tree.lengths[level]):
            kids = tree.children[level][idx]
            lens = sorted(tree.lengths[level + 1][c] for c in kids)
            ok = (lens == [p * k]
                  or lens == [k] * p
                  or lens == [k]
                  or _partial_pattern(lens, k, p))
            stats.record(ok)
            if not ok and report and len(report.details) < 50:
                report.details.append(
                    f"lift-length-law: {lens} under k={k}@{level}")
    return stats


def _partial_pattern(lens: list[int], k: int, p: int) -> bool:
    if not lens or lens[0] != k or len(lens) < 2:
        return False
    long = lens[1:]
    if long[0] % k or long[0] == k:
        return False
    d = long[0] // k
    return ((p - 1) % d == 0 and len(long) == (p - 1) // d
            and all(x == k * d for x in long))


def check_chain_congruences(fmap, p: int, tree: BruteTree,
                            report: VerifyReport | None = None) -> RuleStats:
    """The multiplier power law and the offset recurrence across every
    parent/child pair:

        a' = a^r (mod p^n)
        p b' = t (a^r - 1) + b (1 + a + ... + a^{r-1})  (mod p^n)

    computed at coherent representatives (each child's start point reduces to
    its parent's start point).
    """
    stats = report.stat("chain-congruence") if report else RuleStats()
    poly_rc = tuple(reversed(fmap.coeffs)) if isinstance(fmap, IntPoly) else None
    # chosen[level][idx] = start member; level 1 uses the canonical reps.
    chosen = {(1, i): r for i, r in enumerate(tree.reps[1])}
    lin = {}
    for i in range(len(tree.reps[1])):
        lin[(1, i)] = compute_lin_at(fmap, p, 1, tree.lengths[1][i],
                                     chosen[(1, i)], verify=False)
    for level in range(1, tree.max_level):
        base = p**level
        mod_next = base * p
        for idx in range(len(tree.reps[level])):
            if (level, idx) not in chosen:
                continue
            x1 = chosen[(level, idx)]
            parent_lin = lin[(level, idx)]
            k = tree.lengths[level][idx]
            a, b = parent_lin.a, parent_lin.b
            for c in tree.children[level][idx]:
                clen = tree.lengths[level + 1][c]
                r = clen // k
                # locate the child member over x1
                y = tree.reps[level + 1][c]
                if poly_rc is not None:
                    for _ in range(clen):
                        if y % base == x1:
                            break
                        acc = 0
                        for cf in poly_rc:
                            acc = (acc * y + cf) % mod_next
                        y = acc
                    else:
                        raise AssertionError("child has no member over the parent rep")
                else:
                    for _ in range(clen):
                        if y % base == x1:
                            break
                        y = map_value(fmap, y, mod_next, p)
                    else:
                        raise AssertionError("child has no member over the parent rep")
                t = (y - x1) // base
                child_lin = compute_lin_at(fmap, p, level + 1, clen, y, verify=False)
                chosen[(level + 1, c)] = y
                lin[(level + 1, c)] = child_lin
                a_pow = pow(a, r, base)
                geo = 0
                term = 1
                for _ in range(r):
                    geo = (geo + term) % base
                    term = term * a % base
                ok_a = (child_lin.a - a_pow) % base == 0
                ok_b = (p * child_lin.b - (t * (a_pow - 1) + b * geo)) % base == 0
                stats.record(ok_a and ok_b)
                if not (ok_a and ok_b) and report and len(report.details) < 50:
                    report.details.append(
                        f"chain-congruence: rep={tree.reps[level + 1][c]}@{level + 1}")
    return stats


def collect_kd_samples(tree: BruteTree, max_samples: int | None = None) -> list[KdLiftSample]:
    """kd-lifts of partially splitting cycles, identified structurally."""
    samples = []
    for level in range(1, tree.max_level):
        for idx, k in enumerate(tree.lengths[level]):
            kids = tree.children[level][idx]
            lens = sorted(tree.lengths[level + 1][c] for c in kids)
            if not _partial_pattern(lens, k, tree.p):
                continue
            d = lens[-1] // k
            for c in kids:
                if tree.lengths[level + 1][c] == k * d:
                    samples.append(KdLiftSample(level, k, d,
                                                tree.reps[level + 1][c], k * d))
                    if max_samples and len(samples) >= max_samples:
                        return samples
    return samples


def check_kd_identity(fmap, p: int, tree: BruteTree,
                      report: VerifyReport | None = None,
                      max_samples: int | None = None) -> RuleStats:
    stats = report.stat("kd-identity") if report else RuleStats()
    for sample in collect_kd_samples(tree, max_samples):
        result = check_identity_sample(fmap, p, sample)
        stats.record(result["holds"])
        if not result["holds"] and report and len(report.details) < 50:
            report.details.append(f"kd-identity: {sample}")
    return stats


def check_orbit_lengths(tree: BruteTree, p: int,
                        report: VerifyReport | None = None) -> RuleStats:
    """Chains of constant length reaching the deepest level must obey the
    orbit bound: length <= p^2, and k*r form (k <= p, r | p-1) for p > 3."""
    stats = report.stat("orbit-bound") if report else RuleStats()
    top = tree.max_level
    if top < 2:
        return stats
    for idx, c in enumerate(tree.lengths[top]):
        level, i = top, idx
        stationary = False
        while level > 1:
            pidx = tree.parents[level][i]
            if tree.lengths[level - 1][pidx] != c:
                break
            stationary = True
            level, i = level - 1, pidx
        if not stationary:
            continue
        ok = c <= p * p and (p == 3 or _orbit_form(c, p))
        if p == 3 and c <= p * p and not _orbit_form(c, p):
            ok = c == 9  # the p = 3 exception
        stats.record(ok)
        if not ok and report and len(report.details) < 50:
            report.details.append(f"orbit-bound: stationary length {c}")
    return stats


def _orbit_form(c: int, p: int) -> bool:
    for r in range(1, p):
        if (p - 1) % r == 0 and c % r == 0 and c // r <= p:
            return True
    return False


def check_tail_bounds(fmap, p: int, max_level: int, budget: int = DEFAULT_BUDGET,
                      report: VerifyReport | None = None,
                      tree: BruteTree | None = None) -> RuleStats:
    """Observed longest tail over each cycle with tails is at most
    p + (n-2)k at level n.

    A tree built with ``with_tail_lengths=True`` supplies the per-cycle pairs
    directly; otherwise the levels are re-swept.
    """
    stats = report.stat("tail-bound") if report else RuleStats()

    def record(n, pairs):
        for k, longest in pairs:
            ok = longest <= p + (n - 2) * k
            stats.record(ok)
            if not ok and report and len(report.details) < 50:
                report.details.append(
                    f"tail-bound: tail of {longest} at level {n} over k={k}")

    if tree is not None and tree.tail_pairs is not None:
        for n in range(1, tree.max_level + 1):
            record(n, tree.tail_pairs[n])
        return stats
    for n in range(1, max_level + 1):
        sw = _sweep_level(fmap, p, n, budget)
        if sw.tail_point_count + sw.excluded == 0:
            continue
        record(n, tail_length_by_cycle(sw))
    return stats
