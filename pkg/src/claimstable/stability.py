"""Partitions, blocking coalitions and exhaustive stability checks.

All functions work with any problem object exposing ``n`` and
``utilities(rule, mask) -> {agent: value}`` where a larger value is better.
:class:`~claimstable.problems.ThetaProblem` uses payoffs directly; the
single-peaked problems use minus the distance to the peak.

Scans walk coalitions in ascending bitmask order, so the first blocking
coalition reported is reproducible.
"""
from __future__ import annotations

from bisect import bisect_right
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .config import check_size
from .errors import ClaimsError, PreconditionError
from .problems import Coalition, from_mask, to_mask
from .rules import Verdict, get_rule

__all__ = [
    "Partition",
    "canonical_partition",
    "validate_partition",
    "partition_masks",
    "StabilityReport",
    "find_blocking",
    "stability_report",
    "enumerate_partitions",
    "enumerate_stable_partitions",
    "verify_strict_rm_structure",
    "best_utilities",
    "is_top_coalition",
    "top_coalitions",
    "check_weak_pairwise_alignment",
    "find_cycle",
]

Partition = tuple[Coalition, ...]


def _rule(rule):
    return get_rule(rule) if isinstance(rule, str) else rule


def canonical_partition(blocks) -> Partition:
    """Blocks as sorted tuples, ordered by their smallest member."""
    out = [tuple(sorted(b)) for b in blocks]
    return tuple(sorted(out, key=lambda b: b[0] if b else 0))


def validate_partition(blocks, n: int) -> Partition:
    seen: set[int] = set()
    for b in blocks:
        b = list(b)
        if not b:
            raise ClaimsError("partition contains an empty block")
        for i in b:
            if not isinstance(i, int) or not 1 <= i <= n:
                raise ClaimsError(f"agent {i!r} is not in 1..{n}")
            if i in seen:
                raise ClaimsError(f"agent {i} appears in two blocks")
            seen.add(i)
    if len(seen) != n:
        missing = sorted(set(range(1, n + 1)) - seen)
        raise ClaimsError(f"agents {missing} are not covered by the partition")
    return canonical_partition(blocks)


def partition_masks(partition) -> list[int]:
    return [to_mask(b) for b in partition]


def _current(p, rule, masks: Sequence[int]) -> dict[int, Fraction]:
    cur: dict[int, Fraction] = {}
    for m in masks:
        cur.update(p.utilities(rule, m))
    return cur


def find_blocking(p, rule, partition, max_n: int | None = None, min_size: int = 1) -> Coalition | None:
    """First coalition (ascending bitmask) whose members all strictly gain, or None.

    ``min_size`` ignores smaller deviations; the default checks every coalition.
    """
    n = p.n
    check_size(n, "blocking", max_n)
    rule = _rule(rule)
    partition = validate_partition(partition, n)
    cur = _current(p, rule, partition_masks(partition))
    for mask in range(1, 1 << n):
        if bin(mask).count("1") < min_size:
            continue
        u = p.utilities(rule, mask)
        if all(u[i] > cur[i] for i in u):
            return from_mask(mask)
    return None


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    blocking: Coalition | None
    payoffs: dict[int, Fraction] = field(default_factory=dict)


def stability_report(p, rule, partition, max_n: int | None = None) -> StabilityReport:
    rule = _rule(rule)
    partition = validate_partition(partition, p.n)
    blocker = find_blocking(p, rule, partition, max_n)
    return StabilityReport(blocker is None, blocker, _current(p, rule, partition_masks(partition)))


def enumerate_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """All set partitions of 1..n as tuples of block masks, via restricted growth strings.

    Blocks come out ordered by smallest member; partitions in lexicographic
    order of their growth strings.
    """
    if n < 1:
        return
    rgs = [0] * n
    maxes = [0] * n  # maxes[k] = max(rgs[:k+1])
    while True:
        blocks = [0] * (maxes[-1] + 1)
        for i, b in enumerate(rgs):
            blocks[b] |= 1 << i
        yield tuple(blocks)
        k = n - 1
        while k > 0 and rgs[k] > maxes[k - 1]:
            k -= 1
        if k == 0:
            return
        rgs[k] += 1
        maxes[k] = max(maxes[k - 1], rgs[k])
        for j in range(k + 1, n):
            rgs[j] = 0
            maxes[j] = maxes[k]


class _BlockingIndex:
    """Bitsets over coalition masks for fast repeated blocking checks.

    Bit ``T`` of ``better(i, v)`` is set when ``i`` is in ``T`` and gets strictly
    more than ``v`` there. A coalition blocks iff no member fails to improve.
    """

    def __init__(self, p, rule):
        n = p.n
        self.n = n
        self.values: list[list[Fraction]] = []
        self.cumulative: list[list[int]] = []
        self.contains: list[int] = []
        per_agent: list[dict[Fraction, int]] = [dict() for _ in range(n)]
        for mask in range(1, 1 << n):
            for i, u in p.utilities(rule, mask).items():
                d = per_agent[i - 1]
                d[u] = d.get(u, 0) | (1 << mask)
        for d in per_agent:
            vals = sorted(d)
            # cumulative[k] = masks whose utility is >= vals[k]
            cum = [0] * (len(vals) + 1)
            for k in range(len(vals) - 1, -1, -1):
                cum[k] = cum[k + 1] | d[vals[k]]
            self.values.append(vals)
            self.cumulative.append(cum)
            self.contains.append(cum[0])
        self.everything = ((1 << (1 << n)) - 1) & ~1

    def better(self, i: int, v: Fraction) -> int:
        k = bisect_right(self.values[i - 1], v)
        return self.cumulative[i - 1][k]

    def first_blocker(self, cur: dict[int, Fraction]) -> int | None:
        bad = 0
        for i, v in cur.items():
            bad |= self.contains[i - 1] & ~self.better(i, v)
        blockers = self.everything & ~bad
        if not blockers:
            return None
        return (blockers & -blockers).bit_length() - 1


def enumerate_stable_partitions(p, rule, max_n: int | None = None) -> list[Partition]:
    """Every stable partition, in restricted-growth-string order."""
    check_size(p.n, "partitions", max_n)
    rule = _rule(rule)
    index = _BlockingIndex(p, rule)
    stable = []
    for masks in enumerate_partitions(p.n):
        if index.first_blocker(_current(p, rule, masks)) is None:
            stable.append(tuple(from_mask(m) for m in masks))
    return stable


def verify_strict_rm_structure(p, rule, partition, check_stable: bool = True) -> Verdict:
    """Check the structure every stable partition has under a strictly RM, consistent rule.

    (i) at most ``theta - 1`` agents sit in blocks smaller than ``theta``;
    (ii) in blocks larger than ``theta`` every member gets ``alpha * c_i``.
    """
    rule = _rule(rule)
    partition = validate_partition(partition, p.n)
    if check_stable:
        blocker = find_blocking(p, rule, partition)
        if blocker is not None:
            raise PreconditionError(f"partition is blocked by {blocker}")
    small = sum(len(b) for b in partition if len(b) < p.theta)
    if small > p.theta - 1:
        return Verdict(False, ("small-blocks", small), f"{small} agents in blocks smaller than theta")
    for b in partition:
        if len(b) > p.theta:
            pay = p.payoffs(rule, to_mask(b))
            for i in b:
                if pay[i] != p.alpha * p.claim(i):
                    return Verdict(False, ("non-proportional", b, i), f"agent {i} gets {pay[i]}")
    return Verdict(True)


def _submasks(ground: int):
    sub = ground
    while sub:
        yield sub
        sub = (sub - 1) & ground


def best_utilities(p, rule, ground) -> dict[int, Fraction]:
    """Each agent's best utility over coalitions inside ``ground``."""
    rule = _rule(rule)
    g = ground if isinstance(ground, int) else to_mask(ground)
    best: dict[int, Fraction] = {}
    for sub in _submasks(g):
        for i, u in p.utilities(rule, sub).items():
            if i not in best or u > best[i]:
                best[i] = u
    return best


def is_top_coalition(p, rule, S, ground=None, max_n: int | None = None) -> bool:
    rule = _rule(rule)
    s = S if isinstance(S, int) else to_mask(S)
    g = (1 << p.n) - 1 if ground is None else (ground if isinstance(ground, int) else to_mask(ground))
    check_size(bin(g).count("1"), "top_coalition", max_n)
    if s & ~g or not s:
        raise ClaimsError("S must be a nonempty subset of the ground set")
    best = best_utilities(p, rule, g)
    u = p.utilities(rule, s)
    return all(u[i] == best[i] for i in u)


def top_coalitions(p, rule, ground=None, min_size: int = 1, max_n: int | None = None) -> list[Coalition]:
    """All top coalitions of ``ground`` with at least ``min_size`` members, ascending mask."""
    rule = _rule(rule)
    g = (1 << p.n) - 1 if ground is None else (ground if isinstance(ground, int) else to_mask(ground))
    check_size(bin(g).count("1"), "top_coalition", max_n)
    best = best_utilities(p, rule, g)
    found = []
    for sub in sorted(_submasks(g)):
        if bin(sub).count("1") < min_size:
            continue
        u = p.utilities(rule, sub)
        if all(u[i] == best[i] for i in u):
            found.append(from_mask(sub))
    return found


def check_weak_pairwise_alignment(p, rule, max_n: int | None = None) -> Verdict:
    """Look for ``S, S'`` and ``i, j`` in both with ``S >_i S'`` but ``S' >_j S``.

    The witness is ``(S, S', i, j)``.
    """
    check_size(p.n, "alignment", max_n)
    rule = _rule(rule)
    full = 1 << p.n
    util = [None] + [p.utilities(rule, m) for m in range(1, full)]
    for a in range(1, full):
        ua = util[a]
        for b in range(a + 1, full):
            common = a & b
            if common & (common - 1) == 0:  # fewer than two shared members
                continue
            ub = util[b]
            up = down = None
            for i in from_mask(common):
                if ua[i] > ub[i] and up is None:
                    up = i
                elif ua[i] < ub[i] and down is None:
                    down = i
                if up is not None and down is not None:
                    return Verdict(False, (from_mask(a), from_mask(b), up, down),
                                   f"agent {up} prefers the first, agent {down} the second")
    return Verdict(True)


def _dominates(ub: dict, ua: dict, common: int) -> bool:
    """True when B is weakly better than A for everyone in the intersection, strictly for one."""
    strict = False
    for i in from_mask(common):
        if ub[i] < ua[i]:
            return False
        if ub[i] > ua[i]:
            strict = True
    return strict


def find_cycle(p, rule, max_len: int | None = None, max_n: int | None = None) -> list[Coalition] | None:
    """Shortest ring ``(S_1, ..., S_k)``, ``k > 2``, where each coalition dominates its predecessor.

    Consecutive coalitions must share at least one member. Two-element rings
    are impossible (mutual domination would need a strict and a reverse weak
    preference for the same shared agents), so any directed cycle qualifies.
    """
    check_size(p.n, "cycles", max_n)
    if max_len is not None and max_len < 3:
        return None
    rule = _rule(rule)
    full = 1 << p.n
    util = [None] + [p.utilities(rule, m) for m in range(1, full)]
    succ: dict[int, list[int]] = {m: [] for m in range(1, full)}
    for a in range(1, full):
        for b in range(1, full):
            common = a & b
            if a != b and common and _dominates(util[b], util[a], common):
                succ[a].append(b)

    # trim nodes that cannot lie on a cycle
    alive = set(succ)
    pred: dict[int, set[int]] = {m: set() for m in succ}
    for a, bs in succ.items():
        for b in bs:
            pred[b].add(a)
    changed = True
    while changed:
        changed = False
        for m in sorted(alive):
            if not any(b in alive for b in succ[m]) or not any(a in alive for a in pred[m]):
                alive.discard(m)
                changed = True
    if not alive:
        return None

    best: list[int] | None = None
    for start in sorted(alive):
        parent = {start: None}
        queue = deque([start])
        found = None
        while queue and found is None:
            m = queue.popleft()
            for b in succ[m]:
                if b not in alive:
                    continue
                if b == start:
                    found = m
                    break
                if b not in parent:
                    parent[b] = m
                    queue.append(b)
        if found is None:
            continue
        path = []
        m = found
        while m is not None:
            path.append(m)
            m = parent[m]
        path.reverse()
        if best is None or len(path) < len(best):
            best = path
    if best is None or (max_len is not None and len(best) > max_len):
        return None
    return [from_mask(m) for m in best]
