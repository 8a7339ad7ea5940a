"""Compile policies into key-share material.

Two compilation targets:

* A monotone policy (AND/OR only) becomes one prime-index set per holder,
  by recursive descent over the expression: an OR node hands its whole
  index set to every child, an AND node partitions it among its children.
  A group of holders can recover every message bit exactly when the union
  of its index sets covers all indices, and `bl_split` guarantees that this
  happens for precisely the policy-satisfying groups.

* An arbitrary family of groups (possibly non-monotone, e.g. capped in
  size) becomes a `SlotPlan`: an ordered list of slots, each one an index
  partition plus a holder-to-part assignment. A slot authenticates exactly
  the groups made of one assigned holder per part and nobody else, so the
  plan's slots jointly authenticate exactly the requested family.

Descent partitions alone do not guarantee the covers-all/satisfies
equivalence: with unlucky partition choices, two copies of an index set
handed down different OR branches can complement each other and hand a
single holder full coverage. `bl_split` therefore verifies the
equivalence by exhaustive enumeration and, when a plain attempt fails,
re-partitions with one reserved index per maximal unauthorized set,
routed away from that set's members; that construction makes the
equivalence unconditional.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .errors import GroupAuthError
from .nscrypt import KeyShare, NsPrivateKey
from .policy import And, Not, Or, PolicyExpr, Var, is_monotone, variables

__all__ = [
    "NonMonotoneError",
    "InsufficientPrimes",
    "GroupLargerThanPrimeCount",
    "SPLIT_STRATEGIES",
    "SlotAssignment",
    "SlotPlan",
    "ShareSequence",
    "bl_split",
    "authorized_groups",
    "slots_baseline",
    "slots_packed",
    "issue_monotone",
    "issue_sequence",
]

SPLIT_STRATEGIES = ("balanced-contiguous", "seeded-random")

_RANDOM_RETRIES = 32


class NonMonotoneError(GroupAuthError):
    """The expression contains NOT and cannot be index-split directly."""


class InsufficientPrimes(GroupAuthError):
    """Too few prime indices to honor the policy structure."""


class GroupLargerThanPrimeCount(GroupAuthError):
    """A requested group has more members than there are prime indices."""


# ---------------------------------------------------------------------------
# truth tables as bitmasks: bit a of the table is the expression's value
# under the assignment whose set bits pick the true variables


def _truth_table(expr: PolicyExpr, order: tuple[str, ...]) -> int:
    size = 1 << len(order)
    full = (1 << size) - 1
    pos = {name: j for j, name in enumerate(order)}

    def go(node: PolicyExpr) -> int:
        if isinstance(node, Var):
            j = pos[node.name]
            block = ((1 << (1 << j)) - 1) << (1 << j)
            width = 1 << (j + 1)
            pattern = block
            while width < size:
                pattern |= pattern << width
                width *= 2
            return pattern & full
        if isinstance(node, Not):
            return full ^ go(node.child)
        tables = [go(c) for c in node.children]
        out = tables[0]
        for t in tables[1:]:
            out = (out & t) if isinstance(node, And) else (out | t)
        return out

    return go(expr)


def _maximal_unsat(table: int, nvars: int) -> list[int]:
    """Assignment masks that are unsatisfying but satisfying after any addition."""
    out = []
    for a in range(1 << nvars):
        if (table >> a) & 1:
            continue
        if all((table >> (a | (1 << j))) & 1
               for j in range(nvars) if not (a >> j) & 1):
            out.append(a)
    return out


# ---------------------------------------------------------------------------
# index partitioning


def _balanced_parts(items: list[int], k: int) -> list[list[int]]:
    if len(items) < k:
        raise InsufficientPrimes(
            f"cannot split {len(items)} indices into {k} non-empty parts")
    q, r = divmod(len(items), k)
    parts, start = [], 0
    for i in range(k):
        size = q + (1 if i < r else 0)
        parts.append(items[start:start + size])
        start += size
    return parts


def _random_parts(items: list[int], k: int, rng: random.Random) -> list[list[int]]:
    if len(items) < k:
        raise InsufficientPrimes(
            f"cannot split {len(items)} indices into {k} non-empty parts")
    pool = list(items)
    rng.shuffle(pool)
    cuts = sorted(rng.sample(range(1, len(pool)), k - 1))
    bounds = [0, *cuts, len(pool)]
    return [pool[bounds[i]:bounds[i + 1]] for i in range(k)]


def _max_and_fanin_product(node: PolicyExpr) -> int:
    """Largest product of AND fan-ins along any root-to-leaf path."""
    if isinstance(node, Var):
        return 1
    if isinstance(node, Not):
        return _max_and_fanin_product(node.child)
    worst = max(_max_and_fanin_product(c) for c in node.children)
    return worst * len(node.children) if isinstance(node, And) else worst


def _plain_descent(
    expr: PolicyExpr,
    indices: list[int],
    strategy: str,
    rng: random.Random,
) -> dict[str, set[int]]:
    acc: dict[str, set[int]] = {}

    def walk(node: PolicyExpr, items: list[int]) -> None:
        if isinstance(node, Var):
            acc.setdefault(node.name, set()).update(items)
        elif isinstance(node, Or):
            for child in node.children:
                walk(child, items)
        else:
            k = len(node.children)
            if strategy == "seeded-random":
                parts = _random_parts(items, k, rng)
            else:
                parts = _balanced_parts(sorted(items), k)
            for child, part in zip(node.children, parts):
                walk(child, part)

    walk(expr, list(indices))
    return acc


def _guided_descent(
    expr: PolicyExpr,
    indices: list[int],
    strategy: str,
    rng: random.Random,
    order: tuple[str, ...],
    table: int,
) -> dict[str, set[int]]:
    """Descent with one reserved index per maximal unauthorized set.

    Each reserved index is steered, at every AND node, into a child whose
    subexpression is false under its unauthorized set; OR nodes copy it to
    all children, which are all false there too. The index therefore only
    ever reaches leaves of holders outside that set, so the set can never
    cover it, while any satisfying group still covers everything. The
    remaining indices are distributed per the requested strategy.
    """
    maximal = _maximal_unsat(table, len(order))
    if len(maximal) > len(indices):
        raise InsufficientPrimes(
            f"policy separates {len(maximal)} maximal unauthorized sets "
            f"but only {len(indices)} prime indices are available")

    # reserve the trailing indices; the leading ones keep their usual layout
    reserved = {indices[len(indices) - len(maximal) + u]: maximal[u]
                for u in range(len(maximal))}

    node_tables: dict[int, int] = {}

    def fill(node: PolicyExpr) -> int:
        t = _truth_table(node, order)
        node_tables[id(node)] = t
        if isinstance(node, (And, Or)):
            for c in node.children:
                fill(c)
        elif isinstance(node, Not):
            fill(node.child)
        return t

    fill(expr)

    acc: dict[str, set[int]] = {}

    def walk(node: PolicyExpr, items: list[int]) -> None:
        if isinstance(node, Var):
            acc.setdefault(node.name, set()).update(items)
            return
        if isinstance(node, Or):
            for child in node.children:
                walk(child, items)
            return
        k = len(node.children)
        buckets: list[list[int]] = [[] for _ in range(k)]
        free: list[int] = []
        for x in sorted(items):
            tag = reserved.get(x)
            if tag is None:
                free.append(x)
                continue
            false_children = [
                i for i, c in enumerate(node.children)
                if not (node_tables[id(c)] >> tag) & 1
            ]
            assert false_children, "reserved index reached a satisfied AND"
            target = min(false_children, key=lambda i: (len(buckets[i]), i))
            buckets[target].append(x)
        if strategy == "seeded-random":
            rng.shuffle(free)
        for i in range(k):
            if not buckets[i]:
                if not free:
                    raise InsufficientPrimes(
                        "reserved indices crowd out an AND branch; "
                        "more prime indices are needed")
                buckets[i].append(free.pop())
        while free:
            target = min(range(k), key=lambda i: (len(buckets[i]), i))
            buckets[target].append(free.pop())
        for child, bucket in zip(node.children, buckets):
            walk(child, bucket)

    walk(expr, list(indices))
    return acc


def _split_is_exact(
    split: dict[str, set[int]],
    indices: list[int],
    order: tuple[str, ...],
    table: int,
) -> bool:
    """Exhaustively check: a group covers all indices iff it satisfies."""
    bit_of = {x: i for i, x in enumerate(indices)}
    full = (1 << len(indices)) - 1
    cover = [
        sum(1 << bit_of[x] for x in split.get(name, ()))
        for name in order
    ]
    nvars = len(order)
    masks = [0] * (1 << nvars)
    for a in range(1, 1 << nvars):
        low = a & -a
        masks[a] = masks[a ^ low] | cover[low.bit_length() - 1]
        if (masks[a] == full) != bool((table >> a) & 1):
            return False
    return not (table & 1)  # the empty group must not satisfy


def bl_split(
    expr: PolicyExpr,
    prime_indices: list[int] | range,
    strategy: str = "balanced-contiguous",
    rng: random.Random | None = None,
) -> dict[str, frozenset[int]]:
    """Split prime indices over the holders of a monotone expression.

    Returns holder -> index set such that a group's sets cover every index
    exactly when the group satisfies the expression. Partitioning follows
    the requested strategy; if the resulting split is not exact it is
    re-attempted (seeded-random) and finally rebuilt with guided routing,
    which is exact by construction. Raises InsufficientPrimes when the
    expression structurally needs more indices than provided, and
    NonMonotoneError for expressions containing NOT.
    """
    if not is_monotone(expr):
        raise NonMonotoneError("index splitting requires an AND/OR-only policy")
    if strategy not in SPLIT_STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    indices = list(prime_indices)
    if len(set(indices)) != len(indices):
        raise ValueError("prime indices must be distinct")
    order = variables(expr)
    if not indices:
        raise InsufficientPrimes("no prime indices to split")
    if len(order) > 20:
        raise GroupAuthError("more than 20 holders; exactness check is 2^holders")
    if _max_and_fanin_product(expr) > len(indices):
        raise InsufficientPrimes(
            "nested AND fan-ins need more prime indices than available")
    rng = rng if rng is not None else random.Random(0)
    table = _truth_table(expr, order)

    attempts = _RANDOM_RETRIES if strategy == "seeded-random" else 1
    split: dict[str, set[int]] | None = None
    for _ in range(attempts):
        candidate = _plain_descent(expr, indices, strategy, rng)
        if _split_is_exact(candidate, indices, order, table):
            split = candidate
            break
    if split is None:
        split = _guided_descent(expr, indices, strategy, rng, order, table)
        if not _split_is_exact(split, indices, order, table):
            raise AssertionError("guided split failed exactness check")

    return {name: frozenset(s) for name, s in split.items()}


# ---------------------------------------------------------------------------
# slot plans for exact (possibly non-monotone) families


@dataclass
class SlotAssignment:
    """One sequence slot: an ordered index partition plus holder assignments.

    The slot authenticates the groups formed by picking exactly one
    assigned holder from every part (the transversal rule); any group with
    an unassigned member present, or two members in one part, or a part
    unrepresented, is rejected by the merge arithmetic.
    """

    parts: tuple[frozenset[int], ...]
    member_part: dict[str, int]

    def __post_init__(self):
        if not self.parts:
            raise ValueError("a slot needs at least one part")
        seen: set[int] = set()
        for part in self.parts:
            if not part:
                raise ValueError("slot parts must be non-empty")
            if part & seen:
                raise ValueError("slot parts must be disjoint")
            seen |= part
        k = len(self.parts)
        assigned = set(self.member_part.values())
        if not all(0 <= i < k for i in assigned):
            raise ValueError("part index out of range")
        if assigned != set(range(k)):
            raise ValueError("every part needs at least one assigned holder")

    @property
    def indices(self) -> frozenset[int]:
        return frozenset().union(*self.parts)


def authorized_groups(slot: SlotAssignment) -> frozenset[frozenset[str]]:
    """All groups this slot authenticates, per the transversal rule."""
    k = len(slot.parts)
    classes: list[list[str]] = [[] for _ in range(k)]
    for holder, i in slot.member_part.items():
        classes[i].append(holder)
    return frozenset(
        frozenset(choice) for choice in itertools.product(*classes)
    )


@dataclass
class SlotPlan:
    """An ordered list of slots over a holder universe and n prime indices."""

    universe: tuple[str, ...]
    n: int
    slots: list[SlotAssignment] = field(default_factory=list)

    def __post_init__(self):
        every = frozenset(range(self.n))
        for slot in self.slots:
            if slot.indices != every:
                raise ValueError("slot parts must cover all prime indices")
            if not set(slot.member_part) <= set(self.universe):
                raise ValueError("slot assigns a holder outside the universe")

    def authorized_family(self) -> frozenset[frozenset[str]]:
        out: set[frozenset[str]] = set()
        for slot in self.slots:
            out |= authorized_groups(slot)
        return frozenset(out)


def _canonical_group_key(universe: tuple[str, ...]):
    pos = {name: i for i, name in enumerate(universe)}

    def key(group: frozenset[str]):
        return (len(group), tuple(sorted(pos[h] for h in group)))

    return key


def _slot_for_classes(
    classes: list[list[str]],
    n: int,
) -> SlotAssignment:
    parts = [frozenset(p) for p in _balanced_parts(list(range(n)), len(classes))]
    member_part = {h: i for i, cls in enumerate(classes) for h in cls}
    return SlotAssignment(parts=tuple(parts), member_part=member_part)


def slots_baseline(
    family: frozenset[frozenset[str]],
    n: int,
    universe: tuple[str, ...],
) -> SlotPlan:
    """One slot per group; members take distinct parts in universe order."""
    key = _canonical_group_key(universe)
    pos = {name: i for i, name in enumerate(universe)}
    slots = []
    for group in sorted(family, key=key):
        if len(group) > n:
            raise GroupLargerThanPrimeCount(
                f"group of {len(group)} members exceeds {n} prime indices")
        members = sorted(group, key=pos.__getitem__)
        slots.append(_slot_for_classes([[m] for m in members], n))
    return SlotPlan(universe=universe, n=n, slots=slots)


def _grow_classes(
    seed: frozenset[str],
    remaining: set[frozenset[str]],
    universe: tuple[str, ...],
) -> list[list[str]]:
    """Greedily extend singleton classes while every transversal stays inside
    the remaining family."""
    pos = {name: i for i, name in enumerate(universe)}
    classes = [[m] for m in sorted(seed, key=pos.__getitem__)]
    used = set(seed)
    changed = True
    while changed:
        changed = False
        for ci in range(len(classes)):
            for holder in universe:
                if holder in used:
                    continue
                others = [cls for i, cls in enumerate(classes) if i != ci]
                new_groups = [
                    frozenset([holder, *pick])
                    for pick in itertools.product(*others)
                ]
                if all(g in remaining for g in new_groups):
                    classes[ci].append(holder)
                    used.add(holder)
                    changed = True
    return classes


def slots_packed(
    family: frozenset[frozenset[str]],
    n: int,
    universe: tuple[str, ...],
) -> SlotPlan:
    """Greedy packing: each slot covers as many remaining groups as it can.

    Candidate slots come from growing a seed group's singleton classes into
    per-part holder classes whose full transversal set stays inside the
    remaining family, so the plan never authenticates a group outside the
    requested family and never drops one. Slot count is best-effort, not
    minimal, and never exceeds the baseline plan's.
    """
    key = _canonical_group_key(universe)
    for group in family:
        if len(group) > n:
            raise GroupLargerThanPrimeCount(
                f"group of {len(group)} members exceeds {n} prime indices")
    remaining = set(family)
    slots = []
    while remaining:
        best: list[list[str]] | None = None
        best_cover = 0
        for seed in sorted(remaining, key=key):
            classes = _grow_classes(seed, remaining, universe)
            cover = 1
            for cls in classes:
                cover *= len(cls)
            if cover > best_cover:
                best, best_cover = classes, cover
        assert best is not None
        slot = _slot_for_classes(best, n)
        slots.append(slot)
        remaining -= authorized_groups(slot)
    return SlotPlan(universe=universe, n=n, slots=slots)


# ---------------------------------------------------------------------------
# share issuance


@dataclass(frozen=True)
class ShareSequence:
    """A holder's ordered per-slot share list; None marks slots with no share.

    Also used for holders assigned in no slot at all: their sequence is all
    None, but their presence still corrupts every merge through null
    responses, which is what locks them out.
    """

    holder: str
    s: int
    p: int
    n: int
    slots: tuple[frozenset[int] | None, ...]


def issue_monotone(
    split: dict[str, frozenset[int]],
    priv: NsPrivateKey,
) -> dict[str, KeyShare]:
    """Resolve a monotone split's index sets into per-holder key shares."""
    shares = {}
    for holder, idxs in split.items():
        if not idxs or not all(0 <= i < priv.n for i in idxs):
            raise ValueError(f"bad index set for holder {holder!r}")
        shares[holder] = KeyShare(
            holder=holder,
            s=priv.s,
            p=priv.p,
            prime_subset=frozenset(priv.primes[i] for i in idxs),
        )
    return shares


def issue_sequence(
    plan: SlotPlan,
    priv: NsPrivateKey,
) -> dict[str, ShareSequence]:
    """Resolve a slot plan into per-holder share sequences (prime values)."""
    if plan.n != priv.n:
        raise ValueError("plan and key disagree on prime count")
    sequences = {}
    for holder in plan.universe:
        entries: list[frozenset[int] | None] = []
        for slot in plan.slots:
            part = slot.member_part.get(holder)
            if part is None:
                entries.append(None)
            else:
                entries.append(frozenset(priv.primes[i] for i in slot.parts[part]))
        sequences[holder] = ShareSequence(
            holder=holder, s=priv.s, p=priv.p, n=priv.n, slots=tuple(entries))
    return sequences
