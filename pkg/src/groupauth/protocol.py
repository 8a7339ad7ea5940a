"""Challenge-response group authentication.

The verifier draws a secret message, encrypts it under the system public
key, and hands the ciphertext(s) to every present token. Tokens answer
with one value per slot: a partial decryption where they hold a share, a
null value (1, or a random non-zero) where they do not. Responses carry no
holder identity; the verifier merges them (bitwise OR in monotone mode,
per-slot sum or XOR in sequence mode) and accepts exactly when some merged
value equals its secret. The verifier never sees the secret exponent, any
prime set, or the policy: those live only in the share material.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .nscrypt import KeyShare, NsPrivateKey, NsPublicKey, encrypt, partial_decrypt, public_key_of
from .sharesplit import ShareSequence

__all__ = [
    "MODES",
    "MERGES",
    "NULL_POLICIES",
    "Challenge",
    "VerifierState",
    "ResponseVector",
    "Verdict",
    "AuditReport",
    "make_challenge",
    "token_respond",
    "merge_monotone",
    "merge_sequence",
    "merge_responses",
    "verify",
    "audit",
]

MODES = ("monotone", "sequence")
MERGES = ("or", "sum", "xor")
NULL_POLICIES = ("one", "random-nonzero")


def _check_mode_merge(mode: str, merge: str) -> None:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if merge not in MERGES:
        raise ValueError(f"unknown merge {merge!r}")
    if (merge == "or") != (mode == "monotone"):
        raise ValueError("or-merge is for monotone mode, sum/xor for sequence mode")


@dataclass(frozen=True)
class Challenge:
    """What the verifier sends to every token. Contains no identities."""

    session_id: str
    mode: str
    merge: str
    slot_count: int
    ciphertexts: tuple[int, ...]

    def __post_init__(self):
        _check_mode_merge(self.mode, self.merge)
        if self.slot_count < 1:
            raise ValueError("slot_count must be >= 1")
        if self.mode == "monotone" and self.slot_count != 1:
            raise ValueError("monotone mode has exactly one slot")
        if len(self.ciphertexts) not in (1, self.slot_count):
            raise ValueError("need one ciphertext, or one per slot")

    def ciphertext_for(self, index: int) -> int:
        return self.ciphertexts[index if len(self.ciphertexts) > 1 else 0]


@dataclass(frozen=True)
class VerifierState:
    """The verifier's secret side of a session. Never sent to tokens."""

    session_id: str
    mode: str
    merge: str
    slot_count: int
    plaintexts: tuple[int, ...]

    def plaintext_for(self, index: int) -> int:
        return self.plaintexts[index if len(self.plaintexts) > 1 else 0]


@dataclass(frozen=True)
class ResponseVector:
    """One token's per-slot answers; deliberately carries no holder field."""

    session_id: str
    values: tuple[int, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError("a response carries at least one value")
        if any(v < 0 for v in self.values):
            raise ValueError("response values are non-negative")


@dataclass(frozen=True)
class Verdict:
    session_id: str
    accepted: bool
    matching_slot: int | None
    merged: tuple[int, ...]  # diagnostic; leaks the secret on success


def make_challenge(
    pub: NsPublicKey,
    mode: str = "monotone",
    merge: str | None = None,
    slot_count: int = 1,
    per_index_random: bool = False,
    rng: random.Random | None = None,
    force_m: int | list[int] | None = None,
) -> tuple[Challenge, VerifierState]:
    """Draw secret plaintext(s), encrypt, and open a session.

    Plaintexts are uniform over [1, 2^n); with `per_index_random` each slot
    index gets an independently drawn plaintext and its own ciphertext.
    `force_m` pins the plaintext(s), mirroring the keygen overrides, so
    fixed known-answer sessions can be reproduced.
    """
    rng = rng if rng is not None else random.Random()
    merge = merge if merge is not None else ("or" if mode == "monotone" else "sum")
    _check_mode_merge(mode, merge)
    count = slot_count if per_index_random else 1
    if force_m is None:
        ms = [rng.randrange(1, 1 << pub.n) for _ in range(count)]
    else:
        ms = list(force_m) if isinstance(force_m, (list, tuple)) else [force_m] * count
        if len(ms) != count:
            raise ValueError(f"need {count} forced plaintexts, got {len(ms)}")
    session_id = f"{rng.getrandbits(64):016x}"
    challenge = Challenge(
        session_id=session_id,
        mode=mode,
        merge=merge,
        slot_count=slot_count,
        ciphertexts=tuple(encrypt(pub, m) for m in ms),
    )
    state = VerifierState(
        session_id=session_id,
        mode=mode,
        merge=merge,
        slot_count=slot_count,
        plaintexts=tuple(ms),
    )
    return challenge, state


def _null_value(null_policy: str, n: int, rng: random.Random) -> int:
    if null_policy == "one":
        return 1
    if null_policy == "random-nonzero":
        return rng.randrange(2, 1 << n)
    raise ValueError(f"unknown null policy {null_policy!r}")


def token_respond(
    share: KeyShare | ShareSequence,
    challenge: Challenge,
    null_policy: str = "one",
    rng: random.Random | None = None,
) -> ResponseVector:
    """Compute a token's per-slot response vector.

    Where the token holds a share it answers the partial decryption of that
    slot's ciphertext; where it holds none it answers a null value, whose
    presence corrupts the merge and is what rejects over-full groups.
    """
    rng = rng if rng is not None else random.Random()
    if isinstance(share, KeyShare):
        if challenge.mode != "monotone":
            raise ValueError("a single key share answers monotone challenges")
        value = partial_decrypt(share, challenge.ciphertext_for(0))
        return ResponseVector(session_id=challenge.session_id, values=(value,))

    if challenge.mode != "sequence":
        raise ValueError("a share sequence answers sequence challenges")
    if len(share.slots) != challenge.slot_count:
        raise ValueError("share sequence length does not match the challenge")
    values = []
    for i, prime_set in enumerate(share.slots):
        if prime_set is None:
            values.append(_null_value(null_policy, share.n, rng))
        else:
            piece = KeyShare(holder=share.holder, s=share.s, p=share.p,
                             prime_subset=prime_set)
            values.append(partial_decrypt(piece, challenge.ciphertext_for(i)))
    return ResponseVector(session_id=challenge.session_id, values=tuple(values))


def merge_monotone(responses: list[ResponseVector]) -> int:
    """Bitwise OR of single-slot responses; empty input merges to 0 (reject)."""
    out = 0
    for r in responses:
        if len(r.values) != 1:
            raise ValueError("monotone responses carry exactly one value")
        out |= r.values[0]
    return out


def merge_sequence(responses: list[ResponseVector], merge: str) -> list[int]:
    """Per-slot arithmetic sum or XOR across all responses."""
    if merge not in ("sum", "xor"):
        raise ValueError(f"unknown sequence merge {merge!r}")
    if not responses:
        return []
    length = len(responses[0].values)
    if any(len(r.values) != length for r in responses):
        raise ValueError("response vectors disagree on slot count")
    merged = []
    for i in range(length):
        if merge == "sum":
            merged.append(sum(r.values[i] for r in responses))
        else:
            x = 0
            for r in responses:
                x ^= r.values[i]
            merged.append(x)
    return merged


def merge_responses(responses: list[ResponseVector], mode: str, merge: str) -> list[int]:
    """Mode-dispatching merge; always returns a per-slot list."""
    _check_mode_merge(mode, merge)
    if mode == "monotone":
        return [merge_monotone(responses)]
    return merge_sequence(responses, merge)


def verify(state: VerifierState, merged: list[int]) -> Verdict:
    """Accept iff some merged value equals the matching secret plaintext."""
    if len(state.plaintexts) not in (1, len(merged)) and merged:
        raise ValueError("merged length does not match the session plaintexts")
    matching = None
    for i, value in enumerate(merged):
        if value == state.plaintext_for(i):
            matching = i
            break
    return Verdict(
        session_id=state.session_id,
        accepted=matching is not None,
        matching_slot=matching,
        merged=tuple(merged),
    )


@dataclass
class AuditReport:
    """Brute-force sweep of every subset against the expected family."""

    universe: tuple[str, ...]
    expected: frozenset[frozenset[str]]
    accepted_by_trial: list[frozenset[frozenset[str]]] = field(default_factory=list)

    @property
    def trials(self) -> int:
        return len(self.accepted_by_trial)

    @property
    def all_exact(self) -> bool:
        return all(acc == self.expected for acc in self.accepted_by_trial)

    def exact_trials(self) -> list[bool]:
        return [acc == self.expected for acc in self.accepted_by_trial]

    def subsets(self) -> list[frozenset[str]]:
        out = []
        for size in range(1, len(self.universe) + 1):
            for combo in itertools.combinations(self.universe, size):
                out.append(frozenset(combo))
        return out

    def frequencies(self) -> dict[frozenset[str], float]:
        """Acceptance rate per subset across all trials."""
        counts = {g: 0 for g in self.subsets()}
        for accepted in self.accepted_by_trial:
            for g in accepted:
                counts[g] += 1
        t = max(self.trials, 1)
        return {g: c / t for g, c in counts.items()}

    def false_accepts(self) -> frozenset[frozenset[str]]:
        """Subsets outside the expected family accepted in any trial."""
        seen: set[frozenset[str]] = set()
        for accepted in self.accepted_by_trial:
            seen |= accepted - self.expected
        return frozenset(seen)

    def missed(self) -> frozenset[frozenset[str]]:
        """Expected groups rejected in at least one trial."""
        out: set[frozenset[str]] = set()
        for accepted in self.accepted_by_trial:
            out |= self.expected - accepted
        return frozenset(out)


def audit(
    priv: NsPrivateKey,
    shares: dict[str, KeyShare | ShareSequence],
    expected: frozenset[frozenset[str]],
    trials: int = 1,
    rng: random.Random | None = None,
    *,
    mode: str,
    merge: str,
    null_policy: str = "one",
    force_m: int | None = None,
    per_index_random: bool = False,
) -> AuditReport:
    """Simulate every non-empty holder subset end to end, `trials` times.

    Each trial draws a fresh challenge (or reuses `force_m`), runs
    respond/merge/verify for all subsets, and records which were accepted.
    The report compares that against the expected family and tallies
    per-subset acceptance frequencies.
    """
    universe = tuple(shares)
    if len(universe) > 20:
        raise ValueError("audit enumerates 2^holders; 20 holders maximum")
    rng = rng if rng is not None else random.Random()
    pub = public_key_of(priv)
    slot_count = 1
    for share in shares.values():
        if isinstance(share, ShareSequence):
            slot_count = len(share.slots)
            break

    report = AuditReport(universe=universe, expected=frozenset(expected))
    for _ in range(trials):
        challenge, state = make_challenge(
            pub, mode=mode, merge=merge, slot_count=slot_count,
            per_index_random=per_index_random, rng=rng, force_m=force_m)
        accepted: set[frozenset[str]] = set()
        for size in range(1, len(universe) + 1):
            for combo in itertools.combinations(universe, size):
                responses = [
                    token_respond(shares[h], challenge, null_policy, rng)
                    for h in combo
                ]
                merged = merge_responses(responses, mode, merge)
                if verify(state, merged).accepted:
                    accepted.add(frozenset(combo))
        report.accepted_by_trial.append(frozenset(accepted))
    return report
