"""Two-party wirings of boxes, executed exactly or by seeded sampling.

A party program is a generator function. It yields :class:`Use` requests and
is sent back the box output for each one::

    def alice(x, r):
        a = yield Use(0, x)
        return a, None          # (final output, message to Bob)

    def bob(y, r, message):
        b = yield Use(0, y)
        return b

``r`` is the tuple of shared uniform Z_p variables. Alice runs first and may
only send one message; Bob sees it but nothing else of Alice's. Box outputs
are drawn party by party: the first party to touch a slot samples from its
marginal, the second from the conditional given the first. That matches the
joint distribution for every no-signalling box, so slot boxes must be
no-signalling.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Iterator

import numpy as np

from .boxes import Box, check_no_signalling

DEFAULT_CEILING = 10**8


class ProtocolError(RuntimeError):
    pass


class BranchLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class Use:
    slot: int
    value: int


class Protocol:
    """Shared randomness, box slots and the two party programs.

    A slot holds either a :class:`Box` or another :class:`Protocol`, which is
    used through the box it induces.
    """

    def __init__(self, p: int, slots, alice: Callable, bob: Callable, shared: int = 0,
                 name: str = "", meta: dict | None = None):
        self.p = p
        self.slots = tuple(slots)
        self.alice = alice
        self.bob = bob
        self.shared = shared
        self.name = name
        self.meta = dict(meta or {})
        seen = set()
        for s in self.slots:
            if isinstance(s, Box):
                if s.p != p:
                    raise ProtocolError(f"slot box has modulus {s.p}, protocol {p}")
                if id(s) not in seen and not check_no_signalling(s):
                    raise ProtocolError("slot boxes must be no-signalling")
                seen.add(id(s))
            elif isinstance(s, Protocol):
                if s.p != p:
                    raise ProtocolError(f"sub-protocol has modulus {s.p}, protocol {p}")
            else:
                raise TypeError(f"slot must be Box or Protocol, got {type(s).__name__}")

    def __repr__(self):
        return f"Protocol({self.name or 'anonymous'}, p={self.p}, slots={len(self.slots)})"

    def slot_box(self, i: int) -> Box:
        return self._resolved[i]

    @cached_property
    def _resolved(self) -> tuple[Box, ...]:
        cache: dict[int, Box] = {}
        out = []
        for s in self.slots:
            if isinstance(s, Protocol):
                if id(s) not in cache:
                    cache[id(s)] = s.induced
                out.append(cache[id(s)])
            else:
                out.append(s)
        return tuple(out)

    @cached_property
    def induced(self) -> Box:
        return induced_box(self)

    def slot_copies(self, i: int) -> int:
        s = self.slots[i]
        return s.total_copies if isinstance(s, Protocol) else 1

    @property
    def total_copies(self) -> int:
        """Number of leaf boxes, counting through nested protocols."""
        return sum(self.slot_copies(i) for i in range(len(self.slots)))

    def branch_estimate(self) -> int:
        est = self.p ** self.shared
        for b in self._resolved:
            est *= b.support_size
        return est


@dataclass
class ExecResult:
    """Exact joint distribution of (Alice output, Bob output), or one sampled outcome."""

    dist: dict | None = None
    outcome: tuple | None = None
    seed: Any = None
    alice_slots: frozenset = field(default_factory=frozenset)
    bob_slots: frozenset = field(default_factory=frozenset)
    alice_copies: int = 0
    bob_copies: int = 0

    def prob(self, pred: Callable[[Any, Any], bool]) -> Fraction:
        return sum((w for (a, b), w in self.dist.items() if pred(a, b)), Fraction(0))

    def bob_distribution(self) -> dict:
        out: dict = defaultdict(Fraction)
        for (_, b), w in self.dist.items():
            out[b] += w
        return dict(out)


def _normalize_use(req, p: int, nslots: int, used: set, who: str) -> Use:
    if not isinstance(req, Use):
        raise ProtocolError(f"{who} yielded {req!r}, expected Use")
    if not 0 <= req.slot < nslots:
        raise ProtocolError(f"{who} used unknown slot {req.slot}")
    if req.slot in used:
        raise ProtocolError(f"{who} used slot {req.slot} twice")
    used.add(req.slot)
    return Use(req.slot, req.value % p)


def _explore(start: Callable, choose: Callable, p: int, nslots: int, who: str) -> Iterator:
    """Depth-first enumeration of a party program by replaying its generator.

    Yields ``(history, return_value, weight)`` where history maps slot to
    ``(input, output)``.
    """
    stack = [((), Fraction(1))]
    while stack:
        prefix, w = stack.pop()
        gen = start()
        hist: dict[int, tuple[int, int]] = {}
        used: set = set()
        try:
            req = _normalize_use(next(gen), p, nslots, used, who)
            for o in prefix:
                hist[req.slot] = (req.value, o)
                req = _normalize_use(gen.send(o), p, nslots, used, who)
        except StopIteration as stop:
            yield hist, stop.value, w
            continue
        for o, wo in choose(req, hist):
            stack.append((prefix + (o,), w * wo))


def _bob_choices(proto: Protocol, alice_hist: dict):
    def choose(req: Use, _hist):
        box = proto.slot_box(req.slot)
        if req.slot in alice_hist:
            xa, a = alice_hist[req.slot]
            return _cond_b(box, xa, req.value, a)
        return box.bob_support(req.value)
    return choose


def _cond_b(box: Box, x: int, y: int, a: int):
    memo = box.__dict__.setdefault("_cond_b", {})
    key = (x, y, a)
    if key not in memo:
        memo[key] = box.bob_given_alice(x, y, a)
    return memo[key]


def _split_alice_return(value, who="alice"):
    if not (isinstance(value, tuple) and len(value) == 2):
        raise ProtocolError(f"{who} must return (output, message), got {value!r}")
    return value


def exact_execute(proto: Protocol, alice_input, bob_input, ceiling: int = DEFAULT_CEILING) -> ExecResult:
    """Enumerate every shared-randomness value and box-outcome branch."""
    est = proto.branch_estimate()
    if est > ceiling:
        raise BranchLimitError(f"~{est} branches exceeds ceiling {ceiling}; use sampling")
    p, nslots = proto.p, len(proto.slots)
    dist: dict = defaultdict(Fraction)
    a_used: set = set()
    b_used: set = set()
    w0 = Fraction(1, p ** proto.shared)
    alice_choose = lambda req, _h: proto.slot_box(req.slot).alice_support(req.value)  # noqa: E731
    for r in itertools.product(range(p), repeat=proto.shared):
        for a_hist, ret, wa in _explore(lambda: proto.alice(alice_input, r), alice_choose, p, nslots, "alice"):
            a_out, msg = _split_alice_return(ret)
            a_used.update(a_hist)
            bob_branches = _explore(lambda: proto.bob(bob_input, r, msg), _bob_choices(proto, a_hist),
                                    p, nslots, "bob")
            for b_hist, b_out, wb in bob_branches:
                b_used.update(b_hist)
                dist[(a_out, b_out)] += w0 * wa * wb
    return ExecResult(dist=dict(dist), alice_slots=frozenset(a_used), bob_slots=frozenset(b_used),
                      alice_copies=sum(proto.slot_copies(i) for i in a_used),
                      bob_copies=sum(proto.slot_copies(i) for i in b_used))


def _float_table(box: Box, key, pairs):
    memo = box.__dict__.setdefault("_float_tables", {})
    if key not in memo:
        outs = [o for o, _ in pairs]
        cum = np.cumsum([float(w) for _, w in pairs])
        memo[key] = (outs, cum)
    return memo[key]


def _draw(outs, cum, u: float) -> int:
    # last outcome absorbs float round-off in the cumulative sum
    k = int(np.searchsorted(cum, u * cum[-1], side="right"))
    return outs[min(k, len(outs) - 1)]


def _run_sampled(proto: Protocol, alice_input, bob_input, rng: np.random.Generator) -> ExecResult:
    p, nslots = proto.p, len(proto.slots)
    r = tuple(int(v) for v in rng.integers(p, size=proto.shared))

    gen = proto.alice(alice_input, r)
    a_hist: dict[int, tuple[int, int]] = {}
    used: set = set()
    try:
        req = _normalize_use(next(gen), p, nslots, used, "alice")
        while True:
            box = proto.slot_box(req.slot)
            outs, cum = _float_table(box, ("A", req.value), box.alice_support(req.value))
            a = _draw(outs, cum, rng.random())
            a_hist[req.slot] = (req.value, a)
            req = _normalize_use(gen.send(a), p, nslots, used, "alice")
    except StopIteration as stop:
        a_out, msg = _split_alice_return(stop.value)

    gen = proto.bob(bob_input, r, msg)
    b_used: set = set()
    try:
        req = _normalize_use(next(gen), p, nslots, b_used, "bob")
        while True:
            box = proto.slot_box(req.slot)
            if req.slot in a_hist:
                xa, a = a_hist[req.slot]
                key = ("B|A", xa, req.value, a)
                pairs = _cond_b(box, xa, req.value, a)
            else:
                key = ("B", req.value)
                pairs = box.bob_support(req.value)
            outs, cum = _float_table(box, key, pairs)
            req = _normalize_use(gen.send(_draw(outs, cum, rng.random())), p, nslots, b_used, "bob")
    except StopIteration as stop:
        b_out = stop.value
    return ExecResult(outcome=(a_out, b_out), alice_slots=frozenset(a_hist), bob_slots=frozenset(b_used),
                      alice_copies=sum(proto.slot_copies(i) for i in a_hist),
                      bob_copies=sum(proto.slot_copies(i) for i in b_used))


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_execute(proto: Protocol, alice_input, bob_input, seed) -> ExecResult:
    """Draw one outcome; a pure function of ``(proto, inputs, seed)``."""
    res = _run_sampled(proto, alice_input, bob_input, as_generator(seed))
    res.seed = seed
    return res


def block_seed(master: int, block: int) -> np.random.SeedSequence:
    """Child seed for sample block ``block``; independent of worker scheduling."""
    return np.random.SeedSequence(master, spawn_key=(block,))


def run_blocks(fn: Callable[[np.random.Generator, int], Any], n: int, seed: int,
               block_size: int = 10_000, workers: int = 1) -> list:
    """Split ``n`` draws into fixed blocks, run ``fn(rng, count)`` per block, keep block order."""
    if n < 0 or block_size <= 0:
        raise ValueError("need n >= 0 and block_size > 0")
    jobs = [(i, min(block_size, n - start)) for i, start in enumerate(range(0, n, block_size))]

    def one(job):
        i, count = job
        return fn(np.random.default_rng(block_seed(seed, i)), count)

    if workers <= 1:
        return [one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, jobs))


def sample_many(proto: Protocol, draw_inputs: Callable[[np.random.Generator], tuple], n: int,
                seed: int = 0, block_size: int = 10_000, workers: int = 1) -> list[tuple]:
    """``n`` sampled runs as ``(alice_input, bob_input, alice_output, bob_output)``."""
    def block(rng, count):
        out = []
        for _ in range(count):
            x, y = draw_inputs(rng)
            res = _run_sampled(proto, x, y, rng)
            out.append((x, y) + res.outcome)
        return out

    return [row for chunk in run_blocks(block, n, seed, block_size, workers) for row in chunk]


def induced_box(proto: Protocol, ceiling: int = DEFAULT_CEILING) -> Box:
    """The box P'(a, b | x, y) the wiring realizes, from exact runs on all p^2 inputs."""
    p = proto.p
    arr = np.full((p, p, p, p), Fraction(0), dtype=object)
    for x in range(p):
        for y in range(p):
            res = exact_execute(proto, x, y, ceiling)
            for (a, b), w in res.dist.items():
                if not (isinstance(a, int) and isinstance(b, int) and 0 <= a < p and 0 <= b < p):
                    raise ProtocolError(f"outputs ({a!r}, {b!r}) are not single Z_{p} values")
                arr[x, y, a, b] += w
    return Box(p, arr)


def identity_wiring(box: Box) -> Protocol:
    def alice(x, r):
        a = yield Use(0, x)
        return a, None

    def bob(y, r, msg):
        b = yield Use(0, y)
        return b

    return Protocol(box.p, [box], alice, bob, name="identity")
