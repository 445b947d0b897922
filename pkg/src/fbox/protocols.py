"""Concrete wirings: distributed computation, functional-box reduction,
twirling, and the basic / recursive random access codes."""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .boxes import Box, make_functional, make_pr
from .engine import Protocol, Use, exact_execute
from .zp import (Poly2, PolyMulti, check_prime, delta, difference_axis, eval_univariate,
                 finite_difference, fp_inv, lagrange_index_poly, monomial)


class NotReducibleError(ValueError):
    """Raised for additively separable functions, whose boxes are local."""


def distributed_compute(F: PolyMulti) -> Protocol:
    """One PR_p per monomial of ``F`` so that ``a - b = F(xs, ys)`` always.

    Alice's input is the tuple ``xs``, Bob's the tuple ``ys``.
    """
    p, terms = F.p, F.terms
    pr = make_pr(p)

    def alice(xs, r):
        a = 0
        for t, ((alpha, _), coeff) in enumerate(terms):
            a += coeff * (yield Use(t, monomial(xs, alpha, p)))
        return a % p, None

    def bob(ys, r, msg):
        b = 0
        for t, ((_, beta), coeff) in enumerate(terms):
            b += coeff * (yield Use(t, monomial(ys, beta, p)))
        return b % p

    return Protocol(p, [pr] * len(terms), alice, bob, name="distributed_compute")


def pr_simulates_functional(f: Poly2) -> Protocol:
    """Build P^f from PR_p copies: distributed computation of f plus a shared shift."""
    p, terms = f.p, f.terms
    pr = make_pr(p)

    def alice(x, r):
        a = 0
        for t, ((i, _), coeff) in enumerate(terms):
            a += coeff * (yield Use(t, pow(x, i, p)))
        return (a + r[0]) % p, None

    def bob(y, r, msg):
        b = 0
        for t, ((_, j), coeff) in enumerate(terms):
            b += coeff * (yield Use(t, pow(y, j, p)))
        return (b + r[0]) % p

    return Protocol(p, [pr] * len(terms), alice, bob, shared=1, name="pr_simulates_functional")


@dataclass
class ReductionPlan:
    source: Poly2
    chain: list[Poly2]
    axes: list[str]
    copies: int
    lam: int
    lam_inv: int
    g: list[int] = field(repr=False)
    h: list[int] = field(repr=False)

    @property
    def delta(self) -> int:
        return delta(self.source)


def _difference_wiring(inner, axis: str, p: int) -> Protocol:
    """Two copies of a box for ``f`` realize one for the ``axis`` difference of ``f``."""
    dx, dy = (1, 0) if axis == "x" else (0, 1)

    def alice(x, r):
        a1 = yield Use(0, x + dx)
        a2 = yield Use(1, x)
        return (a1 - a2) % p, None

    def bob(y, r, msg):
        b1 = yield Use(0, y + dy)
        b2 = yield Use(1, y)
        return (b1 - b2) % p

    return Protocol(p, [inner, inner], alice, bob, name=f"difference_{axis}")


def _affine_wiring(inner, lam_inv: int, g: list[int], h: list[int], p: int) -> Protocol:
    def alice(x, r):
        a = yield Use(0, x)
        return lam_inv * (a - eval_univariate(g, x, p)) % p, None

    def bob(y, r, msg):
        b = yield Use(0, y)
        return lam_inv * (b + eval_univariate(h, y, p)) % p

    return Protocol(p, [inner], alice, bob, name="affine_correction")


def reduction_plan(f: Poly2) -> ReductionPlan:
    d = delta(f)
    if d < 2:
        raise NotReducibleError("f is additively separable, so P^f is local and cannot yield PR_p")
    chain, axes = [f], []
    while delta(chain[-1]) > 2:
        axis = difference_axis(chain[-1])
        axes.append(axis)
        chain.append(finite_difference(chain[-1], axis))
    last = chain[-1]
    lam = last.coeff(1, 1)
    return ReductionPlan(source=f, chain=chain, axes=axes, copies=2 ** len(axes), lam=lam,
                         lam_inv=fp_inv(lam, f.p), g=last.x_part(), h=last.y_part())


def reduce_functional_to_pr(f: Poly2, box: Box | None = None) -> tuple[ReductionPlan, Protocol]:
    """Wire ``2**(delta(f)-2)`` copies of P^f into PR_p.

    ``box`` replaces P^f as the leaf resource, e.g. to see what the same
    wiring does to a noisy box.
    """
    plan = reduction_plan(f)
    p = f.p
    node = box if box is not None else make_functional(f)
    for axis in plan.axes:
        node = _difference_wiring(node, axis, p)
    proto = _affine_wiring(node, plan.lam_inv, plan.g, plan.h, p)
    proto.name = "reduce_functional_to_pr"
    proto.meta["plan"] = plan
    return plan, proto


def depolarize(box: Box) -> Protocol:
    """Random relabelling by shared (alpha, beta, gamma); yields a PR_{p,j} mixture."""
    p = box.p

    def alice(x, r):
        al, be, ga = r
        a = yield Use(0, x + al)
        return (a - be * x - al * be + ga) % p, None

    def bob(y, r, msg):
        al, be, ga = r
        b = yield Use(0, y + be)
        return (b + al * y + ga) % p

    return Protocol(p, [box], alice, bob, shared=3, name="depolarize")


def twirl_functional(box: Box, f: Poly2) -> Protocol:
    """Twirl adapted to ``f = lam*xy + g(x) + h(y)``; yields a mixture of shifted P^f."""
    if delta(f) != 2:
        raise ValueError(f"twirl_functional needs delta(f) == 2, got {delta(f)}")
    p = box.p
    lam, g, h = f.coeff(1, 1), f.x_part(), f.y_part()

    def G(v):
        return eval_univariate(g, v % p, p)

    def H(v):
        return eval_univariate(h, v % p, p)

    def alice(x, r):
        al, be, ga = r
        a = yield Use(0, x + al)
        return (a - lam * be * x - lam * al * be - G(x + al) + G(x) + ga) % p, None

    def bob(y, r, msg):
        al, be, ga = r
        b = yield Use(0, y + be)
        return (b + lam * al * y + H(y + be) - H(y) + ga) % p

    return Protocol(p, [box], alice, bob, shared=3, name="twirl_functional")


def shift_randomize(box: Box) -> Protocol:
    """Both outputs shifted by one shared uniform ``gamma``."""
    p = box.p

    def alice(x, r):
        a = yield Use(0, x)
        return (a + r[0]) % p, None

    def bob(y, r, msg):
        b = yield Use(0, y)
        return (b + r[0]) % p

    return Protocol(p, [box], alice, bob, shared=1, name="shift_randomize")


@dataclass
class RacConfig:
    p: int
    N: int
    c: int
    box: Box
    mode: str = "basic"

    def __post_init__(self):
        check_prime(self.p)
        if self.box.p != self.p:
            raise ValueError("box modulus differs from p")
        self.c %= self.p
        if self.mode == "basic":
            if not 2 <= self.N <= self.p:
                raise ValueError(f"basic RAC needs 2 <= N <= p, got N={self.N}, p={self.p}")
        elif self.mode == "recursive":
            if self.levels is None:
                raise ValueError(f"recursive RAC needs N a power of p, got N={self.N}, p={self.p}")
        else:
            raise ValueError(f"unknown RAC mode {self.mode!r}")

    @property
    def levels(self) -> int | None:
        """``n`` with ``N == p**n`` (``n >= 1``), else None."""
        n, v = 0, self.N
        while v > 1 and v % self.p == 0:
            v //= self.p
            n += 1
        return n if v == 1 and n >= 1 else None

    @property
    def bob_boxes(self) -> int:
        if self.mode == "basic":
            return self.N - 1
        return self.levels * (self.p - 1)


def basic_rac(cfg: RacConfig) -> Protocol:
    """N - 1 twirled copies; Alice sends one digit, Bob guesses ``x_y``."""
    if cfg.mode != "basic":
        raise ValueError("basic_rac needs mode='basic'")
    p, N, c = cfg.p, cfg.N, cfg.c
    F = lagrange_index_poly(p, N)
    twirled = depolarize(cfg.box)

    def alice(xs, r):
        forms = [sum(coef * v for coef, v in zip(row, xs)) % p for row in F]
        q = forms[0]
        for k in range(1, N):
            q += yield Use(k - 1, forms[k])
        return None, q % p

    def bob(y, r, q):
        s = 0
        for k in range(1, N):
            s += yield Use(k - 1, pow(y, k, p))
        return (q - s - c) % p

    return Protocol(p, [twirled] * (N - 1), alice, bob, name="basic_rac", meta={"config": cfg})


def recursive_rac(cfg: RacConfig) -> Protocol:
    """Pyramid of basic codes over ``N = p**n`` digits.

    Level 0 groups Alice's digits in blocks of ``p``; each higher level
    encodes the would-be messages of the level below. Bob descends from the
    top and touches ``p - 1`` boxes per level.
    """
    if cfg.mode != "recursive":
        raise ValueError("recursive_rac needs mode='recursive'")
    p, N, c, n = cfg.p, cfg.N, cfg.c, cfg.levels
    F = lagrange_index_poly(p, p)
    offsets, start = [], 0
    for lvl in range(n):
        offsets.append(start)
        start += (N // p ** (lvl + 1)) * (p - 1)
    twirled = depolarize(cfg.box)

    def slot(lvl, group, t):
        return offsets[lvl] + group * (p - 1) + (t - 1)

    def alice(xs, r):
        vec = list(xs)
        for lvl in range(n):
            nxt = []
            for grp in range(len(vec) // p):
                z = vec[grp * p:(grp + 1) * p]
                forms = [sum(coef * v for coef, v in zip(row, z)) % p for row in F]
                q = forms[0]
                for t in range(1, p):
                    q += yield Use(slot(lvl, grp, t), forms[t])
                nxt.append(q % p)
            vec = nxt
        return None, vec[0]

    def bob(y, r, msg):
        q = msg
        for lvl in reversed(range(n)):
            grp, pos = divmod(y // p ** lvl, p)
            s = 0
            for t in range(1, p):
                s += yield Use(slot(lvl, grp, t), pow(pos, t, p))
            q = (q - s - (c if lvl == 0 else 0)) % p
        return q

    return Protocol(p, [twirled] * (N - 1), alice, bob, name="recursive_rac", meta={"config": cfg})


def rac_protocol(cfg: RacConfig) -> Protocol:
    return basic_rac(cfg) if cfg.mode == "basic" else recursive_rac(cfg)


def rac_inputs(p: int, N: int):
    """All ``(xs, y)`` pairs of the task."""
    for xs in itertools.product(range(p), repeat=N):
        for y in range(N):
            yield xs, y


def rac_success_table(proto: Protocol, p: int, N: int) -> dict:
    """Exact success probability for every input pair."""
    out = {}
    for xs, y in rac_inputs(p, N):
        res = exact_execute(proto, xs, y)
        out[xs, y] = res.prob(lambda _a, b, t=xs[y]: b == t)
    return out


def rac_success_exact(proto: Protocol, p: int, N: int) -> Fraction:
    table = rac_success_table(proto, p, N)
    return sum(table.values(), Fraction(0)) / len(table)


def rac_ic_joints(proto: Protocol, p: int, N: int) -> list[dict]:
    """For each index ``i``: exact joint of ``(x_i, b)`` given ``y = i`` and uniform ``xs``."""
    joints = []
    w = Fraction(1, p ** N)
    for i in range(N):
        joint: dict = defaultdict(Fraction)
        for xs in itertools.product(range(p), repeat=N):
            for b, pb in exact_execute(proto, xs, i).bob_distribution().items():
                joint[xs[i], b] += w * pb
        joints.append(dict(joint))
    return joints


def rac_success_probs(joints: list[dict]) -> list[Fraction]:
    return [sum((w for (u, v), w in joint.items() if u == v), Fraction(0)) for joint in joints]
