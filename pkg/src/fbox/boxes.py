"""Exact bipartite boxes P(a, b | x, y) over Z_p and their noise profiles."""

from __future__ import annotations

import json
import warnings
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .zp import Poly2, check_prime, delta, eval_univariate, is_additively_separable


class Box:
    """Conditional distribution stored as a read-only ``[x][y][a][b]`` tensor of Fractions.

    Normalization is enforced on construction; no-signalling is not, so
    signalling boxes remain representable.
    """

    def __init__(self, p: int, prob):
        check_prime(p)
        arr = np.empty((p, p, p, p), dtype=object)
        src = np.asarray(prob, dtype=object)
        if src.shape != (p, p, p, p):
            raise ValueError(f"expected shape {(p,) * 4}, got {src.shape}")
        for idx in np.ndindex(arr.shape):
            v = Fraction(src[idx])
            if v < 0:
                raise ValueError(f"negative probability {v} at [x][y][a][b]={idx}")
            arr[idx] = v
        for x in range(p):
            for y in range(p):
                total = sum(arr[x, y].flat)
                if total != 1:
                    raise ValueError(f"P(.,.|x={x},y={y}) sums to {total}, not 1")
        arr.flags.writeable = False
        self.p = p
        self.prob = arr

    def __eq__(self, other):
        return isinstance(other, Box) and self.p == other.p and np.array_equal(self.prob, other.prob)

    def __hash__(self):
        return hash((self.p, tuple(self.prob.flat)))

    def __repr__(self):
        return f"Box(p={self.p})"

    def __call__(self, a: int, b: int, x: int, y: int) -> Fraction:
        return self.prob[x, y, a, b]

    def alice_marginal(self, x: int, y: int = 0) -> np.ndarray:
        return self.prob[x, y].sum(axis=1)

    def bob_marginal(self, y: int, x: int = 0) -> np.ndarray:
        return self.prob[x, y].sum(axis=0)

    def difference_mass(self, x: int, y: int, target: int) -> Fraction:
        """P(a - b = target | x, y)."""
        p = self.p
        return sum((self.prob[x, y, k, (k - target) % p] for k in range(p)), Fraction(0))

    # sparse lookup tables used by the wiring engine
    @cached_property
    def _alice_support(self):
        return {x: [(a, w) for a, w in enumerate(self.alice_marginal(x)) if w]
                for x in range(self.p)}

    @cached_property
    def _bob_support(self):
        return {y: [(b, w) for b, w in enumerate(self.bob_marginal(y)) if w]
                for y in range(self.p)}

    @cached_property
    def support_size(self) -> int:
        return max(int(np.count_nonzero(self.prob[x, y])) for x in range(self.p) for y in range(self.p))

    def alice_support(self, x: int):
        return self._alice_support[x]

    def bob_support(self, y: int):
        return self._bob_support[y]

    def bob_given_alice(self, x: int, y: int, a: int):
        """Nonzero ``(b, P(b | a, x, y))`` pairs."""
        pa = sum(self.prob[x, y, a])
        return [(b, w / pa) for b, w in enumerate(self.prob[x, y, a]) if w]

    def alice_given_bob(self, x: int, y: int, b: int):
        pb = sum(self.prob[x, y, :, b])
        return [(a, w / pb) for a, w in enumerate(self.prob[x, y, :, b]) if w]

    def to_float(self) -> np.ndarray:
        return self.prob.astype(float)


def check_no_signalling(box: Box) -> bool:
    p = box.p
    for x in range(p):
        ref = box.alice_marginal(x, 0)
        if any(not np.array_equal(ref, box.alice_marginal(x, y)) for y in range(1, p)):
            return False
    for y in range(p):
        ref = box.bob_marginal(y, 0)
        if any(not np.array_equal(ref, box.bob_marginal(y, x)) for x in range(1, p)):
            return False
    return True


def has_uniform_marginals(box: Box) -> bool:
    u = Fraction(1, box.p)
    return all(
        all(v == u for v in box.prob[x, y].sum(axis=1)) and all(v == u for v in box.prob[x, y].sum(axis=0))
        for x in range(box.p) for y in range(box.p)
    )


def _difference_box(p: int, rule) -> Box:
    """Uniform 1/p over ``a - b == rule(x, y)``."""
    arr = np.full((p, p, p, p), Fraction(0), dtype=object)
    w = Fraction(1, p)
    for x in range(p):
        for y in range(p):
            d = rule(x, y) % p
            for a in range(p):
                arr[x, y, a, (a - d) % p] = w
    return Box(p, arr)


def make_pr_shift(p: int, j: int) -> Box:
    return _difference_box(p, lambda x, y: x * y - j)


def make_pr(p: int) -> Box:
    return make_pr_shift(p, 0)


def make_functional_shift(f: Poly2, j: int) -> Box:
    return _difference_box(f.p, lambda x, y: f(x, y) - j)


def make_functional(f: Poly2) -> Box:
    return make_functional_shift(f, 0)


def make_noise(p: int) -> Box:
    return Box(p, np.full((p, p, p, p), Fraction(1, p * p), dtype=object))


def make_anti_pr() -> Box:
    return make_pr_shift(2, 1)


def make_isotropic(lam) -> Box:
    """``lam * PR_2 + (1 - lam) * P_N`` built as a PR / anti-PR mixture."""
    lam = Fraction(lam)
    if not -1 <= lam <= 1:
        raise ValueError(f"isotropic parameter {lam} outside [-1, 1]")
    return mix([make_pr(2), make_anti_pr()], [(1 + lam) / 2, (1 - lam) / 2])


def make_deterministic(p: int, g: Sequence[int], h: Sequence[int]) -> Box:
    """Local box answering ``a = g[x]``, ``b = h[y]``."""
    arr = np.full((p, p, p, p), Fraction(0), dtype=object)
    for x in range(p):
        for y in range(p):
            arr[x, y, g[x] % p, h[y] % p] = Fraction(1)
    return Box(p, arr)


def mix(boxes: Sequence[Box], weights: Sequence) -> Box:
    if len(boxes) != len(weights) or not boxes:
        raise ValueError("need one weight per box")
    p = boxes[0].p
    if any(b.p != p for b in boxes):
        raise ValueError("modulus mismatch among mixed boxes")
    weights = [Fraction(w) for w in weights]
    if any(w < 0 for w in weights):
        raise ValueError("negative mixture weight")
    if sum(weights) != 1:
        raise ValueError(f"mixture weights sum to {sum(weights)}, not 1")
    arr = sum((w * b.prob for b, w in zip(boxes, weights)), np.full((p,) * 4, Fraction(0), dtype=object))
    return Box(p, arr)


def mu_profile(box: Box) -> list[Fraction]:
    """Weights of the PR_{p,j} mixture that the twirl produces from ``box``."""
    p = box.p
    scale = Fraction(1, p * p)
    return [scale * sum(box.difference_mass(x, y, x * y - j) for x in range(p) for y in range(p))
            for j in range(p)]


def shift_masses(box: Box, f: Poly2) -> np.ndarray:
    """``E[x, y, j] = P(a - b = f(x, y) - j | x, y)`` as an object array."""
    p = box.p
    if f.p != p:
        raise ValueError("modulus mismatch between box and polynomial")
    out = np.empty((p, p, p), dtype=object)
    for x in range(p):
        for y in range(p):
            fxy = f(x, y)
            for j in range(p):
                out[x, y, j] = box.difference_mass(x, y, fxy - j)
    return out


def nu_profile_avg(box: Box, f: Poly2) -> list[Fraction]:
    if delta(f) != 2:
        warnings.warn(f"average shift profile is only established for delta(f)=2 (got {delta(f)})",
                      stacklevel=2)
    p = box.p
    E = shift_masses(box, f)
    return [sum(E[:, :, j].flat) / (p * p) for j in range(p)]


def nu_profile_min(box: Box, f: Poly2) -> list[Fraction]:
    E = shift_masses(box, f)
    return [min(E[:, :, j].flat) for j in range(box.p)]


def simulate_local_separable(f: Poly2) -> Box:
    """Box produced by shared uniform ``z`` with ``a = g(x) + z``, ``b = -h(y) + z``."""
    if not is_additively_separable(f):
        raise ValueError("f is additively inseparable; no local model of this form exists")
    p = f.p
    g, h = f.x_part(), f.y_part()
    arr = np.full((p, p, p, p), Fraction(0), dtype=object)
    w = Fraction(1, p)
    for x in range(p):
        for y in range(p):
            for z in range(p):
                a = (eval_univariate(g, x, p) + z) % p
                b = (-eval_univariate(h, y, p) + z) % p
                arr[x, y, a, b] += w
    return Box(p, arr)


def random_no_signalling(p: int, rng: np.random.Generator, parts: int = 4) -> Box:
    """Random convex mixture of local deterministic and shifted functional boxes."""
    from .zp import poly2_interpolate

    comps = []
    for _ in range(parts):
        kind = rng.integers(3)
        if kind == 0:
            comps.append(make_deterministic(p, rng.integers(p, size=p).tolist(),
                                            rng.integers(p, size=p).tolist()))
        elif kind == 1:
            comps.append(make_pr_shift(p, int(rng.integers(p))))
        else:
            f = poly2_interpolate(rng.integers(p, size=(p, p)).tolist(), p)
            comps.append(make_functional_shift(f, int(rng.integers(p))))
    raw = [int(v) + 1 for v in rng.integers(20, size=parts)]
    return mix(comps, [Fraction(r, sum(raw)) for r in raw])


def box_to_dict(box: Box) -> dict:
    def cell(v: Fraction) -> str:
        return f"{v.numerator}/{v.denominator}"
    return {"p": box.p, "prob": [[[[cell(v) for v in row_a] for row_a in row_y] for row_y in row_x]
                                 for row_x in box.prob.tolist()]}


def box_from_dict(data: dict) -> Box:
    if "p" not in data or "prob" not in data:
        raise ValueError("box JSON needs 'p' and 'prob'")
    p = data["p"]
    try:
        arr = np.array(data["prob"], dtype=object)
    except ValueError as exc:
        raise ValueError(f"ragged probability tensor: {exc}") from None
    if arr.shape != (p, p, p, p):
        raise ValueError(f"'prob' has shape {arr.shape}, expected {(p,) * 4}")
    for idx in np.ndindex(arr.shape):
        if not isinstance(arr[idx], str):
            raise ValueError(f"entry {idx} must be a 'num/den' string")
        arr[idx] = Fraction(arr[idx])
    return Box(p, arr)


def dumps_box(box: Box) -> str:
    return json.dumps(box_to_dict(box), separators=(",", ":"))


def loads_box(text: str) -> Box:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed box JSON: {exc}") from None
    return box_from_dict(data)
