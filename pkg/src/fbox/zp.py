"""Arithmetic in Z_p and polynomial algebra over it.

Field elements are plain ``int`` values kept in ``range(p)``. Polynomials are
immutable and store only nonzero coefficients, so ``==`` is semantic equality.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

MAX_PRIME = 97


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def check_prime(p: int, ceiling: int = MAX_PRIME) -> int:
    """Return ``p`` if it is a prime no larger than ``ceiling``, else raise."""
    if not isinstance(p, int) or isinstance(p, bool):
        raise TypeError(f"modulus must be an int, got {type(p).__name__}")
    if not is_prime(p):
        raise ValueError(f"modulus {p} is not prime")
    if p > ceiling:
        raise ValueError(f"modulus {p} exceeds the enumeration ceiling {ceiling}")
    return p


def fp_inv(x: int, p: int) -> int:
    x %= p
    if x == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    return pow(x, -1, p)


def _reduce_exponent(e: int, p: int) -> int:
    # x^p == x on Z_p, so exponents fold into 1..p-1
    if e < 0:
        raise ValueError("negative exponent")
    if e == 0:
        return 0
    return (e - 1) % (p - 1) + 1


def _poly_mul(u: Sequence[int], v: Sequence[int], p: int) -> list[int]:
    out = [0] * (len(u) + len(v) - 1)
    for i, a in enumerate(u):
        if a:
            for j, b in enumerate(v):
                out[i + j] = (out[i + j] + a * b) % p
    return out


def lagrange_basis(p: int, nodes: Sequence[int]) -> list[list[int]]:
    """Coefficient vectors of the Lagrange basis on ``nodes``.

    Row ``k`` holds the coefficients (lowest degree first) of the polynomial
    that is 1 at ``nodes[k]`` and 0 at every other node.
    """
    basis = []
    for k, xk in enumerate(nodes):
        num = [1]
        den = 1
        for m, xm in enumerate(nodes):
            if m != k:
                num = _poly_mul(num, [-xm % p, 1], p)
                den = den * (xk - xm) % p
        inv = fp_inv(den, p)
        coeffs = [c * inv % p for c in num]
        coeffs += [0] * (len(nodes) - len(coeffs))
        basis.append(coeffs)
    return basis


def lagrange_index_poly(p: int, N: int) -> list[list[int]]:
    """Decompose the index function ``x_y`` as ``sum_k y^k F_k(x)``.

    Returns ``F`` with ``F[k][i]`` the coefficient of ``x_i`` in the linear
    form ``F_k``, for ``k, i < N`` and ``y`` ranging over ``0..N-1``.
    """
    check_prime(p)
    if N < 1:
        raise ValueError("N must be positive")
    if N > p:
        raise ValueError(f"N={N} exceeds p={p}; use the recursive regime")
    basis = lagrange_basis(p, list(range(N)))
    return [[basis[i][k] for i in range(N)] for k in range(N)]


def _binomial_row(n: int, p: int) -> list[int]:
    return [math.comb(n, k) % p for k in range(n + 1)]


@dataclass(frozen=True)
class Poly2:
    """Bivariate polynomial over Z_p with per-variable degree below ``p``."""

    p: int
    terms: tuple[tuple[tuple[int, int], int], ...]

    def __init__(self, p: int, coeffs: Mapping[tuple[int, int], int] | None = None):
        check_prime(p)
        acc: dict[tuple[int, int], int] = {}
        for (i, j), c in (coeffs or {}).items():
            key = (_reduce_exponent(i, p), _reduce_exponent(j, p))
            acc[key] = (acc.get(key, 0) + c) % p
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "terms", tuple(sorted((k, c) for k, c in acc.items() if c)))

    @property
    def coeffs(self) -> dict[tuple[int, int], int]:
        return dict(self.terms)

    def coeff(self, i: int, j: int) -> int:
        return self.coeffs.get((i, j), 0)

    def is_zero(self) -> bool:
        return not self.terms

    def __call__(self, x: int, y: int) -> int:
        return poly2_eval(self, x, y)

    def __add__(self, other: Poly2) -> Poly2:
        _same_field(self, other)
        acc = self.coeffs
        for k, c in other.terms:
            acc[k] = acc.get(k, 0) + c
        return Poly2(self.p, acc)

    def __neg__(self) -> Poly2:
        return Poly2(self.p, {k: -c for k, c in self.terms})

    def __sub__(self, other: Poly2) -> Poly2:
        return self + (-other)

    def scale(self, s: int) -> Poly2:
        return Poly2(self.p, {k: c * s for k, c in self.terms})

    def x_part(self) -> list[int]:
        """Coefficients of the pure-x terms, constant included."""
        out = [0] * self.p
        for (i, j), c in self.terms:
            if j == 0:
                out[i] = c
        return out

    def y_part(self) -> list[int]:
        """Coefficients of the pure-y terms of positive degree."""
        out = [0] * self.p
        for (i, j), c in self.terms:
            if i == 0 and j > 0:
                out[j] = c
        return out

    def table(self) -> list[list[int]]:
        return [[self(x, y) for y in range(self.p)] for x in range(self.p)]

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"Poly2(p={self.p}, '{format_poly(self)}')"


def _same_field(f, g) -> None:
    if f.p != g.p:
        raise ValueError(f"modulus mismatch: {f.p} != {g.p}")


def eval_univariate(coeffs: Sequence[int], x: int, p: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


def poly2_eval(f: Poly2, x: int, y: int) -> int:
    p = f.p
    return sum(c * pow(x, i, p) * pow(y, j, p) for (i, j), c in f.terms) % p


def poly2_interpolate(table, p: int) -> Poly2:
    """Interpolate a function on Z_p x Z_p given as ``table[x][y]`` or a dict.

    Two nested univariate Lagrange passes; exact and O(p^4).
    """
    check_prime(p)
    if isinstance(table, Mapping):
        missing = [(x, y) for x in range(p) for y in range(p) if (x, y) not in table]
        if missing:
            raise ValueError(f"table incomplete, missing {len(missing)} points e.g. {missing[0]}")
        values = [[table[x, y] % p for y in range(p)] for x in range(p)]
    else:
        if len(table) != p or any(len(row) != p for row in table):
            raise ValueError(f"table must be {p}x{p}")
        values = [[v % p for v in row] for row in table]
    basis = lagrange_basis(p, list(range(p)))
    # first pass over y: each row x becomes coefficients in y
    rows = [[sum(values[x][y] * basis[y][j] for y in range(p)) % p for j in range(p)]
            for x in range(p)]
    coeffs = {}
    for i in range(p):
        for j in range(p):
            c = sum(rows[x][j] * basis[x][i] for x in range(p)) % p
            if c:
                coeffs[i, j] = c
    return Poly2(p, coeffs)


def finite_difference(f: Poly2, axis: str) -> Poly2:
    """``f(x+1, y) - f(x, y)`` for axis ``'x'``, ``f(x, y+1) - f(x, y)`` for ``'y'``."""
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    p = f.p
    acc: dict[tuple[int, int], int] = {}
    for (i, j), c in f.terms:
        e = i if axis == "x" else j
        row = _binomial_row(e, p)
        for k in range(e):  # k == e is the term cancelled by subtraction
            key = (k, j) if axis == "x" else (i, k)
            acc[key] = acc.get(key, 0) + c * row[k]
    return Poly2(p, acc)


def delta(f: Poly2) -> int:
    """Largest total degree among terms divisible by ``xy``; 0 if none."""
    return max((i + j for (i, j), _ in f.terms if i >= 1 and j >= 1), default=0)


def is_additively_separable(f: Poly2) -> bool:
    return delta(f) == 0


def difference_axis(f: Poly2) -> str:
    """Axis whose difference lowers ``delta(f)`` by exactly one (x preferred).

    Requires ``delta(f) >= 3``; a top-degree mixed term ``x^i y^j`` with
    ``i >= 2`` makes the x-difference work, otherwise one with ``j >= 2``
    exists and the y-difference works.
    """
    d = delta(f)
    if d < 3:
        raise ValueError(f"difference step needs delta >= 3, got {d}")
    top = [(i, j) for (i, j), _ in f.terms if i >= 1 and j >= 1 and i + j == d]
    return "x" if any(i >= 2 for i, _ in top) else "y"


class PolyMulti:
    """Polynomial in Alice's variables ``x_0..x_{n-1}`` and Bob's ``y_0..y_{m-1}``.

    Keys of ``coeffs`` are pairs ``(alpha, beta)`` of exponent tuples.
    """

    def __init__(self, p: int, n: int, m: int, coeffs=None):
        check_prime(p)
        self.p, self.n, self.m = p, n, m
        acc: dict = {}
        for (alpha, beta), c in (coeffs or {}).items():
            alpha, beta = tuple(alpha), tuple(beta)
            if len(alpha) != n or len(beta) != m:
                raise ValueError("exponent vector length does not match arity")
            key = (tuple(_reduce_exponent(e, p) for e in alpha),
                   tuple(_reduce_exponent(e, p) for e in beta))
            acc[key] = (acc.get(key, 0) + c) % p
        self.terms = tuple(sorted((k, c) for k, c in acc.items() if c))

    def __eq__(self, other):
        return (isinstance(other, PolyMulti)
                and (self.p, self.n, self.m, self.terms) == (other.p, other.n, other.m, other.terms))

    def __hash__(self):
        return hash((self.p, self.n, self.m, self.terms))

    def __repr__(self):
        return f"PolyMulti(p={self.p}, n={self.n}, m={self.m}, terms={len(self.terms)})"

    def __call__(self, xs: Sequence[int], ys: Sequence[int]) -> int:
        p = self.p
        total = 0
        for (alpha, beta), c in self.terms:
            total += c * monomial(xs, alpha, p) * monomial(ys, beta, p)
        return total % p

    @classmethod
    def from_poly2(cls, f: Poly2) -> PolyMulti:
        return cls(f.p, 1, 1, {((i,), (j,)): c for (i, j), c in f.terms})

    @classmethod
    def from_function(cls, fn: Callable[[tuple, tuple], int], p: int, n: int, m: int) -> PolyMulti:
        """Interpolate an arbitrary ``Z_p^n x Z_p^m -> Z_p`` function."""
        basis = lagrange_basis(p, list(range(p)))
        k = n + m
        values = {pt: fn(pt[:n], pt[n:]) % p for pt in itertools.product(range(p), repeat=k)}
        # one axis at a time turns point values into coefficients
        for axis in range(k):
            nxt = {}
            for pt in values:
                total = 0
                for v in range(p):
                    src = pt[:axis] + (v,) + pt[axis + 1:]
                    total += values[src] * basis[v][pt[axis]]
                nxt[pt] = total % p
            values = nxt
        return cls(p, n, m, {(e[:n], e[n:]): c for e, c in values.items() if c})


def monomial(vals: Sequence[int], exps: Sequence[int], p: int) -> int:
    out = 1
    for v, e in zip(vals, exps):
        out = out * pow(v, e, p) % p
    return out


_TERM = re.compile(r"^(?:(\d+)|x(?:\^(\d+))?|y(?:\^(\d+))?)$")


def parse_poly(text: str, p: int) -> Poly2:
    """Parse ``x^2*y^2 + 2*x*y^2 + x*y + 2*x`` style text into a :class:`Poly2`."""
    check_prime(p)
    compact = text.replace(" ", "")
    if not compact:
        raise ValueError("empty polynomial")
    coeffs: dict[tuple[int, int], int] = {}
    for term in compact.split("+"):
        if not term:
            raise ValueError(f"malformed polynomial {text!r}: empty term")
        c, i, j = 1, 0, 0
        for factor in term.split("*"):
            m = _TERM.match(factor)
            if m is None:
                raise ValueError(f"malformed factor {factor!r} in {text!r}")
            if m.group(1) is not None:
                c *= int(m.group(1))
            elif factor.startswith("x"):
                i += int(m.group(2) or 1)
            else:
                j += int(m.group(3) or 1)
        key = (_reduce_exponent(i, p), _reduce_exponent(j, p))
        coeffs[key] = coeffs.get(key, 0) + c
    return Poly2(p, coeffs)


def format_poly(f: Poly2) -> str:
    if f.is_zero():
        return "0"
    parts = []
    for (i, j), c in sorted(f.terms, key=lambda t: (-(t[0][0] + t[0][1]), -t[0][0])):
        factors = [] if c == 1 and (i or j) else [str(c)]
        if i:
            factors.append("x" if i == 1 else f"x^{i}")
        if j:
            factors.append("y" if j == 1 else f"y^{j}")
        parts.append("*".join(factors))
    return " + ".join(parts)
