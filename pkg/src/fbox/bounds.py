"""Shift-sum probabilities, entropy helpers and the information-causality checks.

Information is measured in bits throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .boxes import Box, mu_profile, nu_profile_avg, nu_profile_min
from .protocols import reduction_plan
from .zp import Poly2, delta

VIOLATION_TOL = 1e-9
EXACT_LIMIT = 10**4  # M * p above this switches the default to the DFT form


def cyclic_convolve(u: Sequence, v: Sequence, p: int) -> list:
    out = [u[0] * 0] * p
    for i, a in enumerate(u):
        if a:
            for j, b in enumerate(v):
                out[(i + j) % p] += a * b
    return out


def _conv_power(w: Sequence, M: int, p: int) -> list:
    """``M``-fold cyclic self-convolution by repeated squaring."""
    result = [w[0] * 0 + 1] + [w[0] * 0] * (p - 1)
    base = list(w)
    while M:
        if M & 1:
            result = cyclic_convolve(result, base, p)
        M >>= 1
        if M:
            base = cyclic_convolve(base, base, p)
    return result


def _fourier(w: Sequence, p: int, sign: int = 1) -> np.ndarray:
    # hat_w[k] = sum_j w_j * omega^(sign * j * k)
    jk = np.outer(np.arange(p), np.arange(p)) % p
    return np.exp(sign * 2j * np.pi * jk / p) @ np.asarray([float(v) for v in w])


def chi(mu: Sequence, M: int, c: int, method: str | None = None):
    """Probability that ``M`` independent shifts drawn from ``mu`` sum to ``-c``.

    ``method='convolution'`` is exact for Fraction input; ``'dft'`` uses the
    roots-of-unity closed form in floating point.
    """
    p = len(mu)
    if M < 1:
        raise ValueError("M must be >= 1")
    if method is None:
        method = "convolution" if M * p <= EXACT_LIMIT else "dft"
    c %= p
    if method == "convolution":
        return _conv_power(mu, M, p)[-c % p]
    if method == "dft":
        k = np.arange(p)
        val = (np.exp(2j * np.pi * c * k / p) * _fourier(mu, p) ** M).sum() / p
        if abs(val.imag) > 1e-10:
            raise ArithmeticError(f"non-negligible imaginary part {val.imag}")
        return float(val.real)
    raise ValueError(f"unknown method {method!r}")


def sigma(nu: Sequence, L: int, c: int, lam: int = 1, method: str | None = None):
    """Mass of shift tuples whose first half minus second half equals ``-lam * c``.

    ``nu`` may be sub-normalized.
    """
    p = len(nu)
    if L < 2 or L % 2:
        raise ValueError(f"L must be a positive even integer, got {L}")
    if lam % p == 0:
        raise ValueError("lam must be nonzero mod p")
    if method is None:
        method = "direct" if L * p <= EXACT_LIMIT else "dft"
    target = (-lam * c) % p
    if method == "direct":
        half = _conv_power(nu, L // 2, p)
        reflected = [half[-j % p] for j in range(p)]
        return cyclic_convolve(half, reflected, p)[target]
    if method == "dft":
        k = np.arange(p)
        hat_plus, hat_minus = _fourier(nu, p, 1), _fourier(nu, p, -1)
        val = (np.exp(2j * np.pi * (lam * c % p) * k / p)
               * hat_plus ** (L // 2) * hat_minus ** (L // 2)).sum() / p
        if abs(val.imag) > 1e-10:
            raise ArithmeticError(f"non-negligible imaginary part {val.imag}")
        return float(val.real)
    raise ValueError(f"unknown method {method!r}")


def binary_entropy(x: float) -> float:
    if x <= 0 or x >= 1:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def t_p(x: float, p: int) -> float:
    """``h(x) + (1 - x) log2(p - 1)``: max entropy of a p-ary guess correct w.p. ``x``."""
    x = float(x)
    return binary_entropy(x) + (1 - x) * math.log2(p - 1)


def t_p_inverse(t: float, p: int, branch: str = "decreasing") -> float:
    """Invert ``t_p`` on ``[1/p, 1]`` (decreasing) or ``[0, 1/p]`` (increasing)."""
    log_p = math.log2(p)
    if branch == "decreasing":
        lo, hi, t_lo, t_hi = 1 / p, 1.0, log_p, 0.0
    elif branch == "increasing":
        lo, hi, t_lo, t_hi = 0.0, 1 / p, math.log2(p - 1), log_p
    else:
        raise ValueError(f"unknown branch {branch!r}")
    t_min, t_max = min(t_lo, t_hi), max(t_lo, t_hi)
    if not t_min - 1e-12 <= t <= t_max + 1e-12:
        raise ValueError(f"t={t} outside [{t_min}, {t_max}] for the {branch} branch")
    if abs(t - t_lo) <= 1e-15:
        return lo
    if abs(t - t_hi) <= 1e-15:
        return hi
    return brentq(lambda x: t_p(x, p) - t, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)


def fano_lower_bound(success_probs: Sequence, p: int) -> float:
    probs = [float(s) for s in success_probs]
    if any(not 0 <= s <= 1 for s in probs):
        raise ValueError("success probabilities must lie in [0, 1]")
    extra = math.log2(p - 1)
    return len(probs) * math.log2(p) - sum(binary_entropy(s) for s in probs) - sum((1 - s) * extra for s in probs)


def mutual_information(joint: dict) -> float:
    """I(U:V) in bits for a joint given as ``{(u, v): prob}``."""
    total = sum(joint.values())
    if abs(float(total) - 1) > 1e-12:
        raise ValueError(f"joint sums to {float(total)}, not 1")
    pu: dict = {}
    pv: dict = {}
    for (u, v), w in joint.items():
        pu[u] = pu.get(u, 0) + w
        pv[v] = pv.get(v, 0) + w
    return sum(float(w) * math.log2(float(w) / (float(pu[u]) * float(pv[v])))
               for (u, v), w in joint.items() if w > 0)


def ic_quantity(joints: Sequence[dict]) -> float:
    return sum(mutual_information(j) for j in joints)


@dataclass
class BoundReport:
    theorem: str
    params: dict
    lhs: float
    rhs: float
    profile: list
    violated: bool = field(init=False)

    def __post_init__(self):
        self.violated = self.lhs > self.rhs + VIOLATION_TOL

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "params": self.params,
            "lhs": f"{self.lhs:.12g}",
            "rhs": f"{self.rhs:.12g}",
            "violated": self.violated,
            "method": "analytic",
            "profile": [str(Fraction(v)) if isinstance(v, (Fraction, int)) else f"{v:.12g}"
                        for v in self.profile],
            "log_base": 2,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def ic_rhs(N: int, p: int) -> float:
    """Success cap when one digit is sent and Alice holds ``N`` digits."""
    return t_p_inverse((N - 1) / N * math.log2(p), p)


def _shifts(p: int, c: int | None) -> list[int]:
    return list(range(p)) if c is None else [c % p]


def _regime(p: int, N: int | None, n: int | None) -> tuple[int, int, dict]:
    """Returns ``(M, N_total, params)`` for the basic (``N``) or recursive (``n``) regime."""
    if (N is None) == (n is None):
        raise ValueError("give exactly one of N (basic) or n (recursive)")
    if N is not None:
        if not 2 <= N <= p:
            raise ValueError(f"basic regime needs 2 <= N <= p, got N={N}")
        return N - 1, N, {"N": N}
    if n < 1:
        raise ValueError("n must be >= 1")
    return n * (p - 1), p ** n, {"n": n, "N": p ** n}


def check_icpr(box: Box, N: int, c: int) -> BoundReport:
    p = box.p
    M, N_total, params = _regime(p, N, None)
    mu = mu_profile(box)
    return BoundReport("icpr", {"p": p, **params, "c": c % p}, float(chi(mu, M, c)), ic_rhs(N_total, p), mu)


def check_icpr2(box: Box, n: int, c: int) -> BoundReport:
    p = box.p
    M, N_total, params = _regime(p, None, n)
    mu = mu_profile(box)
    return BoundReport("icpr2", {"p": p, **params, "c": c % p}, float(chi(mu, M, c)), ic_rhs(N_total, p), mu)


def check_icpf1(box: Box, f: Poly2, N: int | None = None, n: int | None = None,
                c: int | None = None) -> list[BoundReport]:
    if delta(f) != 2:
        raise ValueError(f"icpf1 applies to delta(f) == 2, got {delta(f)}")
    p = box.p
    M, N_total, params = _regime(p, N, n)
    nu = nu_profile_avg(box, f)
    rhs = ic_rhs(N_total, p)
    return [BoundReport("icpf1", {"p": p, **params, "c": cc, "f": str(f)}, float(chi(nu, M, cc)), rhs, nu)
            for cc in _shifts(p, c)]


def check_icpf2(box: Box, f: Poly2, N: int | None = None, n: int | None = None,
                c: int | None = None) -> list[BoundReport]:
    d = delta(f)
    if d <= 2:
        raise ValueError(f"icpf2 applies to delta(f) > 2, got {d}")
    p = box.p
    M, N_total, params = _regime(p, N, n)
    L = M * 2 ** (d - 2)
    lam = reduction_plan(f).lam
    nu = nu_profile_min(box, f)
    rhs = ic_rhs(N_total, p)
    return [BoundReport("icpf2", {"p": p, **params, "c": cc, "f": str(f), "L": L, "lambda": lam},
                        float(sigma(nu, L, cc, lam)), rhs, nu)
            for cc in _shifts(p, c)]


def isotropic_violates(lam: float, n_max: int) -> bool:
    """Whether ``P_iso(lam)`` breaks the recursive-regime bound for some ``n <= n_max``."""
    mu = [(1 + lam) / 2, (1 - lam) / 2]
    for n in range(1, n_max + 1):
        rhs = ic_rhs(2 ** n, 2)
        if any(chi(mu, n, c, "dft") > rhs + VIOLATION_TOL for c in (0, 1)):
            return True
    return False


def tsirelson_threshold_sweep(n_max: int, resolution: float = 1e-4, lo: float = 0.0, hi: float = 1.0) -> float:
    """Smallest isotropic ``lam`` (to ``resolution``) flagged by the recursive-regime bound."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if isotropic_violates(lo, n_max) or not isotropic_violates(hi, n_max):
        raise ValueError("violation predicate does not bracket a threshold on [lo, hi]")
    while hi - lo > resolution:
        mid = (lo + hi) / 2
        if isotropic_violates(mid, n_max):
            hi = mid
        else:
            lo = mid
    return hi
