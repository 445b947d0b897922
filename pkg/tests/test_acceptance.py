"""Acceptance criteria, one function each.

Every check returns ``(ok, detail)``. Run under pytest, or directly with
``python tests/test_acceptance.py`` for a plain PASS/FAIL listing.
"""

import itertools
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from fbox.bounds import (check_icpf1, check_icpf2, check_icpr, check_icpr2, chi, fano_lower_bound,
                         ic_quantity, mutual_information, sigma, tsirelson_threshold_sweep)
from fbox.boxes import (make_deterministic, make_functional, make_isotropic, make_noise, make_pr,
                        make_pr_shift, mix, mu_profile, random_no_signalling, simulate_local_separable)
from fbox.engine import induced_box, sample_execute, sample_many
from fbox.mc import rac_mc
from fbox.protocols import (RacConfig, basic_rac, depolarize, rac_ic_joints, rac_protocol,
                            rac_success_exact, rac_success_probs, recursive_rac, reduce_functional_to_pr)
from fbox.zp import format_poly, parse_poly, poly2_interpolate

RESULTS: list[str] = []
PRIMES = [2, 3, 5, 7, 11, 13]


def _random_separable(p, rng):
    g, h = rng.integers(p, size=p), rng.integers(p, size=p)
    return poly2_interpolate([[int(g[x] + h[y]) % p for y in range(p)] for x in range(p)], p)


def ac1():
    t0 = time.perf_counter()
    f = parse_poly("x^2*y^2 + 2*x*y^2 + x*y + 2*x", 3)
    plan, proto = reduce_functional_to_pr(f)
    chain = [format_poly(g) for g in plan.chain]
    equal = induced_box(proto) == make_pr(3)
    dt = time.perf_counter() - t0
    ok = (chain[1:] == ["2*x*y^2 + y + 2", "x*y + 2*x + 1"] and plan.copies == 4
          and proto.total_copies == 4 and equal and dt < 1)
    return ok, f"chain={' -> '.join(chain)} copies={plan.copies} induced==PR_3:{equal} {dt:.3f}s"


def ac2():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    bad = 0
    for p, count in ((2, 50), (3, 20)):
        for _ in range(count):
            box = random_no_signalling(p, rng)
            target = mix([make_pr_shift(p, j) for j in range(p)], mu_profile(box))
            bad += induced_box(depolarize(box)) != target
    dt = time.perf_counter() - t0
    return bad == 0 and dt < 30, f"70 boxes, mismatches={bad}, {dt:.2f}s"


def ac3():
    rng = np.random.default_rng(3)
    cases = []
    for flat in itertools.product(range(2), repeat=4):
        table = [list(flat[:2]), list(flat[2:])]
        if (table[1][1] - table[1][0] - table[0][1] + table[0][0]) % 2 == 0:
            cases.append(poly2_interpolate(table, 2))
    n_p2 = len(cases)
    for p in (3, 5):
        cases += [_random_separable(p, rng) for _ in range(100)]
    bad = sum(simulate_local_separable(f) != make_functional(f) for f in cases)
    return bad == 0, f"{n_p2} separable f at p=2 + 200 random at p=3,5, mismatches={bad}"


def ac4():
    basic = rac_success_exact(basic_rac(RacConfig(3, 3, 0, make_pr(3))), 3, 3)
    proto = recursive_rac(RacConfig(3, 9, 0, make_pr(3), mode="recursive"))

    def draw(rng):
        return tuple(int(v) for v in rng.integers(3, size=9)), int(rng.integers(9))

    rows = sample_many(proto, draw, 10_000, seed=4)
    wrong = sum(b != xs[y] for xs, y, _, b in rows)
    xs, y, _, _ = rows[0]
    res = sample_execute(proto, xs, y, seed=5)
    ok = basic == 1 and wrong == 0 and (res.alice_copies, res.bob_copies) == (8, 4)
    return ok, (f"basic exact={basic}; recursive 10^4 samples wrong={wrong}; "
                f"alice={res.alice_copies} bob={res.bob_copies}")


def ac5():
    rnd = random.Random(5)
    worst_chi = worst_sigma = 0.0
    sums_exact = True
    for _ in range(1000):
        p = rnd.choice(PRIMES)
        M = rnd.randint(1, 30)
        raw = [rnd.randint(0, 50) for _ in range(p)]
        raw[rnd.randrange(p)] += 1
        mu = [Fraction(v, sum(raw)) for v in raw]
        c = rnd.randrange(p)
        exact = chi(mu, M, c, "convolution")
        worst_chi = max(worst_chi, abs(float(exact) - chi(mu, M, c, "dft")))
        if rnd.random() < 0.1:
            sums_exact &= sum(chi(mu, M, cc, "convolution") for cc in range(p)) == 1
    for _ in range(500):
        p = rnd.choice(PRIMES)
        L = 2 * rnd.randint(1, 8)
        nu = [Fraction(rnd.randint(0, 20), 20 * p) for _ in range(p)]
        c, lam = rnd.randrange(p), rnd.randrange(1, p)
        worst_sigma = max(worst_sigma, abs(float(sigma(nu, L, c, lam, "direct")) - sigma(nu, L, c, lam, "dft")))
    ok = worst_chi < 1e-10 and worst_sigma < 1e-10 and sums_exact
    return ok, f"max|chi diff|={worst_chi:.2e} max|sigma diff|={worst_sigma:.2e} sum_c chi==1:{sums_exact}"


def ac6():
    t0 = time.perf_counter()
    box = mix([make_pr(3), make_noise(3)], [Fraction(3, 4), Fraction(1, 4)])
    cfg = RacConfig(3, 3, 0, box)
    exact = rac_success_exact(basic_rac(cfg), 3, 3)
    analytic = chi(mu_profile(box), 2, 0, "convolution")
    est = rac_mc(cfg, 100_000, seed=6)
    q = float(exact)
    sd = math.sqrt(q * (1 - q) / est.samples)
    dt = time.perf_counter() - t0
    ok = abs(float(exact) - float(analytic)) < 1e-10 and abs(est.estimate - q) < 4 * sd and dt < 60
    return ok, (f"exact={exact} analytic={analytic} mc={est.estimate:.5f} "
                f"({(est.estimate - q) / sd:+.2f} sigma) {dt:.2f}s")


def ac7():
    t0 = time.perf_counter()
    values = {n: tsirelson_threshold_sweep(n) for n in (5, 10, 20, 30)}
    seq = list(values.values())
    dt = time.perf_counter() - t0
    ok = 0.7071 < values[30] < 0.7150 and all(a >= b for a, b in zip(seq, seq[1:])) and dt < 120
    return ok, " ".join(f"n<={n}:{v:.5f}" for n, v in values.items()) + f" {dt:.2f}s"


def _all_reports(box, p, fs):
    reps = []
    for N in range(2, p + 1):
        reps += [check_icpr(box, N, c) for c in range(p)]
    for n in range(1, 6):
        reps += [check_icpr2(box, n, c) for c in range(p)]
    for f, d in fs:
        checker = check_icpf1 if d == 2 else check_icpf2
        for N in range(2, p + 1):
            reps += checker(box, f, N=N)
        for n in range(1, 4):
            reps += checker(box, f, n=n)
    return reps


def ac8():
    pr = check_icpr(make_pr(2), 2, 0)
    first = pr.violated and abs(pr.lhs - 1) < 1e-12 and abs(pr.rhs - 0.8900) < 1e-4
    rng = np.random.default_rng(8)
    polys = {
        2: [(parse_poly("x*y", 2), 2), (parse_poly("x*y + x + 1", 2), 2)],
        3: [(parse_poly("2*x*y + x^2 + 1", 3), 2), (parse_poly("x^2*y + x*y", 3), 3),
            (parse_poly("x^2*y^2 + 2*x*y^2 + x*y + 2*x", 3), 4)],
        5: [(parse_poly("3*x*y + y^3", 5), 2), (parse_poly("x^2*y^2 + x*y", 5), 4)],
    }
    checked = flagged = 0
    for p, fs in polys.items():
        boxes = [make_noise(p), make_deterministic(p, [0] * p, [0] * p)]
        boxes += [make_deterministic(p, rng.integers(p, size=p).tolist(), rng.integers(p, size=p).tolist())
                  for _ in range(3)]
        boxes.append(simulate_local_separable(_random_separable(p, rng)))
        boxes.append(mix(boxes[1:4], [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)]))
        for box in boxes:
            reps = _all_reports(box, p, fs)
            checked += len(reps)
            flagged += sum(r.violated for r in reps)
    ok = first and flagged == 0
    return ok, f"PR_2 lhs={pr.lhs:.6f} rhs={pr.rhs:.6f} violated={pr.violated}; local/noise reports={checked} flagged={flagged}"


def ac9():
    joints = rac_ic_joints(basic_rac(RacConfig(2, 2, 0, make_pr(2))), 2, 2)
    info = sum(mutual_information(j) for j in joints)
    return abs(info - 2) < 1e-9 and info > 1, f"I={info:.12f} bits vs m*log2(p)=1"


def ac10():
    matrix = [
        RacConfig(2, 2, 0, make_pr(2)), RacConfig(2, 2, 1, make_isotropic(Fraction(1, 2))),
        RacConfig(2, 2, 0, make_noise(2)), RacConfig(2, 2, 0, make_deterministic(2, [0, 1], [1, 1])),
        RacConfig(3, 2, 0, make_pr(3)), RacConfig(3, 3, 1, mix([make_pr(3), make_noise(3)], [Fraction(3, 4), Fraction(1, 4)])),
        RacConfig(3, 3, 2, random_no_signalling(3, np.random.default_rng(10))),
        RacConfig(2, 4, 0, make_isotropic(Fraction(4, 5)), mode="recursive"),
    ]
    worst = math.inf
    for cfg in matrix:
        joints = rac_ic_joints(rac_protocol(cfg), cfg.p, cfg.N)
        gap = ic_quantity(joints) - fano_lower_bound(rac_success_probs(joints), cfg.p)
        worst = min(worst, gap)
    return worst >= -1e-9, f"{len(matrix)} protocols, min(I - Fano bound)={worst:.3e}"


CRITERIA = [ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10]


def _run(fn):
    ok, detail = fn()
    line = f"{'PASS' if ok else 'FAIL'} {fn.__name__.upper()} {detail}"
    RESULTS.append(line)
    print(line)
    return ok, detail


@pytest.mark.parametrize("fn", CRITERIA, ids=[f.__name__ for f in CRITERIA])
def test_criterion(fn):
    ok, detail = _run(fn)
    assert ok, detail


if __name__ == "__main__":
    import sys
    sys.exit(0 if all([_run(fn)[0] for fn in CRITERIA]) else 1)
