import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from fbox.boxes import (Box, check_no_signalling, make_functional, make_noise, make_pr, mix, mu_profile,
                        make_pr_shift, random_no_signalling)
from fbox.engine import (BranchLimitError, Protocol, ProtocolError, Use, exact_execute, identity_wiring,
                         induced_box, run_blocks, sample_execute, sample_many)
from fbox.protocols import _difference_wiring, depolarize, reduce_functional_to_pr
from fbox.zp import finite_difference, parse_poly


def _no_boxes(p):
    def alice(x, r):
        return 0, None
        yield  # pragma: no cover

    def bob(y, r, msg):
        return y
        yield  # pragma: no cover

    return Protocol(p, [], alice, bob)


def test_zero_box_protocol():
    res = exact_execute(_no_boxes(3), 1, 2)
    assert res.dist == {(0, 2): Fraction(1)}
    assert res.alice_copies == res.bob_copies == 0


def test_identity_wiring(rng):
    for p in (2, 3):
        box = random_no_signalling(p, rng)
        assert induced_box(identity_wiring(box)) == box


@pytest.mark.parametrize("p", [2, 3, 5])
def test_twirl_fixes_pr(p):
    assert induced_box(depolarize(make_pr(p))) == make_pr(p)


def test_twirl_fixes_noise():
    assert induced_box(depolarize(make_noise(3))) == make_noise(3)


def test_base_case_wiring():
    # f = 2xy + x^2 + 2y + 1 over Z_3: one copy plus affine correction gives PR_3
    f = parse_poly("2*x*y + x^2 + 2*y + 1", 3)
    plan, proto = reduce_functional_to_pr(f)
    assert plan.copies == 1 and plan.axes == []
    assert induced_box(proto) == make_pr(3)


def test_difference_wiring_gives_difference_box():
    f = parse_poly("x^2*y^2 + 2*x*y^2 + x*y + 2*x", 3)
    for axis in ("x", "y"):
        proto = _difference_wiring(make_functional(f), axis, 3)
        assert induced_box(proto) == make_functional(finite_difference(f, axis))


def test_depolarize_random_boxes(rng):
    for p in (2, 3):
        for _ in range(3):
            box = random_no_signalling(p, rng)
            out = induced_box(depolarize(box))
            assert out == mix([make_pr_shift(p, j) for j in range(p)], mu_profile(box))


def test_wired_boxes_stay_no_signalling(rng):
    # random two-slot wirings with local post-processing
    p = 3
    for trial in range(5):
        boxes = [random_no_signalling(p, rng) for _ in range(2)]
        ka, kb, ma, mb = (int(v) for v in rng.integers(p, size=4))

        def alice(x, r, ka=ka, ma=ma):
            a1 = yield Use(0, x + r[0])
            a2 = yield Use(1, ka * x + a1)
            return (a1 * ma + a2 + r[0]) % p, None

        def bob(y, r, msg, kb=kb, mb=mb):
            b2 = yield Use(1, y * kb)
            b1 = yield Use(0, b2 + y)
            return (b1 + mb * b2 + r[0]) % p

        out = induced_box(Protocol(p, boxes, alice, bob, shared=1))
        assert check_no_signalling(out)


def test_signalling_slot_rejected():
    arr = np.full((2,) * 4, Fraction(0), dtype=object)
    for x in range(2):
        for y in range(2):
            arr[x, y, 0, x] = Fraction(1)
    proto_args = ([Box(2, arr)], lambda x, r: None, lambda y, r, m: None)
    with pytest.raises(ProtocolError):
        Protocol(2, *proto_args)


def test_modulus_mismatch():
    with pytest.raises(ProtocolError):
        Protocol(3, [make_pr(2)], lambda x, r: None, lambda y, r, m: None)


def test_slot_reuse_rejected():
    def alice(x, r):
        yield Use(0, x)
        yield Use(0, x)
        return 0, None

    def bob(y, r, msg):
        b = yield Use(0, y)
        return b

    with pytest.raises(ProtocolError, match="twice"):
        exact_execute(Protocol(2, [make_pr(2)], alice, bob), 0, 0)


def test_unknown_slot_rejected():
    def alice(x, r):
        yield Use(3, x)
        return 0, None

    with pytest.raises(ProtocolError):
        exact_execute(Protocol(2, [make_pr(2)], alice, lambda y, r, m: (yield Use(0, y))), 0, 0)


def test_branch_ceiling():
    proto = depolarize(make_pr(3))
    with pytest.raises(BranchLimitError):
        exact_execute(proto, 0, 0, ceiling=10)


def test_seed_replay():
    proto = depolarize(make_noise(3))
    outs = [sample_execute(proto, 1, 2, seed=42).outcome for _ in range(2)]
    assert outs[0] == outs[1]
    assert {sample_execute(proto, 1, 2, seed=s).outcome for s in range(40)} != {outs[0]}


def _two_outcome_protocol():
    # Bob outputs [b == a] using a noisy PR_2 box; success probability 3/4 exactly
    box = mix([make_pr(2), make_noise(2)], [Fraction(1, 2), Fraction(1, 2)])

    def alice(x, r):
        a = yield Use(0, x)
        return a, None

    def bob(y, r, msg):
        b = yield Use(0, y)
        return b

    return Protocol(2, [box], alice, bob)


def test_mc_against_exact():
    proto = _two_outcome_protocol()
    exact = exact_execute(proto, 1, 1).prob(lambda a, b: (a - b) % 2 == 1)
    assert exact == Fraction(3, 4)
    rows = sample_many(proto, lambda rng: (1, 1), 100_000, seed=7)
    hits = sum((a - b) % 2 == 1 for _, _, a, b in rows)
    q = float(exact)
    sigma = math.sqrt(q * (1 - q) / len(rows))
    assert abs(hits / len(rows) - q) < 4 * sigma


def test_worker_count_independence():
    proto = depolarize(random_no_signalling(3, np.random.default_rng(1)))
    draw = lambda rng: (int(rng.integers(3)), int(rng.integers(3)))  # noqa: E731
    serial = sample_many(proto, draw, 5000, seed=3, block_size=700, workers=1)
    threaded = sample_many(proto, draw, 5000, seed=3, block_size=700, workers=4)
    assert serial == threaded


def test_run_blocks_sizes():
    sizes = run_blocks(lambda rng, n: n, 25, seed=0, block_size=10)
    assert sizes == [10, 10, 5]
    with pytest.raises(ValueError):
        run_blocks(lambda rng, n: n, 5, seed=0, block_size=0)


def test_nested_copy_accounting():
    f = parse_poly("x^2*y^2 + 2*x*y^2 + x*y + 2*x", 3)
    plan, proto = reduce_functional_to_pr(f)
    assert proto.total_copies == 4
    res = exact_execute(proto, 1, 2)
    assert res.alice_copies == res.bob_copies == 4


def test_exact_distribution_normalized(rng):
    proto = depolarize(random_no_signalling(2, rng))
    for x, y in itertools.product(range(2), repeat=2):
        assert sum(exact_execute(proto, x, y).dist.values()) == 1
