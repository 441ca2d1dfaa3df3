#!/usr/bin/env python3
"""Smoke test for the f2tri_py extension module.

Builds nothing itself: run `cargo build -p f2tri-py` first, then
`python3 python/smoke_test.py`.  Loads the cdylib straight out of
target/, exercises every binding, and prints PASS.
"""

import json
import os
import sys
import tempfile
from fractions import Fraction


def load_module():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    candidates = [
        os.path.join(root, "target", profile, name)
        for profile in ("debug", "release")
        for name in ("libf2tri_py.so", "f2tri_py.so", "libf2tri_py.dylib")
    ]
    built = [p for p in candidates if os.path.exists(p)]
    if not built:
        sys.exit("f2tri_py cdylib not found; run `cargo build -p f2tri-py` first")
    built.sort(key=os.path.getmtime, reverse=True)
    stage = tempfile.mkdtemp(prefix="f2tri-py-")
    dest = os.path.join(stage, "f2tri_py.so")
    os.symlink(built[0], dest)
    sys.path.insert(0, stage)
    import f2tri_py

    return f2tri_py


def main():
    f2 = load_module()

    # sets: construction, text round trip, membership
    s = f2.SetF2(6, [1, 2, 3, 60])
    assert s.n == 6 and len(s) == 4 and 60 in s and 4 not in s
    assert f2.SetF2.parse(s.to_text("bitmap")).elements() == s.elements()
    assert repr(s) == "SetF2(n=6, count=4)"

    # subgroups canonicalize their generators
    h = f2.Subgroup(8, [0xFF, 0x3])
    assert (h.dim, h.size, h.basis()) == (2, 4, [0xFC, 0x3])
    assert 0xFF in h and 0x1 not in h

    # counting: the two routes agree, a halfspace is triangle-free,
    # a full group has N^2 ordered solutions
    hs = f2.gen_halfspace(10, 0)
    assert len(hs) == 512
    assert f2.count_ordered(hs) == 0 and f2.count_distinct(hs) == 0
    full = f2.SetF2(6, list(range(64)))
    assert f2.count_ordered(full, "both") == 64 * 64
    rnd = f2.gen_random_density(9, "1/3", seed=7)
    assert f2.count_ordered(rnd, "brute") == f2.count_ordered(rnd, "fourier")

    # transform: involution up to the length factor
    spec = f2.wht([3, 1, 4, 1, 5, 9, 2, 6])
    assert f2.wht(spec) == [8 * v for v in [3, 1, 4, 1, 5, 9, 2, 6]]

    # planted instances carry their ledger
    tri, planted, accidental = f2.gen_triangle_union(10, 12, seed=3)
    assert len(planted) == 12
    assert f2.count_ordered(tri) == 6 * (12 + accidental)
    assert len(f2.gen_subgroup_coset(8, 4, seed=1)) == 16
    noiseless = f2.gen_planted_noise(8, 5, "0", seed=2)
    elems = noiseless.elements()
    assert len(elems) == 32 and 0 in noiseless
    assert all(x ^ y in noiseless for x in elems for y in elems)

    # packing: maximal (every planted triangle meets the support) and the
    # farness sandwich holds
    p = f2.pack(tri, seed=5)
    support = {e for t in p["triangles"] for e in t}
    assert len(support) == p["support_size"] == 3 * len(p["triangles"])
    assert all(support & set(t) for t in planted)
    assert 0 < p["lower"] <= p["upper"] and p["upper"] <= 3 * p["lower"]
    tiny = f2.SetF2(4, [1, 2, 3])
    exact = f2.exact_farness(tiny)
    assert Fraction(1, 16) == exact
    assert f2.sample_tester(hs, 1000, seed=0) == 0

    # decomposition invariants survive the crossing
    dec = f2.decompose(rnd, gens=[1 << i for i in range(9)], shift=0, rho="1/4", d="1/10")
    covered = sum(len(part["elements"]) for part in dec["parts"]) + len(dec["leftover"])
    assert covered == len(rnd)
    assert all(part["density"] >= Fraction(1, 10) for part in dec["parts"])

    # dichotomy: concentrated instance shatters, and the certificate's
    # numbers arrive as exact fractions
    conc = f2.SetF2(
        6,
        [0x10, 0x11, 0x12, 0x13, 0x20, 0x21, 0x22, 0x23] + list(range(0x30, 0x40)),
    )
    res = f2.shatter_or_count(conc, gens=[1, 2, 4, 8], g1=0x10, g2=0x20)
    assert res["outcome"] == "shatter"
    cert = res["certificate"]
    assert cert["measured_low_fraction"] >= Fraction(1, 20)
    assert isinstance(cert["base_density"], Fraction)
    assert f2.mean_entropy(conc, gens=[1, 2, 4, 8], rep=0x30, refining_gens=cert["refining_basis"]) <= 0.0

    # driver: report JSON parses, re-verifies, and the triangle-free case
    # terminates immediately
    report = f2.run_removal(rnd, seed=4)
    doc = json.loads(report)
    assert doc["schema"] == "report v1" and doc["command"] == "run"
    f2.verify_run(rnd, 4, report)
    free = json.loads(f2.run_removal(hs, seed=0))
    assert free["payload"]["outcome"]["kind"] == "terminated"
    assert free["payload"]["triangle_count"] == 0

    # tower bound
    height, top = f2.theorem_bound("1/10")
    assert height == 27632 and abs(top - 137901.6227297174) < 1e-3

    # errors surface as ValueError
    try:
        f2.SetF2(4, [16])
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-range element must raise")

    print("PASS")


if __name__ == "__main__":
    main()
