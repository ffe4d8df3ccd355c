"""Smoke test for the arrchc extension.

Build first, e.g. `maturin develop -m crates/python/Cargo.toml`, or copy
target/release/libarrchc.so next to this script as arrchc.so.
"""

import pathlib
import sys

import arrchc

ROOT = pathlib.Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"


def main():
    example = (CORPUS / "qe" / "worked-qe.smt2").read_text()
    r = arrchc.qe(example)
    assert r.disjuncts == 2, r.disjuncts
    assert "a" not in {n for n, _ in r.matrix.free_vars()}
    assert arrchc.brute_check(example, values=[0, 6])
    print("qe:", r)

    m = arrchc.mbp((CORPUS / "qe" / "worked-mbp.smt2").read_text())
    assert not m.used_substitution
    print("mbp:", m.result)

    projections, complete = arrchc.enumerate(example)
    assert complete and projections
    print("enumerate:", len(projections), "projections")

    safe = arrchc.ChcSystem.parse((CORPUS / "chc" / "counter-safe.smt2").read_text())
    rep = safe.solve(validate=True)
    assert rep.verdict == "safe", rep
    assert safe.validate(str(rep.invariant))
    assert not safe.validate("(< 5 x)")
    print("solve:", rep.output.replace("\n", " "))

    bad = arrchc.ChcSystem.parse((CORPUS / "chc" / "counter-bad3.smt2").read_text())
    rep = bad.solve()
    assert rep.verdict == "unsafe" and rep.depth == 3, rep
    assert bad.bmc(4) == 3

    mirror = arrchc.ChcSystem.parse((CORPUS / "chc" / "array-mirror-safe.smt2").read_text())
    assert mirror.solve(heuristic_array_eq=True, debug_checks=True).violations == []

    task = arrchc.gen_task(7)
    assert arrchc.brute_check(task, values=[0, 1, 2])

    try:
        arrchc.ChcSystem.parse("(assert")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed input accepted")

    print("smoke test passed")


if __name__ == "__main__":
    sys.exit(main())
