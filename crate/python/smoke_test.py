#!/usr/bin/env python3
"""Smoke test for the itazrp_py extension module.

Builds nothing itself: run `cargo build -p itazrp-py` (or --release) first,
then `python3 python/smoke_test.py`. The script locates the compiled cdylib
under target/ and loads it in place, so no install step is needed.
"""

import importlib.util
import pathlib
import sys


def load_extension():
    root = pathlib.Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libitazrp_py.so", "itazrp_py.so", "libitazrp_py.dylib")
    ]
    for path in candidates:
        if path.exists():
            spec = importlib.util.spec_from_file_location("itazrp_py", path)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit("itazrp_py cdylib not found; run `cargo build -p itazrp-py` first")


def main():
    m = load_extension()

    # two species on a ring of two sites: both constructions agree
    sector = m.Sector(2, 2, [1, 1])
    mpf = sector.steady_state("mpf")
    multiline = sector.steady_state("multiline")
    assert mpf == multiline, (mpf, multiline)
    assert mpf["e|12"] == "w1+w2" and mpf["1|2"] == "w2", mpf

    # a longer chain, spot value and counts
    sector3 = m.Sector(2, 3, [1, 1])
    table = sector3.steady_state("mpf")
    assert table["e|e|12"] == "w1^2+w1*w2+w2^2", table
    assert sector3.configuration_count() == 9
    assert sector3.multiline_count() == 18

    # exact kernel at w=(1,2): P(e|12)/P(1|2) = 3/2
    kernel = sector.kernel_steady(["1", "2"])
    assert kernel["e|12"] == "3/10" and kernel["1|2"] == "1/5", kernel

    # hat relation at the smallest nontrivial size
    assert m.hat_check(2, 1) == 64

    # the pairing algorithm on the documented running example
    phi, weight = m.pair_project(4, "e|13|2|3|e|12|11", [0, 2, 1, 2, 0, 1, 3])
    assert phi == "e|23|2|11|e|1|134", phi
    assert weight == "w1^3*w2*w3*w4", weight

    # multiline projection of a full state
    target, w = m.project_multiline(
        [[0, 1, 0, 0], [1, 2, 0, 0], [2, 1, 1, 0], [1, 2, 0, 2]]
    )
    assert target == "3|14|e|22" and w == "w1*w2^3*w3^2*w4^3", (target, w)

    # a short simulation against the exact law
    empirical = sector3.simulate([1.0, 2.0], events=200_000, burn_in=2_000, seed=42)
    exact = {k: eval_fraction(v) for k, v in sector3.kernel_steady(["1", "2"]).items()}
    tv = m.tv_distance(empirical, exact)
    assert tv < 0.05, tv

    print("smoke test passed")


def eval_fraction(text):
    if "/" in text:
        num, den = text.split("/")
        return int(num) / int(den)
    return float(text)


if __name__ == "__main__":
    main()
