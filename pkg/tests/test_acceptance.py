"""Acceptance criteria at full scale and stated tolerances.

Each test records a one-line PASS/FAIL verdict; the lines are printed in the
pytest terminal summary, and running this file directly prints them too.
"""

import time

import pytest

from stateamp import cli, validation

RESULTS: list[str] = []


def record(number: int, title: str, checks, started: float) -> None:
    ok = all(c.passed for c in checks)
    detail = "; ".join(f"{c.name}={c.measured:.6g} (threshold {c.threshold:.6g})" for c in checks)
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail} | {time.perf_counter() - started:.1f}s"
    RESULTS.append(line)
    print(line)
    failed = [c.line() for c in checks if not c.passed]
    assert ok, "\n".join(failed)


def test_c01_derived_parameters():
    t = time.perf_counter()
    record(1, "derived parameters Q'=9.09 N'=0.91", [validation.check_derived_params()], t)


def test_c02_oracle_agreement():
    t = time.perf_counter()
    checks = validation.check_oracle_agreement(n_draws=200, n=10**6, seed=0, n_se=3.0, min_pass=0.99)
    record(2, "Monte Carlo MMSE and rate within 3 SE on >=99% of 200 draws", checks, t)


def test_c03_containment():
    t = time.perf_counter()
    record(3, "inner frontier inside combined outer bound (2 reference channels + 20 random)",
           [validation.check_containment_suite(n_random=20, seed=0)], t)


def test_c04_extreme_cases():
    t = time.perf_counter()
    record(4, "extreme-case reductions (a)-(d)", validation.check_extremes(), t)


def test_c05_alpha_reoptimisation():
    t = time.perf_counter()
    record(5, "re-optimised alpha beats the dirty-paper alpha", [validation.check_alpha_reopt()], t)


def test_c06_f_properties():
    t = time.perf_counter()
    record(6, "f convex, nondecreasing, exact endpoints", validation.check_f_properties(n=10**4), t)


def test_c07_estimator_inequality():
    t = time.perf_counter()
    record(7, "D >= f(D') over 1000 random estimators", [validation.check_estimator_inequality(n_trials=1000, seed=0)], t)


def test_c08_envelope_optimality():
    t = time.perf_counter()
    record(8, "closed-form envelopes match 1e4-point brute force within 1e-6",
           validation.check_envelope_optimality(n_grid=10**4), t)


def test_c09_regimes():
    t = time.perf_counter()
    record(9, "low-power at P=7.7, high-power with R>0 at min D for P=77", validation.check_regimes(), t)


def test_c10_determinism(tmp_path):
    t = time.perf_counter()
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert cli.main(["region", "--out", str(out), "--seed", "0"]) == 0
        outs.append(out)
    diffs = [f for f in ("region.csv", "report.json", "region.svg")
             if (outs[0] / f).read_bytes() != (outs[1] / f).read_bytes()]
    check = validation.CheckResult("byte_identical_outputs", not diffs, float(len(diffs)), 0.0,
                                   f"differing={diffs}")
    record(10, "two region runs give byte-identical CSV and JSON", [check], t)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
