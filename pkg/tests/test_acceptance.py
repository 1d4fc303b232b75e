"""Acceptance criteria, one test each; a pass/fail line per criterion is printed in the summary."""

import time


from sandwich_lab import checks
from sandwich_lab.classifier import classify_surface

RESULTS: dict[int, tuple[bool, str]] = {}


def record(n: int, title: str, results, started: float, limit: float):
    elapsed = time.perf_counter() - started
    failed = [r for r in results if not r.passed]
    ok = not failed and elapsed < limit
    detail = f"{len(results) - len(failed)}/{len(results)} checks, {elapsed:.1f}s (limit {limit:.0f}s)"
    RESULTS[n] = (ok, f"{title}: {detail}")
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  {detail}")
    for r in failed:
        print(f"  {r.name}\n{r.diff()}")
    assert not failed, "\n".join(f"{r.name}\n{r.diff()}" for r in failed)
    assert elapsed < limit, f"runtime {elapsed:.1f}s exceeds {limit}s"


def test_criterion_1_example1():
    t = time.perf_counter()
    record(1, "x dx + y dy on P^2 for p = 2, 3, 5", [checks.example1(p) for p in (2, 3, 5)], t, 5)


def test_criterion_2_example2():
    t = time.perf_counter()
    record(2, "x dx + i y dy on P^2, p = 5", [checks.example2(5, i) for i in (2, 3, 4)], t, 10)


def test_criterion_3_examples_3_and_4():
    t = time.perf_counter()
    record(3, "D_4^0 and E_7^0 examples at p = 2", [checks.example3(), checks.example4()], t, 10)


def test_criterion_4_class_counts():
    t = time.perf_counter()
    grid = [("p2", p) for p in (2, 3, 5, 7)]
    grid += [("hirzebruch:0", p) for p in (2, 3, 5)]
    grid += [(f"hirzebruch:{d}", p) for d in (1, 2, 3) for p in (2, 3, 5)]
    record(4, "class counts p-1 / p / p+1", [checks.class_count(s, p) for s, p in grid], t, 300)


def test_criterion_5_fan_identities():
    t = time.perf_counter()
    record(5, "refined fans equal the listed fans", [checks.fan_identities(p) for p in (2, 3, 5)], t, 1)


def test_criterion_6_oracle_equivalence():
    t = time.perf_counter()
    results = [checks.oracle_equivalence(p, d) for p in (2, 3, 5) for d in (None, 0, 1, 2, 3)]
    record(6, "invariant generators = refined-cone Hilbert basis", results, t, 120)


def test_criterion_7_property_suites():
    from tests import test_properties as props

    suites = [
        props.test_leibniz_apply,
        props.test_leibniz_power_p,
        props.test_projector_laws,
        props.test_transport_round_trip,
        props.test_kernel_invariant_under_rescaling,
        props.test_cyclic_type_gl2z_invariant,
        props.test_fan_isomorphic_symmetric_and_transitive,
    ]
    t = time.perf_counter()
    results = []
    for suite in suites:
        try:
            suite()
            results.append(checks.CheckResult(suite.__name__, "property suite", True))
        except AssertionError as err:
            results.append(checks.CheckResult(suite.__name__, "property suite", False, "pass", str(err)))
    record(7, "seeded property suites, 500 cases each", results, t, 600)


def test_criterion_8_reduction_replay():
    t = time.perf_counter()
    results = []
    for p in (2, 3):
        for d in (1, 2):
            res = classify_surface(f"hirzebruch:{d}", p, check_replay=True)
            reduced = res.p_closed - sum(res.obstructed.values())
            results.append(checks.CheckResult(
                f"replay[d={d},p={p}]", "replay of every reduced p-closed form",
                res.replay_failures == 0 and "Unknown" not in res.obstructed,
                {"failures": 0}, {"failures": res.replay_failures, "reduced": reduced, "obstructed": res.obstructed},
            ))
    record(8, "reduction replay at p in {2,3}, d in {1,2}", results, t, 120)
