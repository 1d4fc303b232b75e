"""Reproduction checks for the worked examples and the classification counts.

Each check returns a :class:`CheckResult` with the expected and computed
values, so a failure can be shown as a diff.  ``verify-paper`` and the
acceptance tests both run these.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .atlas import all_charts, atlas_for, foliation_degree_p2, projective_plane
from .classifier import (
    CanonicalForm,
    Obstruction,
    canonical_to_fan,
    classify_surface,
    gfr_verdict,
    sandwich_report,
)
from .derivation import Derivation, parse_derivation
from .field_poly import Poly
from .invariants import CATALOG, algebra_generators, kernel_basis, match_presentation, presentation
from .toric import (
    Cone2D,
    Fan,
    build_fan,
    cyclic_type,
    cyclic_type_fast,
    hirzebruch_fan,
    overlattice,
    p2_fan,
    refine,
    semigroup_algebra_gens,
)


@dataclass
class CheckResult:
    name: str
    description: str
    passed: bool
    expected: object = None
    computed: object = None
    seconds: float = 0.0
    notes: list[str] = field(default_factory=list)

    def diff(self) -> str:
        if self.passed:
            return ""
        return f"  expected: {self.expected!r}\n  computed: {self.computed!r}"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "passed": self.passed,
            "expected": _jsonable(self.expected),
            "computed": _jsonable(self.computed),
            "seconds": round(self.seconds, 3),
            "notes": self.notes,
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in x]
        return sorted(items, key=repr) if isinstance(x, (set, frozenset)) else items
    if isinstance(x, (int, float, str, bool)) or x is None:
        return x
    return str(x)


def _timed(fn: Callable[[], CheckResult]) -> CheckResult:
    t0 = time.perf_counter()
    res = fn()
    res.seconds = time.perf_counter() - t0
    return res


# chart variables <-> the two rays of the chart's cone
CHART_RAYS_P2 = {"U0": ((1, 0), (0, 1)), "U1": ((-1, -1), (0, 1)), "U2": ((-1, -1), (1, 0))}


def chart_rays_hirzebruch(d: int) -> dict[str, tuple[tuple[int, int], tuple[int, int]]]:
    r1, r2, r3, r4 = (0, 1), (1, 0), (0, -1), (-1, d)
    return {"U1": (r2, r1), "U2": (r1, r4), "U3": (r4, r3), "U4": (r3, r2)}


def _gens_as_strings(delta: Derivation, D: int | None = None, d: int = 0) -> list[str]:
    return [str(q) for q in algebra_generators(kernel_basis(delta, D, d))]


# --- worked examples ---------------------------------------------------------------------


def example1(p: int) -> CheckResult:
    """x dx + y dy on P^2: Frobenius-type rings on every chart, one 1/p(1,1) point."""
    delta = parse_derivation("x dx + y dy", p=p, chart_id="U0")
    atlas = projective_plane(p)
    charts = all_charts(delta, atlas)
    expected = {
        "U0": sorted(_pretty_monomial("x", "y", a, p - a) for a in range(p + 1)),
        "U1": sorted([f"z^{p}", "w"]),
        "U2": sorted([f"u^{p}", "v"]),
        "degree": 1,
        "points": ["1/%d(1,1)" % p],
    }
    computed = {cid: sorted(_gens_as_strings(dl)) for cid, dl in charts.items()}
    computed["degree"] = foliation_degree_p2(delta, atlas)
    computed["points"] = _point_types(delta, "p2")
    return CheckResult(f"example1[p={p}]", "x dx + y dy on P^2", computed == expected, expected, computed)


def _pretty_monomial(a: str, b: str, i: int, j: int) -> str:
    return str(Poly.parse(f"{a}^{i}*{b}^{j}", (a, b), 2)) if (i or j) else "1"


def _point_types(delta: Derivation, surface: str) -> list[str]:
    rep = sandwich_report(delta, surface)
    return sorted(pt["type"] or "non-rational" for pt in rep.singular_points)


def example2(p: int, i: int) -> CheckResult:
    """x dx + i y dy on P^2: three cyclic points 1/p(1,i), 1/p(1,1-i), 1/p(i,i-1)."""
    from .toric import normalize_type

    delta = parse_derivation(f"x dx + {i}*y dy", p=p, chart_id="U0")
    atlas = projective_plane(p)
    # 1/p(i, i-1) is 1/p(1, (i-1)/i)
    a3 = (i - 1) * pow(i, -1, p) % p
    expected = {
        "degree": 0,
        "points": sorted(f"1/{p}(1,{normalize_type(p, a)})" for a in (i, 1 - i, a3)),
        "oracle": True,
    }
    computed = {"degree": foliation_degree_p2(delta, atlas), "points": _point_types(delta, "p2")}
    # each chart origin against the semigroup oracle of the refined cone
    ov = overlattice(p2_fan(), (1, i), p)
    oracle_ok = True
    for cid, (ra, rb) in CHART_RAYS_P2.items():
        cone = Cone2D(ov.new_coords(ra), ov.new_coords(rb))
        oracle_ok &= cyclic_type(cone) == cyclic_type_fast(cone)
    computed["oracle"] = oracle_ok
    return CheckResult(f"example2[p={p},i={i}]", f"x dx + {i} y dy on P^2", computed == expected, expected, computed)


EXAMPLE3 = "x^2 dx + y^2 dy"
EXAMPLE4 = "x*y^2 dx + (x^2 + y^3) dy"


def _catalog_example(name: str, text: str, gens: list[str], relation: str, label: str,
                     obstruction: Obstruction, catalog: Mapping | None) -> CheckResult:
    p = 2
    delta = parse_derivation(text, p=p, chart_id="U0")
    pres = presentation(delta)
    rel = pres.relations[0] if len(pres.relations) == 1 else None
    matched = match_presentation(rel, catalog).label if rel is not None else None
    verdict = gfr_verdict(delta, "p2")
    expected = {
        "generators": sorted(str(Poly.parse(q, ("x", "y"), p)) for q in gens),
        "relation": str(Poly.parse(relation, ("X", "Y", "Z"), p)),
        "label": label,
        "gfr": False,
        "obstruction": obstruction.value,
    }
    computed = {
        "generators": sorted(str(q) for q in pres.generators),
        "relation": str(rel) if rel is not None else None,
        "label": matched,
        "gfr": verdict.gfr,
        "obstruction": verdict.obstruction.value,
    }
    if name == "example3":
        expected["A_1 points"] = 3
        computed["A_1 points"] = sum(1 for pt in sandwich_report(delta, "p2").singular_points if "A_1" in pt["aliases"])
    return CheckResult(name, f"{text} on P^2, p = 2", computed == expected, expected, computed)


def example3(catalog: Mapping | None = None) -> CheckResult:
    return _catalog_example(
        "example3", EXAMPLE3, ["x^2", "y^2", "x^2*y + x*y^2"], "Z^2 + X^2*Y + X*Y^2", "D_4^0",
        Obstruction.NILPOTENT, catalog,
    )


def example4(catalog: Mapping | None = None) -> CheckResult:
    return _catalog_example(
        "example4", EXAMPLE4, ["x^2", "y^2", "x^3 + x*y^3"], "Z^2 + X^3 + X*Y^3", "E_7^0",
        Obstruction.NO_GLOBAL_SECTION, catalog,
    )


# --- classification ---------------------------------------------------------------------------


def expected_class_count(surface: str, p: int) -> int:
    if surface == "p2":
        return p - 1
    return p if surface == "hirzebruch:0" else p + 1


def class_count(surface: str, p: int) -> CheckResult:
    res = classify_surface(surface, p)
    exp = expected_class_count(surface, p)
    return CheckResult(
        f"class-count[{surface},p={p}]",
        "number of fan-isomorphism classes of quotients",
        res.class_count == exp,
        exp,
        res.class_count,
        notes=[f"labels reached: {res.label_count}", f"classes: {res.iso_classes}"],
    )


def fan_identities(p: int, d_values=(0, 1, 2, 3)) -> CheckResult:
    bad = []
    for d in d_values:
        for i in range(p):
            if refine(hirzebruch_fan(d), (1, i), p) != build_fan("Sigma_di", p, d, i):
                bad.append(("H", d, i))
        if refine(hirzebruch_fan(d), (0, 1), p) != build_fan("Sigma_di", p, d, p):
            bad.append(("H", d, "vertical"))
    for i in range(1, p):
        if refine(p2_fan(), (1, i), p) != build_fan("Sigma_i", p, i):
            bad.append(("P2", i))
    return CheckResult(f"fan-identities[p={p}]", "refined fans equal the listed fans", not bad, [], bad)


def canonical_fans() -> CheckResult:
    expected = {
        "Diagonal(0)": Fan(((0, 1), (1, 0), (0, -1), (-2, 1))),
        "Vertical": Fan(((0, 1), (1, 0), (0, -1), (-1, 2))),
        "Diagonal(1)": Fan(((0, 1), (2, -1), (0, -1), (-1, 1))),
    }
    computed = {}
    for label, c in (("Diagonal(0)", CanonicalForm("Diagonal", 0)), ("Vertical", CanonicalForm("Vertical")),
                     ("Diagonal(1)", CanonicalForm("Diagonal", 1))):
        computed[label] = canonical_to_fan(c, 1, 2)
    ok = computed == expected
    return CheckResult("canonical-fans[d=1,p=2]", "fans of the canonical forms on H_1", ok,
                       {k: v.rays for k, v in expected.items()}, {k: v.rays for k, v in computed.items()})


def oracle_equivalence(p: int, d: int | None) -> CheckResult:
    """Invariant generators of each canonical form on each chart = Hilbert basis of the refined cone."""
    surface = "p2" if d is None else f"hirzebruch:{d}"
    atlas = atlas_for(surface, p)
    base = p2_fan() if d is None else hirzebruch_fan(d)
    rays = CHART_RAYS_P2 if d is None else chart_rays_hirzebruch(d)
    forms = [CanonicalForm("Diagonal", i, "U0" if d is None else "U1") for i in range(p)]
    if d is not None:
        forms.append(CanonicalForm("Vertical"))
    mismatches = []
    for c in forms:
        ov = overlattice(base, c.refinement_vector(), p)
        delta = c.derivation(p)
        for cid, dl in all_charts(delta, atlas).items():
            ra, rb = (ov.new_coords(r) for r in rays[cid])
            hilbert = semigroup_algebra_gens(Cone2D(ra, rb), (ra, rb))
            gens = algebra_generators(kernel_basis(dl, 2 * p + (d or 0)))
            exps = sorted(_monomial_exponent(q) for q in gens)
            if exps != hilbert:
                mismatches.append({"form": c.label, "chart": cid, "kernel": exps, "hilbert": hilbert})
    return CheckResult(f"oracle[{surface},p={p}]", "kernel generators vs refined-cone Hilbert basis",
                       not mismatches, [], mismatches)


def _monomial_exponent(q: Poly):
    if len(q.terms) != 1:
        return ("non-monomial", str(q))
    return next(iter(q.terms))


# --- verdicts -----------------------------------------------------------------------------------


def verdict_examples() -> CheckResult:
    cases = [
        ("x dx + y dy", 3, True, Obstruction.NONE, True),
        (EXAMPLE3, 2, False, Obstruction.NILPOTENT, None),
        (EXAMPLE4, 2, False, Obstruction.NO_GLOBAL_SECTION, None),
    ]
    expected, computed = [], []
    for text, p, gfr, obs, split in cases:
        v = gfr_verdict(parse_derivation(text, p=p, chart_id="U0"), "p2")
        expected.append((text, gfr, obs.value, split))
        computed.append((text, v.gfr, v.obstruction.value, v.splitting_verified))
    return CheckResult("verdicts", "GFR verdicts on P^2", expected == computed, expected, computed)


def classify_examples() -> CheckResult:
    cases = [("hirzebruch:1", 2, 3), ("hirzebruch:0", 3, 3), ("p2", 3, 2)]
    expected = [c for c in cases]
    computed = [(s, p, classify_surface(s, p).class_count) for s, p, _ in cases]
    return CheckResult("classify-examples", "class counts of the three stated examples",
                       expected == computed, expected, computed)


# --- registry ------------------------------------------------------------------------------------


def registry(primes=(2, 3, 5), d_values=(0, 1, 2, 3), catalog: Mapping | None = None) -> dict[str, list[Callable[[], CheckResult]]]:
    """Check groups keyed by name; ``--only`` selects groups (or a single check name)."""
    groups: dict[str, list[Callable[[], CheckResult]]] = {
        "example1": [lambda p=p: example1(p) for p in primes],
        "example2": [lambda i=i: example2(5, i) for i in (2, 3, 4)],
        "example3": [lambda: example3(catalog)],
        "example4": [lambda: example4(catalog)],
        "verdicts": [verdict_examples],
        "fans": [lambda p=p: fan_identities(p, d_values) for p in primes] + [canonical_fans],
        "oracle": [lambda p=p, d=d: oracle_equivalence(p, d) for p in primes for d in (None, *d_values)],
        "counts": [lambda s=s, p=p: class_count(s, p)
                   for p in primes for s in ("p2", *(f"hirzebruch:{d}" for d in d_values))],
        "classify": [classify_examples],
    }
    return groups


def run_checks(only: list[str] | None = None, primes=(2, 3, 5), d_values=(0, 1, 2, 3),
               catalog: Mapping | None = None) -> list[CheckResult]:
    groups = registry(primes, d_values, catalog)
    if only:
        unknown = [o for o in only if o not in groups]
        if unknown:
            raise KeyError(f"unknown check group(s) {unknown}; choose from {sorted(groups)}")
        groups = {k: v for k, v in groups.items() if k in only}
    return [_timed(fn) for fns in groups.values() for fn in fns]


def corrupted_catalog() -> dict:
    """A catalog whose D_4^0 entry is wrong, for the negative control."""
    cat = dict(CATALOG)
    cat["D_4^0"] = (2, "Z^2 + X^3*Y + X*Y^2")
    return cat
