"""Smoke test for the weavefuse extension module.

Build and install first:

    pip install --no-build-isolation ./crates/py
    python python/smoke_test.py
"""

import json
import math
from pathlib import Path

import weavefuse

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAIL {what}")
    print(f"ok   {what}")


def main():
    swapped = weavefuse.WeavingPair.load(str(FIXTURES / "example_2_2.json"))
    v = swapped.is_weaving()
    check(v["status"] == "not_weaving", "swapped axes are not woven")
    check(v["report"]["argmin_sigma"]["mask"] == [False, True, False], "weaving witness is {2}")

    planes = weavefuse.WeavingPair.load(str(FIXTURES / "example_2_1.json"))
    b = planes.bounds()
    check(abs(b["universal_lower"] - 1) < 1e-9 and abs(b["universal_upper"] - 2) < 1e-9, "wrapped planes bounds")

    real = weavefuse.WeavingPair.example("example_3_2")
    check(real.is_phase_retrievable()["outcome"]["verdict"] == "retrievable", "real three lines retrievable")
    check(real.alpha_estimate([1, 2], samples=2000)["alpha_hat"] > 1e-4, "real alpha estimate is positive")

    cplx = weavefuse.WeavingPair.load(str(FIXTURES / "example_3_3.json"))
    verdict = cplx.is_phase_retrievable()
    check(verdict["outcome"]["verdict"] == "not_retrievable", "complex three lines not retrievable")
    x, y = [1, 1j], [1j, 1]
    gx, gy = cplx.gamma([1, 2], x), cplx.gamma([1, 2], y)
    check(max(abs(a - b) for a, b in zip(gx, gy)) < 1e-12, "(1,i) and (i,1) share measurements")
    check(weavefuse.phase_distance(x, y) > 1.0, "(1,i) and (i,1) are not similar")

    r3 = weavefuse.WeavingPair.example("example_r3")
    check(r3.lift_kernel_dim([1, 2, 3]) == 1, "R^3 kernel is a line")
    check(r3.complement_property()["holds"], "complement property holds on the R^3 listing")

    c, s = math.cos(0.3), math.sin(0.3)
    moved = real.transport([[c, -s], [s, c]])
    check(abs(moved.bounds()["universal_lower"] - real.bounds()["universal_lower"]) < 1e-9, "rotation keeps bounds")

    tight = weavefuse.WeavingPair.tight_family(4, 16)
    report = tight.simulate_erasure([0.5, 0.5, 0.5, 0.5], trials=2000, estimator="halving", seed=3)
    check(abs(report["mean_error"] - math.sqrt(4 / 32)) < 0.05, "halving error near sqrt(n / 2m)")

    table = weavefuse.scaling_experiment(dims=[2], m_factors=[8, 32], trials=500)
    check(len(table["rows"]) == 2 and math.isfinite(table["fitted_M"]), "sweep table")

    again = weavefuse.WeavingPair.from_json(real.to_json())
    check(json.dumps(again.bounds()) == json.dumps(real.bounds()), "JSON round trip")

    try:
        weavefuse.WeavingPair.from_json('{"field": "real", "dim": 0, "first": [], "second": []}')
    except ValueError as e:
        check("dimension" in str(e), "invalid documents raise ValueError")
    else:
        raise SystemExit("FAIL invalid document accepted")

    print(f"weavefuse {weavefuse.__version__}: all checks passed")


if __name__ == "__main__":
    main()
