#!/usr/bin/env python3
"""Smoke test for the korbit Python extension module.

Builds the cdylib if needed, loads it without any packaging machinery, and
exercises the main surfaces: model loading, orbit invariants, geometry,
expressions, gamma matrices and a full SEMT report.

Run from the repository root:  python3 python/smoke_test.py
"""

import json
import math
import os
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "crates", "core", "fixtures")


def build_and_import():
    candidates = [
        os.path.join(ROOT, "target", "release", "libkorbit.so"),
        os.path.join(ROOT, "target", "debug", "libkorbit.so"),
    ]
    so = next((p for p in candidates if os.path.exists(p)), None)
    if so is None:
        subprocess.run(
            ["cargo", "build", "-p", "korbit-py", "--release"], cwd=ROOT, check=True
        )
        so = candidates[0]
    stage = tempfile.mkdtemp(prefix="korbit-py-")
    shutil.copy(so, os.path.join(stage, "korbit.so"))
    sys.path.insert(0, stage)
    import korbit

    return korbit


def approx(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    korbit = build_and_import()
    checks = 0

    def ok(label, cond):
        nonlocal checks
        if not cond:
            raise SystemExit(f"FAIL: {label}")
        checks += 1
        print(f"  ok: {label}")

    # --- model loading and orbit invariants
    su2 = korbit.LieAlgebra.load(os.path.join(FIXTURES, "su2.json"))
    ok("su2 loads with dim 3", su2.dim == 3)
    ok("su2 validates", su2.validate() == [])
    ok("su2 index is 1", su2.algebra_index() == 1)
    ok("su2 strata", su2.strata() == [(0, 2), (1, 0)])
    ok("su2 Casimir", su2.casimirs(2) == ["f1^2 + f2^2 + f3^2"])
    ok("su2 orbit rank", su2.orbit_rank(["0", "0", "1"]) == 2)
    ok("su2 Killing form", su2.killing_form()[0][0] == "-2")
    ok("su2 scalar curvature", su2.scalar_curvature() == "-3/2")

    sphere = korbit.LieAlgebra.load(os.path.join(FIXTURES, "su2_sphere.json"))
    ok("sphere defect 0", sphere.defect() == 0)

    bad = korbit.LieAlgebra.from_json(json.dumps({
        "dim": 3,
        "structure_constants": [
            {"i": 3, "j": 1, "k": 2, "c": 1},
            {"i": 1, "j": 2, "k": 3, "c": 1},
            {"i": 2, "j": 1, "k": 3, "c": -1},
            {"i": 1, "j": 1, "k": 2, "c": 1},
        ],
    }))
    ok("perturbed su2 rejected", any("Jacobi" in v for v in bad.validate()))

    # --- expressions
    e = korbit.parse("q1^2 + l3*p1")
    ok("expr print/parse round trip", str(korbit.parse(str(e))) == str(e))
    ok("expr derivative", str(e.diff("q1")) == "2*q1")
    v = e.eval({"q1": 2.0, "l3": 3.0, "p1": 1.0})
    ok("expr evaluation", approx(v.real, 7.0) and approx(v.imag, 0.0))
    q1, p1 = korbit.parse("q1"), korbit.parse("p1")
    ok("canonical Poisson pair", str(q1.poisson(p1, 1)) == "1")

    # --- dispersion
    zeta, omega = korbit.kg_dispersion(3.0, 6.0, 0.0, 3)
    ok("zeta(3) = 1/6", zeta == 1.0 / 6.0)
    ok("omega = sqrt(10)", approx(omega, math.sqrt(10.0), 1e-12))

    # --- gamma matrices
    minkowski = [[1.0 if i == j == 0 else (-1.0 if i == j else 0.0) for j in range(4)]
                 for i in range(4)]
    gammas = korbit.gamma_matrices(minkowski)
    ok("four 4x4 gamma matrices", len(gammas) == 4 and len(gammas[0]) == 4)
    worst = 0.0
    for a in range(4):
        for b in range(4):
            for i in range(4):
                for j in range(4):
                    anti = sum(gammas[a][i][k] * gammas[b][k][j]
                               + gammas[b][i][k] * gammas[a][k][j] for k in range(4))
                    want = 2.0 * minkowski[a][b] if i == j else 0.0
                    worst = max(worst, abs(anti - want))
    ok("anticommutation residual <= 1e-12", worst <= 1e-12)

    # --- full report pipeline: scalar SEMT on the abelian fixture
    abelian = korbit.LieAlgebra.load(os.path.join(FIXTURES, "abelian3.json"))
    config = {
        "mode": "scalar",
        "psi": "1",
        "Lambda": math.sqrt(0.5**2 + 1.5**2 + 2.0**2),
        "m": 0.0,
        "lambda_values": [0.5, -1.5, 2.0],
    }
    report = json.loads(abelian.report("semt", config_json=json.dumps(config)))
    ok("semt report status ok", report["status"] == "ok")
    t00 = report["results"]["semt"]["t00"]
    omega = report["results"]["omega"]
    ok("scalar T00 = -omega/2", approx(t00[0], -omega / 2.0) and abs(t00[1]) <= 1e-9)
    t0a = report["results"]["semt"]["t0a"]
    ok("scalar T0a = -lambda/2", approx(t0a[0][0], -0.25) and approx(t0a[1][0], 0.75))

    # --- lrep report on h3
    h3 = korbit.LieAlgebra.load(os.path.join(FIXTURES, "h3.json"))
    report = json.loads(h3.report("lrep"))
    ok("h3 transition validates", report["results"]["transition"]["pass"] is True)
    ok("h3 commutators close", report["results"]["commutators"]["pass"] is True)
    ok("h3 beta vanishes", report["results"]["beta"] == ["0", "0", "0"])

    print(f"SMOKE TEST PASSED ({checks} checks)")


if __name__ == "__main__":
    main()
