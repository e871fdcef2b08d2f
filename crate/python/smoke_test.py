"""Smoke test for the talbot_sim extension module.

Build first:
    cargo build --release -p talbot-py
    cp target/release/libtalbot_sim.so python/talbot_sim.so
then run from the repository root:
    python3 python/smoke_test.py
"""

import math
import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, HERE)

import talbot_sim as ts  # noqa: E402

CONFIGS = os.path.join(HERE, "..", "configs")


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b, tol)


def main():
    close(ts.wavelength(25_000.0, 300.0), 5.32e-14, 0.01e-14)

    c70 = ts.Molecule(840.0, 70)
    lam = c70.de_broglie_wavelength(100.0)
    close(lam, 4.75e-12, 0.01e-12)
    close(ts.talbot_length(991e-9, lam), 0.2067, 1e-3)

    g = ts.Grating.ideal(991e-9, 0.75)
    assert g.kind == "material"
    tli = ts.Interferometer([g, g, g], 1.5 * ts.talbot_length(991e-9, lam))
    analytic = tli.pattern(c70, 100.0)
    oracle = tli.oracle_pattern(c70, 100.0, samples_per_period=64, periods=256, sources=64)
    close(analytic.visibility, oracle.visibility, 0.02)
    coeffs = analytic.coefficients()
    assert isinstance(coeffs[1], complex)
    close(analytic.visibility, 2 * abs(coeffs[1]) / coeffs[0].real, 1e-12)

    try:
        ts.Interferometer([g, g], 0.2)
    except ValueError:
        pass
    else:
        raise AssertionError("two gratings accepted")

    sc = ts.Scenario.load(os.path.join(CONFIGS, "c70.toml"))
    rows = sc.sweep("pressure", "0:5e-7:3")
    assert [r[0] for r in rows] == [0.0, 2.5e-7, 5e-7]
    close(rows[0][1], 0.4257, 5e-4)
    assert rows[2][1] < rows[1][1] < rows[0][1]

    offsets, counts, fit = sc.scan(seed=11)
    assert len(offsets) == len(counts) == 50
    assert abs(fit.visibility - 0.42) < 5 * fit.visibility_error

    d = 991e-9
    xs = [i * d / 40 for i in range(40)]
    ys = [500 * (1 + 0.3 * math.sin(2 * math.pi * x / d + 1.0)) for x in xs]
    exact = ts.fit_scan(xs, ys, 1.0, d)
    close(exact.visibility, 0.3, 1e-10)
    close(exact.phase, 1.0, 1e-9)

    try:
        ts.Scenario.from_toml("[molecule]\nmass_da = 1\n")
    except ValueError as e:
        assert "n_atoms" in str(e) or "missing" in str(e), e
    else:
        raise AssertionError("incomplete config accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
