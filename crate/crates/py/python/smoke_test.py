"""Smoke test for the gmla extension module.

Build first, then run from the repository root:

    cargo build -p gmla-py --features extension-module --release
    python3 crates/py/python/smoke_test.py

If `gmla` is not importable, the script copies target/release/libgmla.so
into a temporary directory as gmla.so and imports it from there.
"""

import math
import os
import shutil
import sys
import tempfile


def load():
    try:
        import gmla  # noqa: F401
        return gmla
    except ImportError:
        pass
    root = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "..", ".."))
    for profile in ("release", "debug"):
        lib = os.path.join(root, "target", profile, "libgmla.so")
        if os.path.exists(lib):
            tmp = tempfile.mkdtemp()
            shutil.copy(lib, os.path.join(tmp, "gmla.so"))
            sys.path.insert(0, tmp)
            import gmla
            return gmla
    sys.exit("gmla extension not built; see the module docstring")


def main():
    gmla = load()
    grid = gmla.Grid(n=256, half_width=16.0)
    assert grid.n == 256 and abs(grid.hx - 0.125) < 1e-15

    u = gmla.Signal("gauss(0, 0)")
    assert abs(u(0.0) - math.pi ** -0.25) < 1e-12
    assert len(u.sample(grid)) == 256

    inv, energy = gmla.moyal(gmla.Signal("hermite(3)"), grid)
    assert inv < 1e-6 and energy < 1e-6, (inv, energy)

    v = gmla.stft(u, grid)
    assert v.shape == (256, 256)
    assert v.abs_at(0.0, 0.0) > 0.0

    q = gmla.qnorm(u, 0.0)
    assert abs(q - math.sqrt(2 * math.pi)) < 1e-6, q

    a = gmla.Symbol("x^2 + xi^2")
    assert a.order == 2.0
    h3 = gmla.Signal("hermite(3)")
    out = gmla.apply(a, h3, "weyl", grid)
    base = h3.sample(grid)
    err = max(abs(o - 7 * b) for o, b in zip(out, base))
    assert err < 1e-3, err

    wf = gmla.wavefront(gmla.Signal("delta"))
    degs = sorted(wf.degrees(j) for j in wf.gabor_set())
    assert degs and all(80 <= d <= 100 or 260 <= d <= 280 for d in degs), degs
    assert not gmla.wavefront(gmla.Signal("hermite(1)")).gabor_set()
    assert wf.union_consistent(1)

    rep = gmla.check("moyal", gmla.Signal("chirp(2)"))
    assert rep["pass"], rep

    assert gmla.Symbol("bracket(2)").char_set() == []

    try:
        gmla.Signal("planewave(")
    except ValueError:
        pass
    else:
        raise AssertionError("parse error not raised")

    print("smoke test passed")


if __name__ == "__main__":
    main()
