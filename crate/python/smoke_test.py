"""Exercise the Python bindings end to end.

Build first, e.g. `maturin develop -m crates/python/Cargo.toml`, or put the
built shared library on PYTHONPATH as pylinedelta.so.
"""

import math

import pylinedelta as ld


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    circle = ld.Curve.builtin("circle")
    close(circle.total_length, 2 * math.pi, 1e-12)
    close(circle.line_integral("x2"), math.pi, 1e-10)
    assert "lgraph" in ld.Curve.builtin_names()
    assert ld.Curve.builtin("lgraph").nonsmooth_vertices() != []

    cp = circle.closest_point(2.0, 0.0, 0.0)
    close(cp["rho"], 1.0, 1e-12)
    close(cp["foot"][0], 1.0, 1e-12)

    k = ld.Kernel("cosine", 0.25)
    close(k.mass(), 1.0, 1e-12)

    h = 1 / 32
    grid = ld.Grid.cube(-2.0, 2.0, h)
    assert grid.dims == [128, 128, 128]
    field = ld.delta_from_distance(circle, grid, ld.Kernel("cosine", 4 * h))
    assert field.nnz > 0
    close(field.integrate("one"), 2 * math.pi, 0.01 * 2 * math.pi)

    # phi = rho reproduces the ratio-mode distance field cell for cell
    phi = ld.LevelSet.named("rho", curve=circle)
    lv = ld.delta_from_levelset(phi, circle, grid, ld.Kernel("cosine", 4 * h))
    ratio = ld.delta_from_distance(circle, grid, ld.Kernel("cosine", 4 * h), mode="ratio")
    assert lv.indices() == ratio.indices()
    for a, b in zip(lv.values(), ratio.values()):
        close(a, b, 1e-12 * max(1.0, abs(b)))

    # x^2 + y^2 around the z-axis over a unit slab carries unit mass
    zaxis = ld.Curve.builtin("zaxis")
    slab = ld.Grid([-0.5, -0.5, 0.0], 1 / 64, [64, 64, 64])
    cyl = ld.delta_from_levelset(ld.LevelSet.named("cyl"), zaxis, slab, ld.Kernel("cosine", 4 / 64))
    close(cyl.integrate("one"), 1.0, 0.02)
    close(cyl.integrate("z"), 0.5, 0.01)

    try:
        ld.delta_from_levelset(ld.LevelSet.named("ellip"), circle, grid, k)
    except RuntimeError as e:
        assert "not increasing" in str(e)
    else:
        raise AssertionError("expected a monotonicity error")

    g2 = ld.Grid.cube(-2.0, 2.0, 1 / 128, ndim=2)
    c1 = ld.delta_codim1(ld.LevelSet.named("circle"), g2, ld.Kernel("cosine", 4 / 128))
    close(c1.integrate("one"), 2 * math.pi, 0.01 * 2 * math.pi)

    rho, gx, gy, gz = ld.distance(circle, ld.Grid.cube(-1.0, 1.0, 0.25))
    assert len(rho) == 512 and min(rho) >= 0.0

    report = ld.converge(circle, [1 / 16, 1 / 32, 1 / 64])
    assert report["csv"].startswith("h,eps,value,abs_err,rel_err")
    assert len(report["rows"]) == 3 and report["order"] is not None

    try:
        ld.Curve.builtin("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
