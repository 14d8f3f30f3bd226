"""A guided tour of the geometry kernels.

Walks through Mobius arithmetic on the Poincare ball, the exponential and
logarithm maps, the hyperboloid model, and the isometric conversion between
the two models, printing each result next to the identity it illustrates.

Run:  python3 demos/01_geometry_tour.py
"""

import numpy as np

from gyronet import checks
from gyronet import geometry as geo

np.set_printoptions(precision=4, suppress=True)


def main():
    print("== Mobius arithmetic on the Poincare ball ==")
    x = np.array([0.5, 0.0])
    print(f"x (+) x            = {geo.mobius_add(x, x)}   (tanh(2 atanh 0.5) = 0.8)")
    print(f"2 (x) x            = {geo.mobius_scalar_mul(2.0, x)}   (same point)")
    print(f"x (+) (-x)         = {geo.mobius_add(x, geo.mobius_neg(x))}")

    a, b = np.array([0.5, 0.1]), np.array([-0.2, 0.6])
    print(f"a (+) b            = {geo.mobius_add(a, b)}")
    print(f"b (+) a            = {geo.mobius_add(b, a)}   <- not commutative")
    v = np.array([0.1, 0.3])
    lhs = geo.mobius_add(a, geo.mobius_add(b, v))
    rhs = geo.mobius_add(geo.mobius_add(a, b), geo.gyration(a, b, v))
    print(f"gyroassociativity  |a(+)(b(+)v) - (a(+)b)(+)gyr[a,b]v| = "
          f"{np.linalg.norm(lhs - rhs):.2e}")

    print("\n== Exponential / logarithm maps ==")
    p = np.array([0.3, -0.2])
    t = geo.log_map_poincare(p, b)
    print(f"log_p(b)           = {t}")
    print(f"exp_p(log_p(b))    = {geo.exp_map_poincare(p, t)}   (b = {b})")
    print(f"d(p, b)            = {geo.poincare_distance(p, b):.4f}")

    print("\n== Hyperboloid model and the isometry ==")
    o = geo.hyperboloid_origin(2)
    h = geo.exp_map_hyperboloid(o, np.array([1.0, 0.0, 0.0]))
    print(f"exp_o((1,0,0))     = {h}   ((sinh 1, 0, cosh 1))")
    print(f"to_poincare        = {geo.to_poincare(h)}   (tanh(1/2) on the axis)")
    print(f"round trip         = {geo.to_poincare(geo.to_hyperboloid(geo.to_poincare(h)))}")
    u = geo.to_hyperboloid(a)
    w = geo.to_hyperboloid(b)
    print(f"ball distance      = {geo.poincare_distance(a, b):.6f}")
    print(f"hyperboloid dist   = {geo.hyperboloid_distance(u, w):.6f}   (equal)")

    print("\n== Invariant suites ==")
    for result in checks.run_all():
        status = "pass" if result.passed else "FAIL"
        print(f"{result.name:24s} max_err {result.max_error:.2e} "
              f"(tol {result.tol:.0e}) {status}")


if __name__ == "__main__":
    main()
