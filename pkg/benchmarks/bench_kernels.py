"""Time the compiled kernels against the pure-Python fallback.

Runs each hot kernel on the default finger-section mesh with both
backends, checks that they agree, and prints the median wall time and
the speed-up. Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--target-edge 0.2] [--surface-refine 0.05]
"""

import argparse
import statistics
import time

import numpy as np

from blanch_bench import kernels
from blanch_bench.fem import FingerSectionGeometry, build_finger_mesh


def _median_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def _cases(mesh, rng):
    xy, tri = mesh.nodes, mesh.elements
    ne = len(tri)
    E = rng.uniform(0.01, 0.2, ne)
    nu = np.full(ne, 0.48)
    u = rng.normal(scale=1e-2, size=xy.shape)
    locator = kernels.PointLocator(xy, tri)
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    pts = rng.uniform(lo, hi, size=(20_000, 2))
    img = rng.uniform(0, 255, (600, 600))
    rows = rng.uniform(0, 599, 200_000)
    cols = rng.uniform(0, 599, 200_000)
    return {
        "stiffness triplets": lambda impl: kernels.cst_stiffness_triplets(xy, tri, E, nu, impl=impl),
        "element stress": lambda impl: kernels.cst_stress(xy, tri, E, nu, u, impl=impl),
        "point location": lambda impl: locator.locate(pts, impl=impl),
        "bilinear sampling": lambda impl: kernels.bilinear_sample(img, rows, cols, impl=impl),
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-12, atol=1e-12)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--target-edge", type=float, default=0.2)
    parser.add_argument("--surface-refine", type=float, default=0.05)
    args = parser.parse_args(argv)

    impls = kernels.backends()
    mesh = build_finger_mesh(FingerSectionGeometry(), args.target_edge, args.surface_refine)
    print(f"mesh: {len(mesh.nodes)} nodes, {len(mesh.elements)} elements; backends: {', '.join(impls)}")
    if "cython" not in impls:
        print("compiled extension not built; timing the fallback only")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<20}" + "".join(f"{name:>12}" for name in impls) + f"{'speed-up':>10}  agree")
    for label, run in _cases(mesh, rng).items():
        times = {name: _median_time(lambda m=m: run(m), args.repeat) for name, m in impls.items()}
        row = f"{label:<20}" + "".join(f"{1e3 * t:>10.2f}ms" for t in times.values())
        if "cython" in impls:
            ratio = times["python"] / times["cython"]
            agree = _same(run(impls["python"]), run(impls["cython"]))
            row += f"{ratio:>9.1f}x  {agree}"
        print(row)


if __name__ == "__main__":
    main()
