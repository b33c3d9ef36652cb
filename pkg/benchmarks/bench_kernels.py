"""Time each hot kernel on the compiled backend and the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from echoscaffold import _backend
from echoscaffold.edges import gaussian_blur, quantize_direction, sobel_gradients
from echoscaffold.phantom import PhantomSpec, generate_phantom


def cases():
    image, _ = generate_phantom(PhantomSpec())  # 369 x 200 speckle phantom
    field = sobel_gradients(gaussian_blur(image, 5, 1.4))
    sector = quantize_direction(field.direction)
    levels = (np.random.default_rng(0).integers(0, 256, (58, 135)) // 16).astype(np.uint8)
    return {
        "mean_shift 369x200": lambda k: k.mean_shift(image, 5, 100.0, 5, 1.0),
        "non_max_suppression": lambda k: k.non_max_suppression(field.magnitude, sector),
        "hysteresis": lambda k: k.hysteresis(k.non_max_suppression(field.magnitude, sector), 140.0, 280.0),
        "glcm_counts 135x58": lambda k: k.glcm_counts(levels, 1, 0, 16),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [("python", _backend.fallback)]
    if _backend.compiled is not None:
        backends.append(("compiled", _backend.compiled))
    else:
        print("compiled kernels not built; timing the fallback only")
    print(f"{'kernel':24}" + "".join(f"{name:>12}" for name, _ in backends) + ("     speedup" if len(backends) == 2 else ""))
    for label, fn in cases().items():
        times = []
        for _, k in backends:
            fn(k)  # warm up
            times.append(min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)))
        line = f"{label:24}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
