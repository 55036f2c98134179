"""Write the CSV series for every figure preset.

    python3 scripts/reproduce_figures.py --out results
"""
import argparse
import time

from dephasing_geometry.runner import PRESETS, reproduce


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("presets", nargs="*", default=sorted(PRESETS))
    args = ap.parse_args()
    for name in args.presets:
        t0 = time.perf_counter()
        paths = reproduce(name, args.out)
        print(f"{name}: {len(paths)} files in {time.perf_counter() - t0:.2f} s -> {paths[0].parent}")


if __name__ == "__main__":
    main()
