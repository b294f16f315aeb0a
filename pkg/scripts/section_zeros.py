"""Zero regions of a partial time orientation as the grid is refined.

    python scripts/section_zeros.py cone_cylinder.toml "cos(theta)" theta
"""
import argparse
import math

from timespace import spacetime, time_bundle
from timespace.cli import resolve_spec_path


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("spec")
    ap.add_argument("multiplier")
    ap.add_argument("coord")
    ap.add_argument("--sizes", default="32,128,512,2048")
    a = ap.parse_args()
    spec = spacetime.load_spec(resolve_spec_path(a.spec))
    lo, hi = spec.box[a.coord]
    section = time_bundle.PartialSection.from_source(a.multiplier)
    for n in map(int, a.sizes.split(",")):
        rep = time_bundle.evaluate_section(spec, section, {a.coord: (lo, hi, n)})
        k = spec.coords.index(a.coord)
        zeros = ", ".join(f"{z.center[k]:.5f}" for z in rep.zero_regions) or "-"
        step = (hi - lo) / n
        print(f"n={n:<6} step={step:.2e}  zeros: {zeros}  discontinuities: {len(rep.discontinuities)}")
    if a.coord in spec.periodic:
        print(f"({a.coord} is periodic with period {spec.periodic[a.coord] / math.pi:g} pi)")


if __name__ == "__main__":
    main()
