"""Holonomy of every declared loop as the loop sampling is refined.

    python scripts/holonomy_refinement.py cone_cylinder.toml --max-samples 8192
"""
import argparse
import time
from dataclasses import dataclass

from timespace import spacetime, time_bundle
from timespace.cli import resolve_spec_path


@dataclass
class Config:
    spec: str
    min_samples: int = 64
    max_samples: int = 8192


def sweep(cfg: Config):
    spec = spacetime.load_spec(resolve_spec_path(cfg.spec))
    rows = []
    for loop in spec.loops:
        n = cfg.min_samples
        while n <= cfg.max_samples:
            t0 = time.perf_counter()
            r = time_bundle.holonomy(spec, loop, n)
            rows.append((loop.name, n, r.samples_used, r.holonomy, r.min_alignment,
                         time.perf_counter() - t0))
            n *= 2
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("spec")
    ap.add_argument("--min-samples", type=int, default=64)
    ap.add_argument("--max-samples", type=int, default=8192)
    a = ap.parse_args()
    rows = sweep(Config(a.spec, a.min_samples, a.max_samples))
    print(f"{'loop':<14}{'n':>7}{'used':>7}{'hol':>5}{'min_align':>12}{'secs':>9}")
    for name, n, used, hol, align, secs in rows:
        print(f"{name:<14}{n:>7}{used:>7}{hol:>+5d}{align:>12.6f}{secs:>9.4f}")


if __name__ == "__main__":
    main()
