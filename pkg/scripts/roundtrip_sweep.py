"""Round-trip and scale-invariance errors as the random forms get worse conditioned.

For each bound on cond(P), where g = P^T diag(-a, b, c, d) P, report the
worst line angle, eigenvalue error and scale-invariance difference of the
induced Riemannian form.

    python scripts/roundtrip_sweep.py --instances 500
"""
import argparse
from dataclasses import dataclass, field

import numpy as np

from timespace import separation


@dataclass
class Config:
    instances: int = 500
    seed: int = 0
    cond_bounds: list = field(default_factory=lambda: [10.0, 100.0, 1000.0, 10000.0])
    scales: tuple = (-3.0, 0.01, 7.0)


def random_lorentzian(rng, max_cond):
    while True:
        P = rng.standard_normal((4, 4))
        if np.linalg.cond(P) < max_cond:
            break
    D = np.diag(rng.uniform(0.5, 2.0, 4) * np.array([-1.0, 1.0, 1.0, 1.0]))
    g = P.T @ D @ P
    return 0.5 * (g + g.T)


def random_timelike(rng, g):
    w, Q = np.linalg.eigh(g)
    while True:
        z = rng.standard_normal(4)
        if np.sign(w) @ (z * z) < -0.05 * (z @ z):
            return Q @ (z / np.sqrt(np.abs(w)))


def sweep(cfg: Config):
    rows = []
    for bound in cfg.cond_bounds:
        rng = np.random.default_rng(cfg.seed)
        angle = eig = scale = 0.0
        for _ in range(cfg.instances):
            g = random_lorentzian(rng, bound)
            v = random_timelike(rng, g)
            r = separation.roundtrip_check(g, v)
            angle = max(angle, r.angle)
            eig = max(eig, r.eigenvalue_residual)
            for c in cfg.scales:
                diff = np.abs(separation.riemann_from_timelike(g, c * v) - r.h).max()
                scale = max(scale, float(diff))
        rows.append((bound, angle, eig, scale))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    print(f"{'cond(P) <':>10}{'max angle':>12}{'max |lam+1|':>14}{'max scale diff':>16}")
    for bound, angle, eig, scale in sweep(Config(a.instances, a.seed)):
        print(f"{bound:>10.0f}{angle:>12.2e}{eig:>14.2e}{scale:>16.2e}")


if __name__ == "__main__":
    main()
