"""Energy profile of a hot spot in the chain, averaged over replicas, at several times."""

import argparse
from dataclasses import asdict, dataclass, field

import numpy as np

from fracchain import ModelParams, io
from fracchain import chain_sim as cs


@dataclass
class HotSpot:
    theta: float = 4.0
    n: int = 256
    width: int = 8
    gamma: float = 1.0
    dt: float = 0.05
    steps: list = field(default_factory=lambda: [0, 200, 400, 800, 1600, 3200])
    replicas: int = 40
    seed: int = 14
    out: str = "hot_spot.csv"


def run(cfg: HotSpot):
    P = ModelParams(cfg.theta)
    lat = cs.Lattice.build(P, cfg.n)
    seqs = np.random.SeedSequence(cfg.seed).spawn(cfg.replicas)
    states = [cs.init_hot_spot(P, cfg.n, 1.0, cfg.width, ss, gamma=cfg.gamma, lattice=lat) for ss in seqs]
    rngs = [np.random.default_rng(ss.spawn(1)[0]) for ss in seqs]
    rows, done = [], 0
    for steps in cfg.steps:
        states = [cs.run(s, cfg.dt, steps - done, r) if steps > done else s for s, r in zip(states, rngs)]
        done = steps
        ep = cs.estimate_wigner(states, "energy_profile")
        var = cs.profile_variance(ep.values, centre=cfg.n / 2)
        print(f"t={steps * cfg.dt:g} spatial variance {var:.2f}")
        rows += [[steps * cfg.dt, x, v, e] for x, (v, e) in enumerate(zip(ep.values, ep.stderr))]
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=HotSpot.seed)
    ap.add_argument("--out", default=HotSpot.out)
    a = ap.parse_args()
    cfg = HotSpot(seed=a.seed, out=a.out)
    rows = run(cfg)
    io.write_csv(cfg.out, ["t", "x", "energy", "stderr"], rows, asdict(cfg), seed=cfg.seed)
