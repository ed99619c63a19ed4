"""a_eps against its small-eps limit along eps = 1e-2 .. 1e-6."""

import argparse
from dataclasses import asdict, dataclass, field

from fracchain import ModelParams, io, resolvent


@dataclass
class ResolventScan:
    thetas: list = field(default_factory=lambda: [2.2, 2.5, 3.0, 4.0])
    ps: list = field(default_factory=lambda: [1.0, 2.0])
    eps: list = field(default_factory=lambda: [1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    lam: float = 1.0
    out: str = "resolvent_convergence.csv"


def run(cfg: ResolventScan):
    rows = []
    for theta in cfg.thetas:
        P = ModelParams(theta)
        for p in cfg.ps:
            L = resolvent.limit_value(P, p, cfg.lam)
            for e in cfg.eps:
                a = resolvent.a_eps(P, e, p, cfg.lam)
                rel = (a - L) / (L - cfg.lam)
                rows.append([theta, p, e, a, L, rel])
                print(f"theta={theta} p={p:g} eps={e:.0e} rel err {rel:+.3%}")
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=ResolventScan.out)
    cfg = ResolventScan(out=ap.parse_args().out)
    rows = run(cfg)
    io.write_csv(cfg.out, ["theta", "p", "eps", "a_eps", "limit", "relative_error"], rows, asdict(cfg))
