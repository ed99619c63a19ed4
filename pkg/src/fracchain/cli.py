"""Command-line front end: `fracchain <command> [options]`.

Every command accepts --config (a JSON file, or an output file whose config
echo is replayed) and --out (output directory). Flags override the config.
Exit codes: 0 success, 1 usage or config error, 2 failed verification.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from dataclasses import replace

import numpy as np

from . import io
from .params import CheckFailure, ConfigError, FracChainError, ModelParams

THREADS_ENV = "FRACCHAIN_THREADS"

_DEFAULTS = {
    "dispersion": {"k_min": 1e-6, "k_max": 0.5, "points": 64},
    "kernel-check": {"pairs": 10_000, "grid": 4096},
    "kinetic": {"N": 1e12, "lambdas": [0.5, 1.0, 2.0, 5.0], "horizon": 100.0, "samples": 10_000},
    "levy": {"N": 1e4, "t": 1.0, "samples": 100_000, "log_correction": True},
    "resolvent": {"p": [1.0, 2.0], "lam": 1.0, "eps": [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]},
    "fracpde": {"L": 100.0, "n": 16384, "times": [0.0, 1.0, 2.0, 4.0], "sigma0": 0.05},
    "chain": {"gamma": 1.0, "n": 256, "steps": 1000, "temperature": 1.0, "replicas": 1,
              "every": 100, "init": "thermal", "width": 16, "outputs": ["invariants"]},
    "verify-all": {"quick": False},
}

_STOCHASTIC = {"kinetic", "levy", "chain"}


def _positive_int(text):
    v = float(text)
    if v != int(v) or v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return int(v)


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracchain", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, stochastic=False):
        p.add_argument("--config", help="JSON config or previous output to replay")
        p.add_argument("--out", dest="out_dir", help="output directory (default: .)")
        p.add_argument("--theta", type=float)
        p.add_argument("--gamma0", type=float)
        p.add_argument("--s", type=float)
        p.add_argument("--threads", type=_positive_int,
                       help=f"worker threads (default: ${THREADS_ENV} or all cores)")
        if stochastic:
            p.add_argument("--seed", type=int)
        return p

    p = common(sub.add_parser("dispersion", help="a_hat, omega and omega' on a log grid"))
    p.add_argument("--k-min", type=float)
    p.add_argument("--k-max", type=float)
    p.add_argument("--points", type=_positive_int)

    p = common(sub.add_parser("kernel-check", help="scattering-kernel identities"))
    p.add_argument("--pairs", type=_positive_int)
    p.add_argument("--grid", type=_positive_int)

    p = common(sub.add_parser("kinetic", help="tail law and flight statistics"), stochastic=True)
    p.add_argument("--N", type=float)
    p.add_argument("--lambdas", type=_float_list)
    p.add_argument("--horizon", type=float)
    p.add_argument("--samples", type=_positive_int)

    p = common(sub.add_parser("levy", help="stable-law fit of Z(Nt)/N(theta)"), stochastic=True)
    p.add_argument("--N", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--samples", type=_positive_int)
    p.add_argument("--no-log-correction", dest="log_correction", action="store_const", const=False)

    p = common(sub.add_parser("resolvent", help="a_eps against its limit"))
    p.add_argument("--p", type=_float_list)
    p.add_argument("--lam", type=float)
    p.add_argument("--eps", type=_float_list)

    p = common(sub.add_parser("fracpde", help="fractional heat flow of a narrow Gaussian"))
    p.add_argument("--L", type=float)
    p.add_argument("--n", type=_positive_int)
    p.add_argument("--times", type=_float_list)
    p.add_argument("--sigma0", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--kappa", type=float)

    p = common(sub.add_parser("chain", help="microscopic chain run"), stochastic=True)
    p.add_argument("--gamma", type=float)
    p.add_argument("--n", type=_positive_int)
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--temperature", type=float)
    p.add_argument("--replicas", type=_positive_int)
    p.add_argument("--every", type=_positive_int)
    p.add_argument("--init", choices=["thermal", "hot-spot"])
    p.add_argument("--width", type=_positive_int)
    p.add_argument("--outputs", type=lambda t: [x for x in t.split(",") if x])

    p = common(sub.add_parser("verify-all", help="identity and acceptance checks"))
    p.add_argument("--quick", action="store_const", const=True)
    return ap


_TOP = ("theta", "gamma0", "s", "seed", "out_dir", "threads")


def resolve_config(args) -> dict:
    cfg = io.load_config(args.config) if args.config else {"command": args.command}
    if cfg.get("command") != args.command:
        raise ConfigError(f"config is for {cfg.get('command')!r}, not {args.command!r}")
    block = dict(_DEFAULTS[args.command])
    block.update(cfg.get(args.command, {}))
    for key in list(_DEFAULTS[args.command]) + ["alpha", "kappa", "dt"]:
        val = getattr(args, key, None)
        if val is not None:
            block[key] = val
    cfg[args.command] = block
    for key in _TOP:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if args.command in _STOCHASTIC and "seed" not in cfg:
        raise ConfigError(f"{args.command} is stochastic and needs --seed")
    io.validate_config(cfg)
    return cfg


def _params(cfg, need_theta=True) -> ModelParams:
    if "theta" not in cfg:
        if need_theta:
            raise ConfigError("--theta is required")
        return None
    try:
        return ModelParams(cfg["theta"], gamma0=cfg.get("gamma0", 1.0), s=cfg.get("s", 0.0))
    except FracChainError as exc:
        raise ConfigError(str(exc)) from None


def _require_above_two(P: ModelParams, command: str):
    if P.theta <= 2.0:
        raise ConfigError(f"{command} requires theta > 2 (got theta={P.theta})")


def set_threads(cfg):
    import numba

    n = cfg.get("threads") or os.environ.get(THREADS_ENV)
    if n is None:
        return
    try:
        n = int(n)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer") from None
    numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


# ------------------------------------------------------------- commands

def cmd_dispersion(cfg, out):
    from . import dispersion

    P = _params(cfg)
    _require_above_two(P, "dispersion")
    b = cfg["dispersion"]
    ks = np.geomspace(b["k_min"], b["k_max"], b["points"])
    smp = dispersion.omega_and_prime(P, ks)
    rows = zip(ks, smp.a_hat, smp.a_hat_prime, smp.omega, smp.omega_prime)
    io.write_csv(io.safe_path(out, "dispersion.csv"),
                 ["k", "a_hat", "a_hat_prime", "omega", "omega_prime"], rows, cfg)
    return 0


def cmd_kernel_check(cfg, out):
    from . import verify

    b = cfg["kernel-check"]
    res = verify.kernel_decomposition(b["pairs"]) + verify.kernel_marginals(b["grid"])
    return _report(res, cfg, out, "kernel_check.csv")


def cmd_kinetic(cfg, out):
    from . import kinetic_mc

    P = _params(cfg)
    _require_above_two(P, "kinetic")
    b = cfg["kinetic"]
    seed = cfg["seed"]
    rows = []
    for lam in b["lambdas"]:
        val = kinetic_mc.tail_statistic(P, b["N"], lam)
        rows.append([P.theta, P.gamma0, b["N"], 0.0, f"tail_statistic(lambda={lam!r})", val, 0.0, 0, seed])
        rows.append([P.theta, P.gamma0, b["N"], 0.0, f"tail_limit(lambda={lam!r})",
                     float(kinetic_mc.tail_limit(P, lam)), 0.0, 0, seed])
    fl = kinetic_mc.simulate_flights(P, b["horizon"], b["samples"], seed)
    n = b["samples"]
    rate = fl.n_jumps / b["horizon"]
    rows.append([P.theta, P.gamma0, b["horizon"], b["horizon"], "jump_rate", float(rate.mean()),
                 float(rate.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0, n, seed])
    rows.append([P.theta, P.gamma0, b["horizon"], b["horizon"], "mean_Z", float(fl.z.mean()),
                 float(fl.z.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0, n, seed])
    io.write_csv(io.safe_path(out, "kinetic.csv"), _MC_COLUMNS, rows, cfg, seed)
    return 0


_MC_COLUMNS = ["theta", "gamma0", "N", "t", "statistic", "value", "stderr", "n_samples", "seed"]


def cmd_levy(cfg, out):
    from . import kinetic_mc, resolvent

    P = _params(cfg)
    _require_above_two(P, "levy")
    b = cfg["levy"]
    seed = cfg["seed"]
    est = kinetic_mc.estimate_stable_exponent(P, b["N"], b["t"], b["samples"], seed,
                                              log_correction=b["log_correction"])
    base = [P.theta, P.gamma0, b["N"], b["t"]]
    n = est.n_samples
    rows = [
        base + ["exponent_fit", est.exponent_fit, est.stderr, n, seed],
        base + ["coefficient_fit", est.coefficient_fit, est.coefficient_stderr, n, seed],
        base + ["C_big", resolvent.C_big(P), 0.0, n, seed],
        base + ["r_squared", est.r_squared, 0.0, n, seed],
        base + ["max_imag_over_stderr", est.max_imag_z, 0.0, n, seed],
    ]
    io.write_csv(io.safe_path(out, "levy.csv"), _MC_COLUMNS, rows, cfg, seed)
    return 0


def cmd_resolvent(cfg, out):
    from . import resolvent

    P = _params(cfg)
    _require_above_two(P, "resolvent")
    b = cfg["resolvent"]
    rows = []
    for p in b["p"]:
        lim = resolvent.limit_value(P, p, b["lam"])
        for eps in b["eps"]:
            q = resolvent.resolvent_quantities(P, eps, p, b["lam"])
            rows.append([eps, p, q["a_eps"], q["I_eps"], lim, (q["a_eps"] - lim) / (lim - b["lam"])])
    io.write_csv(io.safe_path(out, "resolvent.csv"),
                 ["eps", "p", "a_eps", "I_eps", "limit", "relative_error"], rows, cfg)
    return 0


def cmd_fracpde(cfg, out):
    from . import frac_pde, kinetic_mc, resolvent

    b = cfg["fracpde"]
    P = _params(cfg, need_theta="alpha" not in b or "kappa" not in b)
    alpha = b.get("alpha", P.alpha if P else None)
    if "kappa" in b:
        kappa = b["kappa"]
    else:
        _require_above_two(P, "fracpde")
        kappa = resolvent.C_big(P)
    n = b["n"]
    if n & (n - 1):
        raise ConfigError("fracpde n must be a power of two")
    f0 = frac_pde.from_function(lambda y: frac_pde.heat_kernel_gaussian(y, 0.0, 1.0, b["sigma0"]),
                                b["L"], n, alpha, kappa)
    rows = []
    for t in b["times"]:
        w = frac_pde.to_real_space(frac_pde.evolve(f0, t))
        rows.extend([t, y, v] for y, v in zip(f0.y, w))
    io.write_csv(io.safe_path(out, "fracpde_profiles.csv"), ["t", "y", "W"], rows, cfg)
    meta = {"L": b["L"], "n": n, "alpha": alpha, "kappa": kappa, "times": b["times"]}
    if P is not None and P.theta > 2:
        meta["homogenized_kappa"] = kinetic_mc.homogenized_kappa(P)
    io.write_json(io.safe_path(out, "fracpde_field.json"), meta, cfg)
    return 0


def cmd_chain(cfg, out):
    from . import chain_sim

    P = _params(cfg)
    b = cfg["chain"]
    seed = cfg["seed"]
    n = b["n"]
    if n & (n - 1):
        raise ConfigError("chain n must be a power of two")
    lat = chain_sim.Lattice.build(P, n)
    seqs = np.random.SeedSequence(seed).spawn(b["replicas"])
    inv_rows, finals = [], []
    for r, ss in enumerate(seqs):
        init_seed, noise_seed = ss.spawn(2)
        if b["init"] == "thermal":
            st = chain_sim.init_thermal(P, n, b["temperature"], init_seed, gamma=b["gamma"], lattice=lat)
        else:
            st = chain_sim.init_hot_spot(P, n, b["temperature"], b["width"], init_seed,
                                         gamma=b["gamma"], lattice=lat)
        dt = b.get("dt") or chain_sim.default_dt(st)

        def observe(i, q, p, r=r, st=st, dt=dt):
            s = replace(st, p=p, q=q, t=st.t + i * dt)
            inv_rows.append([r, i, i * dt, chain_sim.energy(s), chain_sim.total_momentum(s)])

        finals.append(chain_sim.run(st, dt, b["steps"], np.random.default_rng(noise_seed),
                                    observe=observe, every=b["every"]))
    outs = b["outputs"]
    if "invariants" in outs:
        io.write_csv(io.safe_path(out, "chain_invariants.csv"),
                     ["replica", "step", "t", "H", "P"], inv_rows, cfg, seed)
    for kind in ("energy_profile", "spectral_density"):
        if kind in outs:
            if len(finals) < 30:
                raise ConfigError(f"{kind} needs at least 30 replicas")
            est = chain_sim.estimate_wigner(finals, kind)
            io.write_csv(io.safe_path(out, f"chain_{kind}.csv"),
                         ["coordinate", "value", "stderr"],
                         zip(est.grid, est.values, est.stderr), cfg, seed)
    return 0


def cmd_verify_all(cfg, out):
    from . import verify

    theta = cfg.get("theta", 4.0)
    res = verify.run_suite(theta, quick=cfg["verify-all"]["quick"])
    return _report(res, cfg, out, "verify_all.csv")


def _report(results, cfg, out, name):
    from . import verify

    for r in results:
        print(verify.format_result(r))
    io.write_csv(io.safe_path(out, name), ["check", "value", "tolerance", "passed"],
                 [[r.name, r.value, r.tolerance, r.passed] for r in results], cfg)
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise CheckFailure(f"{len(failed)} check(s) failed: {', '.join(failed)}")
    return 0


_COMMANDS = {
    "dispersion": cmd_dispersion,
    "kernel-check": cmd_kernel_check,
    "kinetic": cmd_kinetic,
    "levy": cmd_levy,
    "resolvent": cmd_resolvent,
    "fracpde": cmd_fracpde,
    "chain": cmd_chain,
    "verify-all": cmd_verify_all,
}


def main(argv=None) -> int:
    warnings.filterwarnings("ignore", message="The TBB threading layer")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        cfg = resolve_config(args)
        set_threads(cfg)
        # run-location keys do not affect results and are kept out of the echo
        out = cfg.pop("out_dir", ".")
        cfg.pop("threads", None)
        return _COMMANDS[args.command](cfg, out)
    except CheckFailure as exc:
        print(f"fracchain: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, FracChainError, ValueError) as exc:
        print(f"fracchain: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
