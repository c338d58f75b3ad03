"""Command-line front end: parameter sweeps, calibration, moments and simulation.

Exit codes: 0 success, 1 failed ``simulate --check``, 2 usage error,
3 infeasible target, 4 numerical nonconvergence.

Options can also come from a flat ``key = value`` config file given with
``--config``; flags on the command line win.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .isi_moments import (
    MAX_ORACLE_ORDER,
    MAX_WINDOW,
    IsiConfig,
    central_moments,
    enumerate_isi,
    enumeration_moments,
)
from .link_sim import SimConfig, simulate
from .mechanisms import (
    ChannelNoise,
    CrossoverPair,
    InfeasibleTarget,
    NonConvergence,
    NonMonotoneBracket,
    alpha_for_epsilon,
    binary_convolve,
    bsc_rate_for_target,
    epsilon_from_crossovers,
    epsilon_rotation,
    isi_crossovers_enum,
    isi_privacy,
    rotation_ber,
    snr_ber,
    tau_for_epsilon,
)

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NONCONVERGENCE = 0, 1, 2, 3, 4
SATURATION = 50.0
DEFAULT_P_LIST = (0.3, 0.5, 0.7, 0.9, 0.999)


class UsageError(Exception):
    pass


def _float_list(text):
    return [float(x) for x in str(text).replace(",", " ").split()]


def _method_list(text):
    return [m.strip() for m in str(text).split(",") if m.strip()]


def _bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _seed(text):
    v = int(text, 0) if isinstance(text, str) else int(text)
    if not 0 <= v < 2**64:
        raise ValueError("seed must fit in 64 unsigned bits")
    return v


def _default_seed():
    env = os.environ.get("PHYDP_SEED")
    return _seed(env) if env else 0


# dest -> (converter, default); defaults may be callables
OPTIONS = {
    "sigma": (float, 1.0),
    "p": (_float_list, None),
    "alpha_start": (float, 0.0),
    "alpha_stop": (float, math.pi / 2),
    "alpha_count": (int, 101),
    "tau_start": (float, 0.0),
    "tau_stop": (float, 1.0),
    "tau_count": (int, 101),
    "window": (int, 10),
    "depth": (int, 80),
    "methods": (_method_list, ["enumeration"]),
    "tail": (str, "gaussian"),
    "workers": (int, 1),
    "target_eps": (float, None),
    "mechanism": (str, None),
    "tau": (float, None),
    "alpha": (float, None),
    "order": (int, 6),
    "num_symbols": (int, 10**6),
    "sim_window": (int, 2000),
    "seed": (_seed, _default_seed),
    "check": (_bool, False),
    "format": (str, None),
    "output": (str, None),
}


def load_config(path):
    """Parse a flat ``key = value`` file into converted option values."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        dest = key.replace("-", "_")
        if dest not in OPTIONS or dest == "output":
            raise UsageError(f"{path}:{lineno}: unknown field {key!r}")
        try:
            out[dest] = OPTIONS[dest][0](value)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    return out


def resolve(args):
    """Layer built-in defaults, then config file, then explicit flags."""
    conf = load_config(args.config) if args.config else {}
    for dest, (_, default) in OPTIONS.items():
        if not hasattr(args, dest):
            continue
        if getattr(args, dest) is None:
            if dest in conf:
                setattr(args, dest, conf[dest])
            else:
                setattr(args, dest, default() if callable(default) else default)
    if args.format is None:
        args.format = args.default_format
    if args.format not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {args.format!r}")
    return args


# -- output -----------------------------------------------------------------

def fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.9g}"


def _json_safe(x):
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return None
    if isinstance(x, np.integer):
        return int(x)
    return x


def render_csv(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def render_json(obj):
    return json.dumps(_json_safe(obj), indent=2) + "\n"


def emit(args, text):
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def emit_rows(args, columns, rows):
    if args.format == "json":
        for row in rows:
            if "epsilon" in row:
                row["saturated"] = bool(row["epsilon"] > SATURATION)
        emit(args, render_json(rows))
    else:
        emit(args, render_csv(columns, rows))


def _grid(start, stop, count, lo, hi, name):
    if count < 2:
        raise UsageError(f"{name} grid needs at least 2 points, got {count}")
    if not lo <= start <= stop <= hi + 1e-12:
        raise UsageError(f"{name} grid [{start}, {stop}] must lie inside [{lo}, {hi:.9g}]")
    return [float(x) for x in np.linspace(start, min(stop, hi), count)]


def _pmap(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _p_list(args):
    ps = args.p if args.p is not None else list(DEFAULT_P_LIST)
    for p in ps:
        if not 0.0 <= p <= 1.0:
            raise UsageError(f"p must lie in [0, 1], got {p}")
    return ps


# -- subcommands --------------------------------------------------------------

def cmd_sweep_rotation(args):
    if args.p is not None:
        warnings.warn("rotation privacy does not depend on p; drop the p option")
        raise UsageError("p is not a parameter of the rotation mechanism")
    noise = ChannelNoise(args.sigma)
    alphas = _grid(args.alpha_start, args.alpha_stop, args.alpha_count, 0.0, math.pi / 2,
                   "alpha")
    rows = [{"alpha": a, "sigma": noise.sigma, "ber": rotation_ber(a, noise),
             "epsilon": epsilon_rotation(a, noise)} for a in alphas]
    emit_rows(args, ["alpha", "sigma", "ber", "epsilon"], rows)
    return EXIT_OK


ISI_COLUMNS = ["tau", "p", "sigma", "zeta1", "zeta2", "ber", "epsilon", "method", "bound"]


def _isi_row(tau, p, sigma, method, args):
    cfg = IsiConfig(tau, p, args.window)
    if method == "monte_carlo":
        rep = simulate(SimConfig("isi", ChannelNoise(sigma), args.num_symbols, args.seed,
                                 isi=cfg, window=args.sim_window))
        se = max(rep.zeta1_se, rep.zeta2_se)
        return {"tau": tau, "p": p, "sigma": sigma, "zeta1": rep.zeta1_hat,
                "zeta2": rep.zeta2_hat, "ber": rep.ber_hat, "epsilon": rep.epsilon_hat,
                "method": method, "bound": 3.0 * se}
    res = isi_privacy(cfg, sigma, method=method, depth=args.depth, tail=args.tail)
    return {"tau": tau, "p": p, "sigma": sigma, "zeta1": res.crossovers.zeta1,
            "zeta2": res.crossovers.zeta2, "ber": res.ber, "epsilon": res.epsilon,
            "method": method, "bound": res.crossovers.bound}


def cmd_sweep_isi(args):
    noise = ChannelNoise(args.sigma)
    taus = _grid(args.tau_start, args.tau_stop, args.tau_count, 0.0, 1.0, "tau")
    ps = _p_list(args)
    for m in args.methods:
        if m not in ("enumeration", "series", "monte_carlo"):
            raise UsageError(f"sweep-isi methods are enumeration, series, monte_carlo; got {m!r}")
    if not 1 <= args.window <= MAX_WINDOW:
        raise UsageError(f"window must lie in [1, {MAX_WINDOW}]")
    jobs = [(t, p, m) for t in taus for p in ps for m in args.methods]
    rows = _pmap(lambda j: _isi_row(j[0], j[1], noise.sigma, j[2], args), jobs, args.workers)
    emit_rows(args, ISI_COLUMNS, rows)
    return EXIT_OK


def cmd_tradeoff(args):
    noise = ChannelNoise(args.sigma)
    alphas = _grid(args.alpha_start, args.alpha_stop, args.alpha_count, 0.0, math.pi / 2,
                   "alpha")
    taus = _grid(args.tau_start, args.tau_stop, args.tau_count, 0.0, 1.0, "tau")
    ps = _p_list(args)
    rows = [{"mechanism": "rotation", "param": a, "p": None, "sigma": noise.sigma,
             "ber": rotation_ber(a, noise), "epsilon": epsilon_rotation(a, noise)}
            for a in alphas]

    def isi_point(job):
        t, p = job
        res = isi_privacy(IsiConfig(t, p, args.window), noise, tail=args.tail)
        return {"mechanism": "isi", "param": t, "p": p, "sigma": noise.sigma,
                "ber": res.ber, "epsilon": res.epsilon}

    rows += _pmap(isi_point, [(t, p) for p in ps for t in taus], args.workers)
    emit_rows(args, ["mechanism", "param", "p", "sigma", "ber", "epsilon"], rows)
    return EXIT_OK


CALIBRATE_COLUMNS = ["mechanism", "target_epsilon", "parameter", "value", "sigma", "p",
                     "predicted_ber", "predicted_epsilon", "feasible", "reason"]


def calibrate(target, mechanism, sigma, p=0.5, window=10):
    """Mechanism parameter reaching ``target``; raises :class:`InfeasibleTarget`."""
    noise = ChannelNoise(sigma)
    out = {"mechanism": mechanism, "target_epsilon": target, "sigma": sigma, "p": None,
           "feasible": True, "reason": None}
    if mechanism == "snr":
        r = bsc_rate_for_target(target, noise)
        q = binary_convolve(r, snr_ber(noise))
        out.update(parameter="flip_rate", value=r, predicted_ber=q,
                   predicted_epsilon=epsilon_from_crossovers(CrossoverPair(q, q)))
    elif mechanism == "rotation":
        a = alpha_for_epsilon(target, noise).alpha
        out.update(parameter="alpha", value=a, predicted_ber=rotation_ber(a, noise),
                   predicted_epsilon=epsilon_rotation(a, noise))
    elif mechanism == "isi":
        tau = tau_for_epsilon(target, p, noise, window=window)
        res = isi_privacy(IsiConfig(tau, p, window), noise)
        out.update(parameter="tau", value=tau, p=p, predicted_ber=res.ber,
                   predicted_epsilon=res.epsilon)
    else:
        raise UsageError(f"mechanism must be snr, rotation or isi; got {mechanism!r}")
    return out


def cmd_calibrate(args):
    if args.target_eps is None or args.mechanism is None:
        raise UsageError("calibrate needs --target-eps and --mechanism")
    p = args.p[0] if args.p else 0.5
    if args.p and len(args.p) > 1:
        raise UsageError("calibrate takes a single p")
    if args.p and args.mechanism != "isi":
        raise UsageError(f"p is not a parameter of the {args.mechanism} mechanism")
    try:
        out = calibrate(args.target_eps, args.mechanism, args.sigma, p, args.window)
        code = EXIT_OK
    except InfeasibleTarget as exc:
        out = {"mechanism": args.mechanism, "target_epsilon": args.target_eps,
               "sigma": args.sigma, "feasible": False, "reason": str(exc)}
        code = EXIT_INFEASIBLE
    if args.format == "csv":
        emit(args, render_csv(CALIBRATE_COLUMNS, [out]))
    else:
        emit(args, render_json(out))
    return code


def moments_report(tau, p, window, order):
    cfg = IsiConfig(tau, p, window, order)
    formula = central_moments(cfg)
    dist = enumerate_isi(cfg)
    exact = enumeration_moments(dist, order)
    return {
        "tau": tau, "p": p, "window": window, "order": order,
        "tail_std_bound": dist.tail_std_bound,
        "formula": formula.to_dict(),
        "enumeration": exact.to_dict(),
        "central_delta": [a - b for a, b in zip(formula.central, exact.central)],
        "raw_delta": [a - b for a, b in zip(formula.raw, exact.raw)],
    }


def cmd_moments(args):
    if args.tau is None:
        raise UsageError("moments needs --tau")
    if args.p is not None and len(args.p) != 1:
        raise UsageError("moments takes a single p")
    p = args.p[0] if args.p else 0.5
    if not 1 <= args.window <= MAX_WINDOW:
        raise UsageError(f"window must lie in [1, {MAX_WINDOW}]")
    if not 1 <= args.order <= MAX_ORACLE_ORDER:
        raise UsageError(f"order must lie in [1, {MAX_ORACLE_ORDER}]")
    try:
        rep = moments_report(args.tau, p, args.window, args.order)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        emit(args, render_json(rep))
    else:
        rows = [{"order": n,
                 "formula_central": rep["formula"]["central"][n],
                 "enumeration_central": rep["enumeration"]["central"][n],
                 "central_delta": rep["central_delta"][n],
                 "formula_raw": rep["formula"]["raw"][n],
                 "enumeration_raw": rep["enumeration"]["raw"][n],
                 "raw_delta": rep["raw_delta"][n]} for n in range(args.order + 1)]
        emit(args, render_csv(list(rows[0]), rows))
    return EXIT_OK


def analytic_crossovers(cfg):
    """Analytic ``CrossoverPair`` matching a :class:`SimConfig`."""
    if cfg.mechanism == "snr":
        q = snr_ber(cfg.noise)
        return CrossoverPair(q, q)
    if cfg.mechanism == "rotation":
        q = rotation_ber(cfg.alpha, cfg.noise)
        return CrossoverPair(q, q)
    return isi_crossovers_enum(IsiConfig(cfg.isi.tau, cfg.isi.p, 10), cfg.noise)


def cmd_simulate(args):
    mech = args.mechanism
    if mech not in ("snr", "rotation", "isi"):
        raise UsageError("simulate needs --mechanism snr|rotation|isi")
    if args.p is not None and len(args.p) != 1:
        raise UsageError("simulate takes a single p")
    if mech != "rotation" and args.alpha is not None:
        raise UsageError(f"--alpha does not apply to the {mech} mechanism")
    if mech != "isi" and (args.tau is not None or args.p is not None):
        raise UsageError(f"--tau/--p do not apply to the {mech} mechanism")
    if mech == "isi" and args.tau is None:
        raise UsageError("isi simulation needs --tau")
    try:
        cfg = SimConfig(
            mech, ChannelNoise(args.sigma), args.num_symbols, args.seed,
            alpha=args.alpha or 0.0,
            isi=IsiConfig(args.tau, args.p[0] if args.p else 0.5) if mech == "isi" else None,
            window=args.sim_window, workers=args.workers,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rep = simulate(cfg)
    out = rep.to_dict()
    code = EXIT_OK
    if args.check:
        ref = analytic_crossovers(cfg)
        ok1 = abs(rep.zeta1_hat - ref.zeta1) <= 3.0 * rep.zeta1_se
        ok2 = abs(rep.zeta2_hat - ref.zeta2) <= 3.0 * rep.zeta2_se
        out["check"] = {"zeta1": ref.zeta1, "zeta2": ref.zeta2,
                        "epsilon": epsilon_from_crossovers(ref),
                        "within_3se": bool(ok1 and ok2)}
        code = EXIT_OK if ok1 and ok2 else EXIT_CHECK
    if args.format == "csv":
        flat = {k: v for k, v in out.items() if not isinstance(v, dict)}
        flat.update(out["counts"])
        if "check" in out:
            flat.update({f"check_{k}": v for k, v in out["check"].items()})
        emit(args, render_csv(list(flat), [flat]))
    else:
        emit(args, render_json(out))
    return code


# -- parser -----------------------------------------------------------------

def _common(sp):
    sp.add_argument("--config", help="flat key=value file; flags override it")
    sp.add_argument("--output", help="write to this path instead of stdout")
    sp.add_argument("--format", choices=("csv", "json"))
    sp.add_argument("--sigma", type=float, help="noise std along the detection axis")
    sp.add_argument("--workers", type=int)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="phydp", description="Physical-layer differential privacy for BPSK links.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep-rotation", help="epsilon versus rotation angle")
    _common(sp)
    sp.add_argument("--alpha-start", type=float)
    sp.add_argument("--alpha-stop", type=float)
    sp.add_argument("--alpha-count", type=int)
    sp.add_argument("--p", type=_float_list, help="rejected: rotation ignores p")
    sp.set_defaults(func=cmd_sweep_rotation, default_format="csv")

    sp = sub.add_parser("sweep-isi", help="epsilon versus timing offset for several p")
    _common(sp)
    sp.add_argument("--tau-start", type=float)
    sp.add_argument("--tau-stop", type=float)
    sp.add_argument("--tau-count", type=int)
    sp.add_argument("--p", type=_float_list, help="comma separated source biases")
    sp.add_argument("--window", type=int)
    sp.add_argument("--depth", type=int)
    sp.add_argument("--methods", type=_method_list,
                    help="comma separated subset of enumeration,series,monte_carlo")
    sp.add_argument("--tail", choices=("gaussian", "ignore"))
    sp.add_argument("--num-symbols", type=int)
    sp.add_argument("--sim-window", type=int)
    sp.add_argument("--seed", type=_seed)
    sp.set_defaults(func=cmd_sweep_isi, default_format="csv")

    sp = sub.add_parser("tradeoff", help="epsilon versus BER for rotation and ISI")
    _common(sp)
    for name in ("alpha", "tau"):
        sp.add_argument(f"--{name}-start", type=float)
        sp.add_argument(f"--{name}-stop", type=float)
        sp.add_argument(f"--{name}-count", type=int)
    sp.add_argument("--p", type=_float_list)
    sp.add_argument("--window", type=int)
    sp.add_argument("--tail", choices=("gaussian", "ignore"))
    sp.set_defaults(func=cmd_tradeoff, default_format="csv")

    sp = sub.add_parser("calibrate", help="mechanism parameter for a target epsilon")
    _common(sp)
    sp.add_argument("--target-eps", type=float)
    sp.add_argument("--mechanism", choices=("snr", "rotation", "isi"))
    sp.add_argument("--p", type=_float_list)
    sp.add_argument("--window", type=int)
    sp.set_defaults(func=cmd_calibrate, default_format="json")

    sp = sub.add_parser("moments", help="closed-form versus enumerated ISI moments")
    _common(sp)
    sp.add_argument("--tau", type=float)
    sp.add_argument("--p", type=_float_list)
    sp.add_argument("--window", type=int)
    sp.add_argument("--order", type=int)
    sp.set_defaults(func=cmd_moments, default_format="json")

    sp = sub.add_parser("simulate", help="Monte Carlo run of one mechanism")
    _common(sp)
    sp.add_argument("--mechanism", choices=("snr", "rotation", "isi"))
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--tau", type=float)
    sp.add_argument("--p", type=_float_list)
    sp.add_argument("--sim-window", type=int, help="ISI neighbours per side")
    sp.add_argument("--num-symbols", type=int)
    sp.add_argument("--seed", type=_seed)
    sp.add_argument("--check", action="store_const", const=True,
                    help="exit 1 unless analytic crossovers fall within 3 SE")
    sp.set_defaults(func=cmd_simulate, default_format="json")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        resolve(args)
        return args.func(args)
    except UsageError as exc:
        print(f"phydp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleTarget as exc:
        print(f"phydp {args.command}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NonConvergence, NonMonotoneBracket) as exc:
        print(f"phydp {args.command}: nonconvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ValueError as exc:
        print(f"phydp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
