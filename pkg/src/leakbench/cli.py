"""Command-line front door.

Subcommands: ``lrb`` and ``ilrb`` run experiments from a config file or a
named preset and write dataset CSVs, the fit report and a run manifest;
``theory`` answers closed-form queries as JSON on stdout; ``fit`` refits
an existing dataset CSV.  Exit codes: 0 success, 2 config/usage errors,
3 fit non-convergence (datasets are still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__, fitpipe, presets, protocol, theory
from .config import ConfigError, load_config
from .fitpipe import FitError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FIT = 3


def _threads_from(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("LEAKBENCH_THREADS")
    return max(1, int(env)) if env else 1


def _resolve_run(args):
    """Config + fit-model from --config or --preset (plus overrides)."""
    if bool(args.config) == bool(args.preset):
        raise ConfigError("exactly one of --config or --preset is required")
    if args.config:
        cfg = load_config(args.config)
        fit_model = args.fit_model or "corollary1"
        name = os.path.splitext(os.path.basename(args.config))[0]
    else:
        seed = args.seed if args.seed is not None else 2024
        run = presets.build_preset(args.preset, seed)
        cfg, fit_model, name = run.config, run.fit_model, run.name
        if args.fit_model:
            fit_model = args.fit_model
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.shots is not None:
        overrides["shots"] = args.shots
    if args.exact:
        overrides["shots"] = "exact"
    if args.reuse_prefixes is not None:
        overrides["reuse_prefixes"] = args.reuse_prefixes
    if overrides:
        if args.preset and "seed" in overrides:
            # preset instances are sampled from the seed: rebuild
            run = presets.build_preset(args.preset, overrides.pop("seed"))
            cfg = run.config
        if overrides:
            from dataclasses import replace
            cfg = replace(cfg, **overrides)
    return cfg, fit_model, name


def _write(path: str, text: str):
    with open(path, "w") as fh:
        fh.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _manifest(name, cfg, outputs, threads, extra=None) -> dict:
    man = {
        "schema": 1,
        "preset": name,
        "config": cfg.describe(),
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "outputs": outputs,
        "threads": threads,
        "toolkit_version": __version__,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    if extra:
        man.update(extra)
    return man


def _fit_dataset(dataset, fit_model, order, n, lambda_p=None,
                 lambda_p_err=0.0, ratio=1.0):
    """Fit a dataset and attach rate estimates; returns a JSON-ready dict."""
    if order == "auto":
        fit = fitpipe.select_model(dataset)
    else:
        fit = fitpipe.fit_decay(dataset, order=int(order))
    obj = fit.to_json_obj()
    obj["model"] = fit_model
    if fit_model and fit_model != "none":
        kwargs = {"n": n, "ratio": ratio}
        if fit_model == "iswap":
            kwargs["lambda_p"] = lambda_p
            kwargs["lambda_p_err"] = lambda_p_err
        report = fitpipe.rates_from_fit(fit, fit_model, **kwargs)
        obj.update({"L": report.L, "S": report.S,
                    "L_err": report.L_err, "S_err": report.S_err})
    return obj, fit


def cmd_lrb(args) -> int:
    cfg, fit_model, name = _resolve_run(args)
    if cfg.mode != "lrb":
        raise ConfigError("lrb subcommand needs a config with mode = 'lrb'")
    threads = _threads_from(args)
    os.makedirs(args.out_dir, exist_ok=True)
    dataset = protocol.run_lrb(cfg, threads=threads)
    csv_path = os.path.join(args.out_dir, "dataset.csv")
    _write(csv_path, dataset.to_csv_text())
    # refit from the emitted bytes so a standalone refit reproduces fit.json
    dataset = protocol.SurvivalDataset.from_csv_text(
        open(csv_path).read(), mode=cfg.mode, config_hash=cfg.config_hash())
    outputs = {"dataset": csv_path}
    code = EXIT_OK
    try:
        fit_obj, _ = _fit_dataset(dataset, fit_model, args.order, cfg.n,
                                  ratio=args.ratio)
    except FitError as exc:
        fit_obj = {"error": str(exc), "model": fit_model}
        code = EXIT_FIT
    fit_path = os.path.join(args.out_dir, "fit.json")
    _write(fit_path, _json_text(fit_obj))
    outputs["fit"] = fit_path
    man_path = os.path.join(args.out_dir, "manifest.json")
    _write(man_path, _json_text(_manifest(name, cfg, outputs, threads)))
    print(f"wrote {csv_path}, {fit_path}, {man_path}")
    return code


def cmd_ilrb(args) -> int:
    cfg, fit_model, name = _resolve_run(args)
    if cfg.mode != "ilrb":
        raise ConfigError("ilrb subcommand needs a config with mode = 'ilrb'")
    threads = _threads_from(args)
    os.makedirs(args.out_dir, exist_ok=True)
    interleaved, reference = protocol.run_ilrb(
        cfg, threads=threads, reference_only=args.reference_only)

    outputs = {}
    ref_path = os.path.join(args.out_dir, "dataset_reference.csv")
    _write(ref_path, reference.to_csv_text())
    reference = protocol.SurvivalDataset.from_csv_text(
        open(ref_path).read(), mode="lrb", config_hash=cfg.config_hash())
    outputs["reference"] = ref_path
    if interleaved is not None:
        int_path = os.path.join(args.out_dir, "dataset_interleaved.csv")
        _write(int_path, interleaved.to_csv_text())
        interleaved = protocol.SurvivalDataset.from_csv_text(
            open(int_path).read(), mode="ilrb",
            config_hash=cfg.config_hash())
        outputs["interleaved"] = int_path

    code = EXIT_OK
    fit_obj = {}
    try:
        ref_fit_obj, ref_fit = _fit_dataset(reference, "corollary1",
                                            args.order, cfg.n)
        fit_obj["reference"] = ref_fit_obj
        if interleaved is not None:
            if fit_model == "cz" or (fit_model != "iswap"
                                     and cfg.pauli_noise is None):
                int_obj, _ = _fit_dataset(interleaved, "cz", "2", cfg.n)
            else:
                lam_p = float(ref_fit.lambdas[0])
                lam_p_err = float(ref_fit.lambda_stderr[0])
                int_obj, _ = _fit_dataset(interleaved, "iswap", args.order,
                                          cfg.n, lambda_p=lam_p,
                                          lambda_p_err=lam_p_err)
            fit_obj["interleaved"] = int_obj
    except FitError as exc:
        fit_obj["error"] = str(exc)
        code = EXIT_FIT
    fit_path = os.path.join(args.out_dir, "fit.json")
    _write(fit_path, _json_text(fit_obj))
    outputs["fit"] = fit_path
    man_path = os.path.join(args.out_dir, "manifest.json")
    _write(man_path, _json_text(_manifest(name, cfg, outputs, threads)))
    print(f"wrote {', '.join(sorted(outputs.values()))}")
    return code


def cmd_fit(args) -> int:
    with open(args.csv) as fh:
        dataset = protocol.SurvivalDataset.from_csv_text(fh.read())
    try:
        obj, _ = _fit_dataset(dataset, args.model, args.order, args.n,
                              lambda_p=args.lambda_p,
                              lambda_p_err=args.lambda_p_err,
                              ratio=args.ratio)
    except FitError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    text = _json_text(obj)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.split(",") if x.strip() != ""])


def cmd_theory(args) -> int:
    if args.theory_cmd == "single-site":
        p = _parse_vector(args.p)
        q = _parse_vector(args.q)
        summary = theory.eigen_bounds(p, q)
        L, S = theory.rates_from_q(theory.single_site_q(p, q))
        out = {
            "eigenvalues": summary.full_spectrum.tolist(),
            "bounds": [list(b) if b else None for b in summary.bounds],
            "L": L, "S": S, "notes": list(summary.notes),
        }
    elif args.theory_cmd == "ilrb":
        summary = theory.ilrb_eigenvalues(args.pbar, args.eps, args.n)
        q = theory.ilrb_q(args.pbar, args.eps, args.n)
        L = args.n * args.eps
        S = 2 ** args.n * args.n * args.eps / (3 ** args.n - 2 ** args.n)
        out = {
            "eigenvalues": summary.full_spectrum.tolist(),
            "bounds": None, "L": L, "S": S,
            "q_matrix": q.entries.tolist(),
        }
    elif args.theory_cmd == "cz":
        summary = theory.gen3_eigenvalues(args.eps1, args.eps2, args.eps3)
        L, S = theory.two_qubit_rates(args.eps1, args.eps2, args.eps3)
        out = {
            "eigenvalues": summary.full_spectrum.tolist(),
            "bounds": None, "L": L, "S": S,
            "q_matrix": theory.two_qubit_condensed_q(
                args.eps1, args.eps2, args.eps3).tolist(),
        }
    elif args.theory_cmd == "crosstalk-free":
        res = theory.crosstalk_free_rates(_parse_vector(args.p),
                                          _parse_vector(args.q))
        out = {"L": res["L"], "S": res["S"],
               "site_lambdas": res["site_lambdas"].tolist()}
        if "joint_lambdas" in res:
            out["joint_lambdas"] = res["joint_lambdas"].tolist()
    elif args.theory_cmd == "corollary1":
        L, S = theory.corollary1_estimates(args.lam, args.n, args.ratio)
        out = {"L": L, "S": S, "pbar": (1 - args.lam) / (args.n + 2 * args.ratio)}
    elif args.theory_cmd == "iswap-rates":
        L, S = theory.iswap_rates_from_lambdas(args.lam, args.lambda_p)
        out = {"L": L, "S": S}
    elif args.theory_cmd == "epsilon-hat":
        g = 2 * np.pi * args.g
        eta = 2 * np.pi * args.eta
        t = args.t_seconds if args.t_seconds is not None \
            else args.t_cycles * 2 * np.pi / args.g
        out = {
            "epsilon_hat": theory.hamiltonian_epsilon(g, eta, t),
            "epsilon_hat_max": theory.hamiltonian_epsilon_max(g, eta),
            "t_seconds": t,
        }
    else:  # pragma: no cover
        raise ConfigError(f"unknown theory subcommand {args.theory_cmd!r}")
    sys.stdout.write(_json_text(out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="leakbench",
        description="leakage benchmarking simulator and analysis toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    def add_run_args(p):
        p.add_argument("--config", help="TOML run config")
        p.add_argument("--preset", choices=sorted(presets.PRESETS),
                       help="built-in experiment preset")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out-dir", default="out")
        p.add_argument("--threads", type=int, default=None,
                       help="worker cap (or env LEAKBENCH_THREADS)")
        p.add_argument("--exact", action="store_true",
                       help="force exact expectation values per circuit")
        p.add_argument("--shots", type=int, default=None,
                       help="finite shots per circuit")
        p.add_argument("--reuse-prefixes", dest="reuse_prefixes",
                       action="store_true", default=None)
        p.add_argument("--no-reuse-prefixes", dest="reuse_prefixes",
                       action="store_false")
        p.add_argument("--order", default="1", choices=["1", "2", "auto"],
                       help="decay model order for the fit")
        p.add_argument("--ratio", type=float, default=1.0,
                       help="assumed seep/leak ratio for rate conversion")
        p.add_argument("--fit-model", default=None,
                       choices=["corollary1", "iswap", "cz",
                                "crosstalk_free", "none"])

    p_lrb = sub.add_parser("lrb", help="run a random-Pauli experiment")
    add_run_args(p_lrb)
    p_ilrb = sub.add_parser("ilrb", help="run an interleaved experiment")
    add_run_args(p_ilrb)
    p_ilrb.add_argument("--reference-only", action="store_true",
                        help="run only the reference (no target) half")

    p_fit = sub.add_parser("fit", help="fit an existing dataset CSV")
    p_fit.add_argument("--csv", required=True)
    p_fit.add_argument("--order", default="1", choices=["1", "2", "auto"])
    p_fit.add_argument("--model", default="none",
                       choices=["corollary1", "iswap", "cz",
                                "crosstalk_free", "none"])
    p_fit.add_argument("--n", type=int, default=None)
    p_fit.add_argument("--lambda-p", dest="lambda_p", type=float)
    p_fit.add_argument("--lambda-p-err", dest="lambda_p_err", type=float,
                       default=0.0)
    p_fit.add_argument("--ratio", type=float, default=1.0)
    p_fit.add_argument("--out", default=None)

    p_th = sub.add_parser("theory", help="closed-form queries")
    th_sub = p_th.add_subparsers(dest="theory_cmd", required=True)
    t = th_sub.add_parser("single-site")
    t.add_argument("--p", required=True, help="comma-separated leak rates")
    t.add_argument("--q", required=True, help="comma-separated seep rates")
    t = th_sub.add_parser("ilrb")
    t.add_argument("--pbar", type=float, required=True)
    t.add_argument("--eps", type=float, required=True)
    t.add_argument("--n", type=int, required=True)
    t = th_sub.add_parser("cz")
    t.add_argument("--eps1", type=float, required=True)
    t.add_argument("--eps2", type=float, required=True)
    t.add_argument("--eps3", type=float, default=0.0)
    t = th_sub.add_parser("crosstalk-free")
    t.add_argument("--p", required=True)
    t.add_argument("--q", required=True)
    t = th_sub.add_parser("corollary1")
    t.add_argument("--lam", type=float, required=True)
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--ratio", type=float, default=1.0)
    t = th_sub.add_parser("iswap-rates")
    t.add_argument("--lam", type=float, required=True)
    t.add_argument("--lambda-p", dest="lambda_p", type=float, required=True)
    t = th_sub.add_parser("epsilon-hat")
    t.add_argument("--g", type=float, required=True,
                   help="coupling frequency in Hz (angular factor applied)")
    t.add_argument("--eta", type=float, required=True,
                   help="anharmonicity frequency in Hz")
    t.add_argument("--t-cycles", dest="t_cycles", type=float, default=1.0,
                   help="evolution time in units of 2*pi/g")
    t.add_argument("--t-seconds", dest="t_seconds", type=float, default=None)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.cmd == "lrb":
            return cmd_lrb(args)
        if args.cmd == "ilrb":
            return cmd_ilrb(args)
        if args.cmd == "fit":
            return cmd_fit(args)
        if args.cmd == "theory":
            return cmd_theory(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
