"""Run-config files: a small TOML schema mapped onto ExperimentConfig.

The format is a flat table of run parameters plus nested tables for the
two noise channels and the SPAM model; ``schema = 1`` is required so the
format can evolve.  Parse errors and validation errors raise ConfigError
with the offending key; the command line maps those to exit code 2.
"""

from __future__ import annotations

import hashlib
import json

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - py3.10
    import tomli as tomllib

from . import noise, protocol, spam

__all__ = ["ConfigError", "load_config", "parse_config_dict"]


class ConfigError(ValueError):
    pass


def _require(table: dict, key: str, where: str = ""):
    if key not in table:
        raise ConfigError(f"missing key {key!r}" +
                          (f" in [{where}]" if where else ""))
    return table[key]


def _parse_noise(table, n: int, where: str):
    if table is None:
        return None
    kind = _require(table, "kind", where)
    if kind == "none":
        return None
    if kind == "simplified":
        u0 = _require(table, "u0", where)
        u = _require(table, "u", where)
        if "pbar" in table:
            return noise.SimplifiedSpec.from_pbar(n, float(table["pbar"]),
                                                  u0=u0, u=tuple(u))
        return noise.SimplifiedSpec(n=n, p=float(_require(table, "p", where)),
                                    u0=u0, u=tuple(u))
    if kind == "single_site":
        rows = _require(table, "transitions", where)
        trans = {}
        for row in rows:
            if len(row) != 3:
                raise ConfigError(
                    f"[{where}] transitions rows are [from, to, prob]")
            src, dst, p = row
            trans[(str(src), str(dst))] = float(p)
        return noise.SingleSiteLeakageSpec(n=n, transitions=trans)
    if kind == "two_qubit":
        return noise.TwoQubitLeakSpec(
            eps1=float(_require(table, "eps1", where)),
            eps2=float(_require(table, "eps2", where)),
            eps3=float(table.get("eps3", 0.0)))
    if kind == "iswap":
        eps = float(_require(table, "eps", where))
        return noise.TwoQubitLeakSpec(eps1=eps, eps2=eps)
    raise ConfigError(f"[{where}] unknown noise kind {kind!r}")


def _parse_confusion(table) -> spam.MeasConfusion:
    if "matrix" in table:
        return spam.MeasConfusion(matrix=table["matrix"])
    return spam.MeasConfusion.from_rates(
        eta0=float(table.get("eta0", 0.0)),
        eta1=float(table.get("eta1", 0.0)),
        eta_l0=float(table.get("eta_l0", 0.0)),
        eta_l1=float(table.get("eta_l1", 0.0)),
        eta_s0=float(table.get("eta_s0", 0.0)),
        eta_s1=float(table.get("eta_s1", 0.0)))


def parse_config_dict(data: dict) -> protocol.ExperimentConfig:
    """Validate a parsed TOML document and build the experiment config."""
    if data.get("schema") != 1:
        raise ConfigError("config must declare schema = 1")
    try:
        n = int(_require(data, "n"))
        mode = str(data.get("mode", "lrb"))
        seed = int(_require(data, "seed"))
        circuits = int(_require(data, "circuits_per_length"))
        shots = data.get("shots", "exact")
        if shots != "exact":
            shots = int(shots)
        if "lengths" in data:
            lengths = tuple(int(m) for m in data["lengths"])
        else:
            auto = data.get("lengths_auto", {})
            lengths = protocol.default_lengths(
                points=int(auto.get("points", 12)),
                max_length=int(auto["max"]) if "max" in auto else None)
        spam_tbl = data.get("spam", {})
        prep_tbl = spam_tbl.get("prep", {})
        prep = spam.PrepSpec(p_c=float(prep_tbl.get("p_c", 0.0)),
                             p_l=float(prep_tbl.get("p_l", 0.0)),
                             ideal=prep_tbl.get("ideal"))
        meas = spam_tbl.get("measurement")
        if meas is None:
            confusions = tuple(spam.MeasConfusion() for _ in range(n))
        elif isinstance(meas, list):
            confusions = tuple(_parse_confusion(t) for t in meas)
        else:
            confusions = tuple([_parse_confusion(meas)] * n)
        cfg = protocol.ExperimentConfig(
            n=n, lengths=lengths, circuits_per_length=circuits, seed=seed,
            mode=mode, shots=shots, target=data.get("target"),
            pauli_noise=_parse_noise(data.get("pauli_noise"), n,
                                     "pauli_noise"),
            target_noise=_parse_noise(data.get("noise"), n, "noise"),
            prep=prep, confusions=confusions,
            reuse_prefixes=bool(data.get("reuse_prefixes", False)))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path: str) -> protocol.ExperimentConfig:
    """Parse and validate a TOML config file."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config_dict(data)


def config_fingerprint(cfg: protocol.ExperimentConfig) -> str:
    return hashlib.sha256(
        json.dumps(cfg.describe(), sort_keys=True).encode()).hexdigest()
