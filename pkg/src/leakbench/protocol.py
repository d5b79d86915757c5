"""Benchmarking experiment engines: sequence sampling and state evolution.

Two experiment families are implemented.  The plain run applies sequences
of uniformly random Pauli strings (each one carrying the gate noise) to a
noisy initial state and records the probability that every recorded trit
stays computational.  The interleaved run inserts a fixed noisy target
gate before every Pauli.  Both come in

* exact mode — every sampled circuit is evaluated as an exact quantum
  expectation, the per-length spread being circuit-to-circuit only;
* shot mode — each circuit's outcome is additionally sampled a finite
  number of times through the per-site readout confusion.

A separate analytic path (:func:`exact_survival_curve`) evaluates the
infinite-circuit average from the condensed transition matrix without any
sampling.

Randomness is organized as one independent substream per (kind, length
index, circuit index), derived from the experiment seed, so datasets are
bitwise reproducible for a fixed seed no matter how work is scheduled.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import gates, noise, qspace, spam
from .noise import KrausChannel, apply_channel
from .qspace import SubspaceLabel

__all__ = [
    "ExperimentConfig",
    "SurvivalPoint",
    "SurvivalDataset",
    "sample_pauli_sequence",
    "run_lrb",
    "run_ilrb",
    "exact_survival_curve",
    "default_lengths",
]

# substream domains (first spawn-key entry)
_DOM_LRB = 0
_DOM_ILRB_INTERLEAVED = 1
_DOM_ILRB_REFERENCE = 2
_DOM_SHOTS = 3

_CHUNK = 4096  # steps of Pauli labels generated at a time


# ---------------------------------------------------------------------------
# configuration and dataset containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that defines one benchmarking run.

    ``pauli_noise`` is the noise attached to every Pauli gate;
    ``target_noise`` the noise of the interleaved target (interleaved mode
    only).  Noise fields hold spec objects from :mod:`leakbench.noise`
    (or None for noiseless).  ``shots`` is "exact" or a positive shot
    count per circuit.
    """

    n: int
    lengths: tuple
    circuits_per_length: int
    seed: int
    mode: str = "lrb"
    shots: object = "exact"
    target: str | None = None
    pauli_noise: object = None
    target_noise: object = None
    prep: spam.PrepSpec = field(default_factory=spam.PrepSpec)
    confusions: tuple = ()
    reuse_prefixes: bool = False

    def __post_init__(self):
        lengths = tuple(int(m) for m in self.lengths)
        if not lengths or any(m < 1 for m in lengths):
            raise ValueError("lengths must be positive")
        if list(lengths) != sorted(set(lengths)):
            raise ValueError("lengths must be strictly increasing")
        object.__setattr__(self, "lengths", lengths)
        if self.mode not in ("lrb", "ilrb"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "ilrb" and not self.target:
            raise ValueError("interleaved mode requires a target gate")
        if self.circuits_per_length < 1:
            raise ValueError("need at least one circuit per length")
        if self.shots != "exact":
            if int(self.shots) < 1:
                raise ValueError('shots must be "exact" or a positive count')
            object.__setattr__(self, "shots", int(self.shots))
        confs = tuple(self.confusions) if self.confusions else tuple(
            spam.MeasConfusion() for _ in range(self.n))
        if len(confs) != self.n:
            raise ValueError("need one confusion matrix per site")
        object.__setattr__(self, "confusions", confs)

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.describe(), sort_keys=True).encode()).hexdigest()

    def describe(self) -> dict:
        """JSON-friendly echo of the configuration."""
        def spec_dict(s):
            if s is None:
                return None
            if isinstance(s, noise.SimplifiedSpec):
                return {"kind": "simplified", "n": s.n, "p": s.p,
                        "u0": str(s.u0), "u": [str(u) for u in s.u]}
            if isinstance(s, noise.SingleSiteLeakageSpec):
                return {"kind": "single_site", "n": s.n,
                        "transitions": sorted(
                            [str(k), str(k2), p]
                            for (k, k2), p in s.transitions.items())}
            if isinstance(s, noise.TwoQubitLeakSpec):
                return {"kind": "two_qubit", "eps1": s.eps1, "eps2": s.eps2,
                        "eps3": s.eps3}
            raise TypeError(f"unknown noise spec {type(s).__name__}")

        return {
            "schema": 1,
            "mode": self.mode,
            "n": self.n,
            "lengths": list(self.lengths),
            "circuits_per_length": self.circuits_per_length,
            "shots": self.shots,
            "seed": self.seed,
            "target": self.target,
            "reuse_prefixes": self.reuse_prefixes,
            "pauli_noise": spec_dict(self.pauli_noise),
            "noise": spec_dict(self.target_noise),
            "spam": {
                "prep": {"p_c": self.prep.p_c, "p_l": self.prep.p_l,
                         "ideal": str(self.prep.ideal) if self.prep.ideal
                         else "0" * self.n},
                "measurement": [c.matrix.tolist() for c in self.confusions],
            },
        }


@dataclass(frozen=True)
class SurvivalPoint:
    m: int
    p: float
    stderr: float
    circuits: int
    shots: object


@dataclass
class SurvivalDataset:
    """Survival-probability estimates per sequence length."""

    points: list
    mode: str
    config_hash: str
    label: str = ""

    def ms(self) -> np.ndarray:
        return np.array([pt.m for pt in self.points])

    def ps(self) -> np.ndarray:
        return np.array([pt.p for pt in self.points])

    def stderrs(self) -> np.ndarray:
        return np.array([pt.stderr for pt in self.points])

    def to_csv_text(self) -> str:
        lines = ["m,p,stderr,circuits,shots"]
        for pt in self.points:
            lines.append(f"{pt.m},{pt.p!r},{pt.stderr!r},{pt.circuits},{pt.shots}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv_text(cls, text: str, mode: str = "",
                      config_hash: str = "") -> "SurvivalDataset":
        lines = [ln for ln in text.strip().splitlines() if ln]
        if not lines or lines[0].split(",")[:3] != ["m", "p", "stderr"]:
            raise ValueError("not a survival dataset CSV")
        pts = []
        for ln in lines[1:]:
            m, p, se, circ, shots = ln.split(",")
            pts.append(SurvivalPoint(
                m=int(m), p=float(p), stderr=float(se), circuits=int(circ),
                shots="exact" if shots == "exact" else int(shots)))
        return cls(points=pts, mode=mode, config_hash=config_hash)

    def to_json_obj(self) -> dict:
        return {
            "mode": self.mode,
            "label": self.label,
            "config_hash": self.config_hash,
            "points": [asdict(pt) for pt in self.points],
        }


def default_lengths(lambda_theory: float | None = None,
                    points: int = 12, max_length: int | None = None) -> tuple:
    """Geometric length schedule.

    Spans [1, 3/(1-lambda)] when a theory exponent is known, otherwise
    [1, 1e5]; duplicates after rounding are dropped.
    """
    if max_length is None:
        if lambda_theory is not None and lambda_theory < 1.0:
            max_length = int(np.ceil(3.0 / (1.0 - lambda_theory)))
        else:
            max_length = 100_000
    max_length = max(max_length, points)
    grid = np.unique(np.round(np.geomspace(1, max_length, points)).astype(int))
    return tuple(int(m) for m in grid)


# ---------------------------------------------------------------------------
# Pauli sequence sampling
# ---------------------------------------------------------------------------

def _circuit_rng(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.PCG64(ss))


def sample_pauli_sequence(rng: np.random.Generator, m: int, n: int) -> list:
    """m Pauli strings drawn uniformly i.i.d. from the 4^n unsigned labels."""
    if m < 1:
        raise ValueError("sequence length must be >= 1")
    idx = rng.integers(0, 4 ** n, size=m)
    return [gates.pauli_label_from_index(int(i), n) for i in idx]


# ---------------------------------------------------------------------------
# channel assembly from a config
# ---------------------------------------------------------------------------

def _build_noise_channel(spec, n: int) -> KrausChannel | None:
    if spec is None:
        return None
    if isinstance(spec, noise.SimplifiedSpec):
        ch = noise.build_simplified_channel(spec)
    elif isinstance(spec, noise.SingleSiteLeakageSpec):
        ch = noise.build_single_site_channel(spec)
    elif isinstance(spec, noise.TwoQubitLeakSpec):
        ch = noise.build_two_qubit_channel(spec)
    else:
        raise TypeError(f"unknown noise spec {type(spec).__name__}")
    if ch.n != n:
        raise ValueError(f"noise acts on {ch.n} sites, config has {n}")
    return ch


@dataclass
class _Engine:
    """Prepared operators for one run."""

    n: int
    rho0_diag: np.ndarray        # initial state diagonal (always diagonal)
    eff_diag: np.ndarray         # measurement effect diagonal
    step_map: np.ndarray | None  # d x d stochastic map of one step (fast path)
    perms: np.ndarray | None     # 2^n x d permutation table by swap mask
    mask_of_label: np.ndarray | None   # 4^n -> swap mask
    dense_ops: list | None       # Kraus ops of one step (dense fallback)

    @property
    def dim(self) -> int:
        return len(self.rho0_diag)


def _diag_stochastic_map(ch: KrausChannel | None, d: int) -> np.ndarray | None:
    """Population transfer matrix of a channel on diagonal states.

    Exists (i.e. the channel maps diagonal states to diagonal states) iff
    every column of every Kraus operator has at most one nonzero entry;
    all damping channels here and all generalized-permutation unitaries
    qualify.
    """
    if ch is None:
        return np.eye(d)
    T = np.zeros((d, d))
    for E in ch.kraus_ops:
        if (np.count_nonzero(np.abs(E) > 0, axis=0) > 1).any():
            return None
        T += np.abs(E) ** 2
    return T


def _swap_permutations(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Permutation table for diagonal Pauli action.

    On populations, X and Y swap digits 0 and 1 of their site while I and
    Z do nothing, so only the per-site swap mask matters; the table has
    one row of basis-index permutations per mask.
    """
    d = 3 ** n
    digits = np.array([list(ts) for ts in qspace.trit_strings(n)])
    place = 3 ** np.arange(n - 1, -1, -1)
    perms = np.zeros((2 ** n, d), dtype=np.intp)
    for mask in range(2 ** n):
        dg = digits.copy()
        for site in range(n):
            if (mask >> (n - 1 - site)) & 1:
                sel = dg[:, site] < 2
                dg[sel, site] = 1 - dg[sel, site]
        perms[mask] = dg @ place
    # label -> mask: X (1) and Y (2) swap, I (0) and Z (3) do not
    masks = np.zeros(4 ** n, dtype=np.intp)
    for lab in range(4 ** n):
        v, mask = lab, 0
        for site in range(n - 1, -1, -1):
            c = v % 4
            v //= 4
            if c in (1, 2):
                mask |= 1 << (n - 1 - site)
        masks[lab] = mask
    return perms, masks


def _prepare_engine(config: ExperimentConfig) -> _Engine:
    n = config.n
    d = 3 ** n
    rho0 = spam.noisy_initial_state(config.prep, n)
    eff = spam.computational_effect(config.confusions)
    pauli_ch = _build_noise_channel(config.pauli_noise, n)

    target_U = None
    target_ch = None
    if config.mode == "ilrb":
        target_U = gates.gate_by_name(config.target, n).unitary
        target_ch = _build_noise_channel(config.target_noise, n)

    # fast path: everything must preserve diagonal states
    T_p = _diag_stochastic_map(pauli_ch, d)
    step = None
    if T_p is not None:
        if config.mode == "lrb":
            step = T_p
        else:
            T_t = _diag_stochastic_map(target_ch, d)
            absU = np.abs(target_U) ** 2
            is_perm = (np.count_nonzero(absU > 1e-14, axis=0) == 1).all()
            if T_t is not None and is_perm:
                step = T_p @ absU @ T_t

    dense_ops = None
    if step is None:
        ops = [np.eye(d, dtype=complex)] if pauli_ch is None \
            else list(pauli_ch.kraus_ops)
        if config.mode == "ilrb":
            pre = [np.eye(d, dtype=complex)] if target_ch is None \
                else list(target_ch.kraus_ops)
            ops = [A @ target_U @ B for A in ops for B in pre]
        dense_ops = ops

    perms, masks = _swap_permutations(n)
    return _Engine(n=n, rho0_diag=np.real(np.diagonal(rho0)).copy(),
                   eff_diag=np.real(np.diagonal(eff)).copy(),
                   step_map=step, perms=perms, mask_of_label=masks,
                   dense_ops=dense_ops)


# ---------------------------------------------------------------------------
# evolution
# ---------------------------------------------------------------------------

def _evolve_batch_diag(engine: _Engine, config: ExperimentConfig,
                       domain: int, m_index: int, m: int) -> np.ndarray:
    """Final populations of all circuits of one length (fast path).

    States are population vectors; one step is the stochastic noise map
    followed by the per-circuit Pauli swap permutation.  Returns a
    (dim x circuits) array.
    """
    C = config.circuits_per_length
    rngs = [_circuit_rng(config.seed, domain, m_index, c) for c in range(C)]
    V = np.tile(engine.rho0_diag[:, None], (1, C))
    cols = np.arange(C)
    done = 0
    while done < m:
        k = min(_CHUNK, m - done)
        labels = np.stack([r.integers(0, 4 ** engine.n, size=k) for r in rngs])
        for s in range(k):
            V = engine.step_map @ V
            masks = engine.mask_of_label[labels[:, s]]
            V = V[engine.perms[masks].T, cols[None, :]]
        done += k
    return V


def _final_populations_dense(engine, config, domain, m_index, circuit, m):
    """One circuit's final populations via dense density-matrix evolution.

    Fallback for ingredients that do not preserve diagonal states (e.g. a
    SQiSW target); exact but much slower than the population fast path.
    """
    rng = _circuit_rng(config.seed, domain, m_index, circuit)
    labels = rng.integers(0, 4 ** engine.n, size=m)
    rho = np.diag(engine.rho0_diag.astype(complex))
    for lab in labels:
        out = np.zeros_like(rho)
        for E in engine.dense_ops:
            out += E @ rho @ E.conj().T
        U = qspace.embedded_pauli_matrix(
            gates.pauli_label_from_index(int(lab), engine.n))
        rho = U @ out @ U.conj().T
    return np.real(np.diagonal(rho)).copy()


def _evolve_batch_diag_reuse(engine: _Engine, config: ExperimentConfig,
                             domain: int) -> dict:
    """Fast-path evolution reusing circuit prefixes across lengths.

    Each circuit keeps one label stream (substream key (domain, 0, c));
    population snapshots are taken when the step count crosses each
    requested length, so point expectations match the independent run.
    """
    C = config.circuits_per_length
    rngs = [_circuit_rng(config.seed, domain, 0, c) for c in range(C)]
    V = np.tile(engine.rho0_diag[:, None], (1, C))
    cols = np.arange(C)
    out = {}
    done = 0
    for m in config.lengths:
        while done < m:
            k = min(_CHUNK, m - done)
            labels = np.stack([r.integers(0, 4 ** engine.n, size=k)
                               for r in rngs])
            for s in range(k):
                V = engine.step_map @ V
                masks = engine.mask_of_label[labels[:, s]]
                V = V[engine.perms[masks].T, cols[None, :]]
            done += k
        out[m] = V.copy()
    return out


def _shot_sample(engine: _Engine, config: ExperimentConfig, domain: int,
                 m_index: int, populations: np.ndarray) -> np.ndarray:
    """Per-circuit survival estimates from finite shots.

    For each shot the true trit string is drawn from the final
    populations; the probability that all recorded trits stay in {0,1}
    given that string is the effect diagonal at that string, so the
    recorded success is one Bernoulli draw at that probability.
    """
    C = populations.shape[1]
    shots = config.shots
    out = np.empty(C)
    for c in range(C):
        rng = _circuit_rng(config.seed, _DOM_SHOTS, domain, m_index, c)
        pops = np.clip(populations[:, c], 0.0, None)
        pops = pops / pops.sum()
        states = rng.choice(len(pops), size=shots, p=pops)
        success = rng.random(shots) < engine.eff_diag[states]
        out[c] = success.mean()
    return out


def _point_from_values(m: int, vals: np.ndarray, config: ExperimentConfig) -> SurvivalPoint:
    C = len(vals)
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / np.sqrt(C)) if C > 1 else 0.0
    return SurvivalPoint(m=m, p=mean, stderr=stderr, circuits=C,
                         shots=config.shots)


def _run_domain(config: ExperimentConfig, domain: int, label: str,
                threads: int = 1) -> SurvivalDataset:
    engine = _prepare_engine(config)
    exact = config.shots == "exact"
    points: dict[int, SurvivalPoint] = {}

    if engine.step_map is not None and config.reuse_prefixes:
        pops_by_m = _evolve_batch_diag_reuse(engine, config, domain)
        for m_index, m in enumerate(config.lengths):
            V = pops_by_m[m]
            vals = engine.eff_diag @ V if exact else \
                _shot_sample(engine, config, domain, m_index, V)
            points[m] = _point_from_values(m, vals, config)
    else:
        def one_length(item):
            m_index, m = item
            if engine.step_map is not None:
                V = _evolve_batch_diag(engine, config, domain, m_index, m)
                vals = engine.eff_diag @ V if exact else \
                    _shot_sample(engine, config, domain, m_index, V)
            else:
                C = config.circuits_per_length
                V = np.stack([
                    _final_populations_dense(engine, config, domain,
                                             m_index, c, m)
                    for c in range(C)], axis=1)
                vals = engine.eff_diag @ V if exact else \
                    _shot_sample(engine, config, domain, m_index, V)
            return m, _point_from_values(m, vals, config)

        items = list(enumerate(config.lengths))
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                for m, pt in pool.map(one_length, items):
                    points[m] = pt
        else:
            for item in items:
                m, pt = one_length(item)
                points[m] = pt

    ordered = [points[m] for m in config.lengths]
    return SurvivalDataset(points=ordered, mode=config.mode,
                           config_hash=config.config_hash(), label=label)


def run_lrb(config: ExperimentConfig, threads: int = 1) -> SurvivalDataset:
    """Random-Pauli benchmarking run; returns one survival dataset."""
    if config.mode != "lrb":
        raise ValueError("config mode must be 'lrb'")
    return _run_domain(config, _DOM_LRB, "lrb", threads=threads)


def run_ilrb(config: ExperimentConfig, threads: int = 1,
             reference_only: bool = False):
    """Interleaved run: (interleaved dataset, reference dataset).

    The reference run repeats the experiment without the target gate; the
    two runs use disjoint random substreams of the same seed.  With
    ``reference_only`` the interleaved half is skipped and None returned
    in its place.
    """
    if config.mode != "ilrb":
        raise ValueError("config mode must be 'ilrb'")
    ref_cfg = ExperimentConfig(
        n=config.n, lengths=config.lengths,
        circuits_per_length=config.circuits_per_length, seed=config.seed,
        mode="lrb", shots=config.shots, pauli_noise=config.pauli_noise,
        prep=config.prep, confusions=config.confusions,
        reuse_prefixes=config.reuse_prefixes)
    reference = _run_domain(ref_cfg, _DOM_ILRB_REFERENCE, "reference",
                            threads=threads)
    if reference_only:
        return None, reference
    interleaved = _run_domain(config, _DOM_ILRB_INTERLEAVED, "interleaved",
                              threads=threads)
    return interleaved, reference


# ---------------------------------------------------------------------------
# analytic curve
# ---------------------------------------------------------------------------

def exact_survival_curve(config: ExperimentConfig) -> SurvivalDataset:
    """Infinite-circuit survival curve from the condensed transition matrix.

    The curve is v . Q^(m-1) . w where Q is the condensed matrix of one
    full noise step (for interleaved runs: target noise, ideal target,
    Pauli noise composed), w the subspace weights of that step applied to
    the noisy initial state, and v the effect weights.  Zero stderr.
    """
    n = config.n
    rho0 = spam.noisy_initial_state(config.prep, n)
    eff = spam.computational_effect(config.confusions)
    pauli_ch = _build_noise_channel(config.pauli_noise, n) or noise.identity_channel(n)

    if config.mode == "ilrb":
        target = gates.gate_by_name(config.target, n)
        t_noise = _build_noise_channel(config.target_noise, n) \
            or noise.identity_channel(n)
        noisy_target = gates.noisy_gate(target, t_noise, side="right")
        step = noise.compose_channels(pauli_ch, noisy_target)
    else:
        step = pauli_ch

    Q = qspace.condensed_rep(step).entries
    w = qspace.state_coords(apply_channel(step, rho0))
    v = qspace.effect_coords(eff)

    pts = []
    for m in config.lengths:
        val = float(v @ np.linalg.matrix_power(Q, m - 1) @ w)
        pts.append(SurvivalPoint(m=int(m), p=val, stderr=0.0, circuits=0,
                                 shots="exact"))
    return SurvivalDataset(points=pts, mode=config.mode,
                           config_hash=config.config_hash(),
                           label="analytic")
