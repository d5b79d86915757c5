"""Leakage damping noise channels and their leakage/seepage rates.

The channels built here exchange population between specific basis states
of the computational subspace and the single-site leakage subspaces, in
the style of amplitude damping.  Three families are covered:

* the general single-site leakage damping channel, parameterized by a map
  of per-pair transition probabilities restricted to the allowed pair set;
* its "simplified" special case with one common probability between a
  single computational anchor state and one leaked state per site;
* two-qubit gate noise with independent |02> <-> |11> and |20> <-> |11>
  damping (plus an optional in-leakage |12> <-> |21> flip), covering the
  iSWAP/SQiSW model (equal strengths) and the CZ model (unequal).

All constructors return Kraus channels whose completeness sum is diagonal,
so the residual operator E0 is an exact elementwise square root.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qspace
from .qspace import SubspaceLabel, TritString

__all__ = [
    "KrausChannel",
    "CptpReport",
    "SingleSiteLeakageSpec",
    "SimplifiedSpec",
    "TwoQubitLeakSpec",
    "identity_channel",
    "build_single_site_channel",
    "build_simplified_channel",
    "build_two_qubit_channel",
    "iswap_spec",
    "validate_cptp",
    "direct_rates",
    "apply_channel",
    "compose_channels",
]

CPTP_TOL = 1e-10
_NEG_CLAMP = -1e-12  # float dust below zero on the E0 diagonal is clamped


def _as_trits(x) -> TritString:
    if isinstance(x, TritString):
        return x
    if isinstance(x, str):
        return TritString.from_str(x)
    return TritString(x)


@dataclass(frozen=True)
class KrausChannel:
    """A CPTP map as a finite list of Kraus operators on the full space."""

    kraus_ops: tuple
    dim: int

    def __post_init__(self):
        ops = tuple(np.asarray(E, dtype=complex) for E in self.kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        for E in ops:
            if E.shape != (self.dim, self.dim):
                raise ValueError(
                    f"Kraus operator shape {E.shape} != ({self.dim}, {self.dim})")
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def n(self) -> int:
        n = round(np.log(self.dim) / np.log(3))
        if 3 ** n != self.dim:
            raise ValueError(f"dimension {self.dim} is not a power of 3")
        return n

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply_channel(self, rho)


@dataclass(frozen=True)
class CptpReport:
    deviation: float
    passed: bool
    tol: float = CPTP_TOL


def identity_channel(n: int) -> KrausChannel:
    return KrausChannel(kraus_ops=(np.eye(3 ** n, dtype=complex),), dim=3 ** n)


def apply_channel(channel, rho: np.ndarray) -> np.ndarray:
    """sum_i E_i rho E_i^dag."""
    out = np.zeros_like(rho, dtype=complex)
    for E in channel.kraus_ops:
        out += E @ rho @ E.conj().T
    return out


def compose_channels(after: KrausChannel, before: KrausChannel) -> KrausChannel:
    """Channel applying ``before`` first, then ``after`` (Kraus products)."""
    if after.dim != before.dim:
        raise ValueError("channel dimensions differ")
    ops = tuple(A @ B for A in after.kraus_ops for B in before.kraus_ops)
    return KrausChannel(kraus_ops=ops, dim=after.dim)


def validate_cptp(channel) -> CptpReport:
    """Report the max deviation of sum E^dag E from the identity."""
    d = channel.dim if hasattr(channel, "dim") else channel.kraus_ops[0].shape[0]
    acc = np.zeros((d, d), dtype=complex)
    for E in channel.kraus_ops:
        acc += E.conj().T @ E
    dev = float(np.abs(acc - np.eye(d)).max())
    return CptpReport(deviation=dev, passed=dev <= CPTP_TOL)


# ---------------------------------------------------------------------------
# single-site leakage damping (the general family)
# ---------------------------------------------------------------------------

def _classify(ts: TritString):
    """Return ('comp', None) or ('single', site) or ('multi', sites)."""
    leaked = ts.leaked_sites
    if not leaked:
        return "comp", None
    if len(leaked) == 1:
        return "single", leaked[0]
    return "multi", leaked


def _pair_allowed(k: TritString, k2: TritString) -> bool:
    """Membership in the allowed pair set W.

    Allowed: computational <-> single-leak (either direction), flips inside
    one B_i (same leaked site), and flips inside the computational basis.
    """
    ck, sk = _classify(k)
    ck2, sk2 = _classify(k2)
    if ck == "multi" or ck2 == "multi":
        return False
    if ck == "single" and ck2 == "single":
        return sk == sk2
    return True  # comp->single, single->comp, comp->comp


@dataclass(frozen=True)
class SingleSiteLeakageSpec:
    """Transition map of a single-site leakage damping channel.

    ``transitions[(k, k')] = p`` is the probability of the basis flip
    |k> -> |k'>.  Keys must lie in the allowed pair set (see
    :func:`_pair_allowed`); directions may be asymmetric (an absent
    reverse direction means probability zero).
    """

    n: int
    transitions: dict = field(default_factory=dict)

    def __post_init__(self):
        norm = {}
        for (k, k2), p in self.transitions.items():
            k, k2 = _as_trits(k), _as_trits(k2)
            if k.n != self.n or k2.n != self.n:
                raise ValueError(f"pair ({k}, {k2}) does not match n={self.n}")
            if k == k2:
                raise ValueError(f"self-pair ({k}, {k}) is not a transition")
            if not _pair_allowed(k, k2):
                raise ValueError(f"pair ({k}, {k2}) lies outside the allowed set")
            p = float(p)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} for ({k}, {k2}) out of [0,1]")
            norm[(k, k2)] = p
        object.__setattr__(self, "transitions", norm)
        out_sum, in_sum = {}, {}
        for (k, k2), p in norm.items():
            out_sum[k] = out_sum.get(k, 0.0) + p
            in_sum[k2] = in_sum.get(k2, 0.0) + p
        for name, sums in (("outgoing", out_sum), ("incoming", in_sum)):
            bad = {str(k): s for k, s in sums.items() if s > 1.0 + 1e-12}
            if bad:
                raise ValueError(f"{name} probabilities exceed 1: {bad}")

    def rates_pq(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-site averaged leak and seep rates (p_i, q_i).

        p_i averages the computational -> B_i probabilities over the 2^n
        computational states; q_i the reverse direction.
        """
        p = np.zeros(self.n)
        q = np.zeros(self.n)
        scale = 1.0 / 2 ** self.n
        for (k, k2), prob in self.transitions.items():
            ck, _ = _classify(k)
            ck2, site2 = _classify(k2)
            if ck == "comp" and ck2 == "single":
                p[site2 - 1] += prob * scale
            elif ck == "single" and ck2 == "comp":
                _, site1 = _classify(k)
                q[site1 - 1] += prob * scale
        return p, q


def build_single_site_channel(spec: SingleSiteLeakageSpec) -> KrausChannel:
    """Kraus channel {E0} + {sqrt(p) |k'><k|} from a transition map."""
    d = 3 ** spec.n
    ops = []
    outgoing = np.zeros(d)
    for (k, k2), p in spec.transitions.items():
        if p == 0.0:
            continue
        E = np.zeros((d, d), dtype=complex)
        E[k2.index, k.index] = np.sqrt(p)
        ops.append(E)
        outgoing[k.index] += p
    resid = 1.0 - outgoing
    if resid.min() < _NEG_CLAMP:
        raise ValueError(
            f"transition probabilities oversubscribe a basis state "
            f"(residual {resid.min():.3e})")
    e0 = np.sqrt(np.clip(resid, 0.0, None))
    return KrausChannel(kraus_ops=tuple([np.diag(e0.astype(complex))] + ops),
                        dim=d)


# ---------------------------------------------------------------------------
# simplified single-site leakage damping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimplifiedSpec:
    """One common damping probability p between |u0> and one |u_i> per site.

    ``u0`` is a computational basis state; ``u[i-1]`` carries digit 2 at
    site i and computational digits elsewhere.  The averaged per-site rate
    is ``pbar = p / 2**n``.
    """

    n: int
    p: float
    u0: TritString
    u: tuple

    def __post_init__(self):
        u0 = _as_trits(self.u0)
        us = tuple(_as_trits(x) for x in self.u)
        object.__setattr__(self, "u0", u0)
        object.__setattr__(self, "u", us)
        if u0.n != self.n or not u0.is_computational():
            raise ValueError(f"u0={u0} must be a computational {self.n}-site string")
        if len(us) != self.n:
            raise ValueError(f"need one leaked state per site, got {len(us)}")
        for i, ui in enumerate(us, start=1):
            if ui.n != self.n or ui.leaked_sites != (i,):
                raise ValueError(f"u[{i}]={ui} must have digit 2 exactly at site {i}")
        if not 0.0 <= self.n * self.p <= 1.0:
            raise ValueError(f"need 0 <= n*p <= 1, got n*p={self.n * self.p}")

    @classmethod
    def from_pbar(cls, n: int, pbar: float, u0, u) -> "SimplifiedSpec":
        return cls(n=n, p=pbar * 2 ** n, u0=u0, u=tuple(u))

    @property
    def pbar(self) -> float:
        return self.p / 2 ** self.n

    def as_single_site(self) -> SingleSiteLeakageSpec:
        """The equivalent general transition map."""
        trans = {}
        for ui in self.u:
            trans[(self.u0, ui)] = self.p
            trans[(ui, self.u0)] = self.p
        return SingleSiteLeakageSpec(n=self.n, transitions=trans)


def build_simplified_channel(spec: SimplifiedSpec) -> KrausChannel:
    """Kraus list {E0, E_{0i}, E_{i0}} of the simplified damping channel."""
    d = 3 ** spec.n
    e0 = np.ones(d)
    e0[spec.u0.index] = np.sqrt(1.0 - spec.n * spec.p)
    for ui in spec.u:
        e0[ui.index] = np.sqrt(1.0 - spec.p)
    ops = [np.diag(e0.astype(complex))]
    root = np.sqrt(spec.p)
    for ui in spec.u:
        E = np.zeros((d, d), dtype=complex)
        E[ui.index, spec.u0.index] = root
        ops.append(E)
        E = np.zeros((d, d), dtype=complex)
        E[spec.u0.index, ui.index] = root
        ops.append(E)
    return KrausChannel(kraus_ops=tuple(ops), dim=d)


# ---------------------------------------------------------------------------
# two-qubit gate noise (iSWAP / SQiSW / CZ and the three-parameter model)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoQubitLeakSpec:
    """Damping strengths of the two-qubit leakage model.

    eps1 couples |02> <-> |11|, eps2 couples |20> <-> |11>, and eps3
    (optional) flips |12> <-> |21> inside the leakage subspace.  The iSWAP
    and SQiSW models are the special case eps1 == eps2, eps3 == 0.
    """

    eps1: float
    eps2: float
    eps3: float = 0.0

    def __post_init__(self):
        for name in ("eps1", "eps2", "eps3"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} out of [0,1]")
        if self.eps1 + self.eps2 > 1.0 + 1e-12:
            raise ValueError(
                f"eps1+eps2={self.eps1 + self.eps2} oversubscribes |11>")


def iswap_spec(eps: float) -> TwoQubitLeakSpec:
    return TwoQubitLeakSpec(eps1=eps, eps2=eps, eps3=0.0)


def build_two_qubit_channel(spec: TwoQubitLeakSpec) -> KrausChannel:
    """Damping channel on a two-site register per the two-qubit model."""
    n = 2
    d = 9
    s02 = qspace.trit_to_index((0, 2))
    s11 = qspace.trit_to_index((1, 1))
    s20 = qspace.trit_to_index((2, 0))
    s12 = qspace.trit_to_index((1, 2))
    s21 = qspace.trit_to_index((2, 1))
    e0 = np.ones(d)
    e0[s02] = np.sqrt(1.0 - spec.eps1)
    e0[s11] = np.sqrt(1.0 - spec.eps1 - spec.eps2)
    e0[s20] = np.sqrt(1.0 - spec.eps2)
    e0[s12] = np.sqrt(1.0 - spec.eps3)
    e0[s21] = np.sqrt(1.0 - spec.eps3)
    ops = [np.diag(e0.astype(complex))]

    def damp(src, dst, eps):
        if eps > 0.0:
            E = np.zeros((d, d), dtype=complex)
            E[dst, src] = np.sqrt(eps)
            ops.append(E)

    damp(s02, s11, spec.eps1)
    damp(s11, s02, spec.eps1)
    damp(s20, s11, spec.eps2)
    damp(s11, s20, spec.eps2)
    damp(s12, s21, spec.eps3)
    damp(s21, s12, spec.eps3)
    return KrausChannel(kraus_ops=tuple(ops), dim=3 ** n)


# ---------------------------------------------------------------------------
# rates
# ---------------------------------------------------------------------------

def direct_rates(channel) -> tuple[float, float]:
    """Average leakage and seepage rates evaluated straight from Kraus ops.

    L = tr( Pi_l Lambda(Pi_c / 2^n) ),  S = tr( Pi_c Lambda(Pi_l / (3^n-2^n)) ).
    """
    n = channel.n
    d = 3 ** n
    comp = qspace.subspace_mask(SubspaceLabel.all_computational(n))
    dc, dl = 2 ** n, d - 2 ** n
    rho_c = np.diag(comp.astype(complex)) / dc
    rho_l = np.diag((~comp).astype(complex)) / dl
    out_c = np.real(np.diagonal(apply_channel(channel, rho_c)))
    out_l = np.real(np.diagonal(apply_channel(channel, rho_l)))
    L = float(out_c[~comp].sum())
    S = float(out_l[comp].sum())
    return L, S
