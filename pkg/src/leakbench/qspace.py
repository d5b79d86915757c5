"""Operator algebra over registers of qutrits (qubit + one leakage level).

Every site carries a three-level Hilbert space with basis {|0>, |1>, |2>};
levels 0 and 1 span the computational subspace, level 2 is the leakage
level.  Basis states of an n-site register are trit strings, encoded as
integers in big-endian base 3 (site 1 is the leftmost, most significant
digit).  The 3^n-dimensional space splits into 2^n orthogonal subspaces,
one per "which sites are leaked" pattern; this module builds the
projectors onto those subspaces, the twirling projector that averages a
state over them, and the condensed (subspace-to-subspace) transition
matrix of a quantum channel.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TritString",
    "SubspaceLabel",
    "CondensedQ",
    "all_labels",
    "trit_strings",
    "trit_to_index",
    "index_to_trits",
    "basis_ket",
    "subspace_mask",
    "subspace_projector",
    "normalized_projector",
    "twirl_project",
    "pauli_average",
    "embedded_pauli_matrix",
    "condensed_rep",
    "compose_condensed",
    "state_coords",
    "effect_coords",
]

TOL_STOCHASTIC = 1e-10

# per-site 3x3 Paulis embedded as identity on the leakage level
_P3 = {
    "I": np.eye(3, dtype=complex),
    "X": np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=complex),
    "Y": np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 1]], dtype=complex),
    "Z": np.array([[1, 0, 0], [0, -1, 0], [0, 0, 1]], dtype=complex),
}


# ---------------------------------------------------------------------------
# trit strings and subspace labels
# ---------------------------------------------------------------------------

class TritString(tuple):
    """An n-site basis label; a tuple of digits in {0, 1, 2}.

    Site 1 is the leftmost digit; ``int(ts)`` under big-endian base-3
    encoding is the row/column index of the corresponding basis state.
    """

    def __new__(cls, digits):
        digits = tuple(int(d) for d in digits)
        if len(digits) == 0:
            raise ValueError("trit string must have at least one site")
        if any(d not in (0, 1, 2) for d in digits):
            raise ValueError(f"trit digits must lie in {{0,1,2}}: {digits}")
        return super().__new__(cls, digits)

    @classmethod
    def from_str(cls, s: str) -> "TritString":
        return cls(int(c) for c in s)

    @property
    def n(self) -> int:
        return len(self)

    @property
    def index(self) -> int:
        return trit_to_index(self)

    @property
    def leaked_sites(self) -> tuple:
        """1-based indices of sites carrying digit 2."""
        return tuple(k + 1 for k, d in enumerate(self) if d == 2)

    def is_computational(self) -> bool:
        return all(d < 2 for d in self)

    def __str__(self) -> str:
        return "".join(str(d) for d in self)


def trit_to_index(digits) -> int:
    i = 0
    for d in digits:
        i = 3 * i + int(d)
    return i


def index_to_trits(i: int, n: int) -> TritString:
    digits = []
    for _ in range(n):
        digits.append(i % 3)
        i //= 3
    return TritString(reversed(digits))


def trit_strings(n: int):
    """All 3^n trit strings in index order."""
    return [TritString(t) for t in itertools.product((0, 1, 2), repeat=n)]


def basis_ket(digits, n: int | None = None) -> np.ndarray:
    """Column vector |digits> in the full 3^n space."""
    ts = digits if isinstance(digits, TritString) else TritString(digits)
    if n is not None and ts.n != n:
        raise ValueError(f"trit string {ts} has {ts.n} sites, expected {n}")
    v = np.zeros(3 ** ts.n, dtype=complex)
    v[ts.index] = 1.0
    return v


class SubspaceLabel(tuple):
    """A leakage pattern, one symbol per site: 'c' (computational) or 'l'.

    The associated subspace is the span of all trit strings whose digit at
    a 'c' site lies in {0,1} and equals 2 at every 'l' site.
    """

    def __new__(cls, pattern):
        pattern = tuple(pattern)
        if len(pattern) == 0:
            raise ValueError("label must have at least one site")
        if any(s not in ("c", "l") for s in pattern):
            raise ValueError(f"label symbols must be 'c' or 'l': {pattern}")
        return super().__new__(cls, pattern)

    @classmethod
    def from_str(cls, s: str) -> "SubspaceLabel":
        return cls(s)

    @classmethod
    def all_computational(cls, n: int) -> "SubspaceLabel":
        return cls("c" * n)

    @classmethod
    def single_leak(cls, site: int, n: int) -> "SubspaceLabel":
        """Label with only the given (1-based) site leaked."""
        if not 1 <= site <= n:
            raise ValueError(f"site {site} out of range for n={n}")
        return cls("c" * (site - 1) + "l" + "c" * (n - site))

    @property
    def n(self) -> int:
        return len(self)

    @property
    def dim(self) -> int:
        """Dimension of the subspace: 2 per 'c' site, 1 per 'l' site."""
        return 2 ** sum(1 for s in self if s == "c")

    @property
    def leaked_sites(self) -> tuple:
        return tuple(k + 1 for k, s in enumerate(self) if s == "l")

    def __str__(self) -> str:
        return "".join(self)


def all_labels(n: int):
    """The 2^n subspace labels, all-computational first.

    Order is the lexicographic itertools product over ('c','l') per site,
    which places c^n at index 0; this fixed order indexes the rows and
    columns of every full-form condensed matrix.
    """
    return [SubspaceLabel(p) for p in itertools.product("cl", repeat=n)]


def _register_size(dim: int) -> int:
    n = round(np.log(dim) / np.log(3))
    if 3 ** n != dim:
        raise ValueError(f"operator dimension {dim} is not a power of 3")
    return n


def subspace_mask(label: SubspaceLabel) -> np.ndarray:
    """Boolean mask over basis indices selecting the labelled subspace."""
    n = label.n
    mask = np.ones(3 ** n, dtype=bool)
    for k, sym in enumerate(label):
        digits = np.array([ts[k] for ts in trit_strings(n)])
        mask &= (digits == 2) if sym == "l" else (digits < 2)
    return mask


def subspace_projector(label: SubspaceLabel) -> np.ndarray:
    """Diagonal projector onto the subspace of the given leakage pattern."""
    return np.diag(subspace_mask(label).astype(complex))


def normalized_projector(label: SubspaceLabel) -> np.ndarray:
    """Trace-normalized projector (the projector divided by its trace)."""
    return subspace_projector(label) / label.dim


# ---------------------------------------------------------------------------
# twirling
# ---------------------------------------------------------------------------

def twirl_project(rho: np.ndarray) -> np.ndarray:
    """Project an operator onto the span of the subspace projectors.

    Returns sum_i tr(Pi_i rho) Pi_i / dim_i.  The output is diagonal and
    constant within each subspace; the map is idempotent and preserves the
    trace.  Realized directly from the diagonal (off-diagonal elements
    never contribute to tr(Pi_i rho) since the projectors are diagonal).
    """
    d = rho.shape[0]
    if rho.shape != (d, d):
        raise ValueError(f"expected a square operator, got shape {rho.shape}")
    n = _register_size(d)
    out = np.zeros(d, dtype=complex)
    diag = np.diagonal(rho)
    for label in all_labels(n):
        mask = subspace_mask(label)
        out[mask] = diag[mask].sum() / label.dim
    return np.diag(out)


def embedded_pauli_matrix(label: str) -> np.ndarray:
    """Unitary of a Pauli string, each site embedded as [[P, 0], [0, 1]].

    ``label`` is a string over {I, X, Y, Z}, one character per site.
    """
    label = label.upper()
    if not label or any(c not in _P3 for c in label):
        raise ValueError(f"invalid Pauli label {label!r}")
    U = _P3[label[0]]
    for c in label[1:]:
        U = np.kron(U, _P3[c])
    return U


def pauli_average(rho: np.ndarray, n: int) -> np.ndarray:
    """Average of P rho P^dag over the phased per-site Pauli group.

    Brute-force oracle for the twirling projector.  The per-site phases
    +-{1, i} are NOT global once a Pauli is embedded as [[phase*P, 0],
    [0, 1]], so they must be enumerated: they are exactly what cancels
    the coherences between different leakage subspaces.  (On diagonal
    states the 4^n unsigned labels would suffice, which is why protocol
    sampling uses them, but the oracle must hold on arbitrary operators.)
    Cost 16^n conjugations; intended for n <= 3.
    """
    d = 3 ** n
    if rho.shape != (d, d):
        raise ValueError(f"operator shape {rho.shape} does not match n={n}")
    if n > 3:
        raise ValueError("pauli_average is an oracle for small registers")
    site_ops = []
    for c in "IXYZ":
        P = _P3[c].copy()
        for phase in (1.0, 1j, -1.0, -1j):
            op = P.copy()
            op[:2, :2] *= phase  # phase on the embedded 2x2 block only
            site_ops.append(op)
    acc = np.zeros((d, d), dtype=complex)
    for combo in itertools.product(site_ops, repeat=n):
        U = combo[0]
        for M in combo[1:]:
            U = np.kron(U, M)
        acc += U @ rho @ U.conj().T
    return acc / 16 ** n


# ---------------------------------------------------------------------------
# condensed representation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CondensedQ:
    """Transition matrix of a channel between leakage subspaces.

    ``entries[i, j] = tr( Pi_i  Lambda(Pi_j / dim_j) )``.  Columns of a
    trace-preserving channel sum to one.  Two layouts exist:

    * ``form="full"`` — indexed by the 2^n subspace labels of
      :func:`all_labels` (all-computational first);
    * ``form="single_site"`` — the (n+1)x(n+1) restriction to the
      computational subspace plus the n single-site leakage subspaces,
      valid for channels that never populate multi-site leakage.
    """

    entries: np.ndarray
    dims: np.ndarray
    n: int
    form: str = "full"
    labels: tuple = field(default=())

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "dims", np.asarray(self.dims, dtype=int))
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("condensed matrix must be square")
        if len(self.dims) != m.shape[0]:
            raise ValueError("dims length must match matrix size")

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def column_sum_deviation(self) -> float:
        return float(np.abs(self.entries.sum(axis=0) - 1.0).max())

    def is_stochastic(self, tol: float = TOL_STOCHASTIC) -> bool:
        return self.column_sum_deviation() <= tol

    def single_site_restriction(self, tol: float = TOL_STOCHASTIC) -> "CondensedQ":
        """Restrict a full-form matrix to the computational + single-leak block.

        Requires the channel to act trivially outside that block (all
        other couplings below ``tol``), as every Definition-style leakage
        damping channel does.
        """
        if self.form != "full":
            return self
        labs = list(self.labels)
        keep = [labs.index(SubspaceLabel.all_computational(self.n))]
        keep += [labs.index(SubspaceLabel.single_leak(k, self.n))
                 for k in range(1, self.n + 1)]
        drop = [i for i in range(self.size) if i not in keep]
        if drop:
            off = np.abs(self.entries[np.ix_(drop, keep)]).max()
            off = max(off, np.abs(self.entries[np.ix_(keep, drop)]).max())
            if off > tol:
                raise ValueError(
                    f"channel couples multi-site leakage sectors (|Q|={off:.2e}); "
                    "no single-site restriction exists")
        sub = self.entries[np.ix_(keep, keep)]
        return CondensedQ(entries=sub, dims=self.dims[keep], n=self.n,
                          form="single_site")


def _kraus_ops_of(channel) -> tuple[list, int]:
    """Accept a KrausChannel-like object or a plain list of matrices."""
    if hasattr(channel, "kraus_ops"):
        ops = list(channel.kraus_ops)
    else:
        ops = list(channel)
    if not ops:
        raise ValueError("channel must have at least one Kraus operator")
    return ops, ops[0].shape[0]


def condensed_rep(channel) -> CondensedQ:
    """Condensed representation Q of a Kraus channel (full 2^n form).

    Entry (i, j) is the probability weight the channel moves from the
    (trace-normalized) subspace j into subspace i.
    """
    ops, d = _kraus_ops_of(channel)
    n = _register_size(d)
    labs = all_labels(n)
    masks = [subspace_mask(lab) for lab in labs]
    dims = np.array([lab.dim for lab in labs])
    Q = np.zeros((len(labs), len(labs)))
    for j, lab in enumerate(labs):
        rho = np.diag(masks[j].astype(complex)) / dims[j]
        out = np.zeros_like(rho)
        for E in ops:
            out += E @ rho @ E.conj().T
        odiag = np.real(np.diagonal(out))
        for i in range(len(labs)):
            Q[i, j] = odiag[masks[i]].sum()
    return CondensedQ(entries=Q, dims=dims, n=n, labels=tuple(labs))


def compose_condensed(q1: CondensedQ, q2: CondensedQ) -> CondensedQ:
    """Matrix product q1 @ q2.

    By the composition rule of the condensed representation this equals
    the condensed matrix of (Lambda_1 . twirl . Lambda_2), i.e. the
    twirling projector is implicitly interposed between the two channels.
    """
    if q1.entries.shape != q2.entries.shape or q1.form != q2.form:
        raise ValueError("condensed matrices must have equal shape and form")
    return CondensedQ(entries=q1.entries @ q2.entries, dims=q1.dims,
                      n=q1.n, form=q1.form, labels=q1.labels)


def state_coords(rho: np.ndarray) -> np.ndarray:
    """Ket-side coordinates of an operator: tr(Pi_i rho) per label."""
    n = _register_size(rho.shape[0])
    diag = np.real(np.diagonal(rho))
    return np.array([diag[subspace_mask(lab)].sum() for lab in all_labels(n)])


def effect_coords(M: np.ndarray) -> np.ndarray:
    """Bra-side coordinates of an effect: tr(Pi_i M) / dim_i per label."""
    n = _register_size(M.shape[0])
    diag = np.real(np.diagonal(M))
    return np.array([diag[subspace_mask(lab)].sum() / lab.dim
                     for lab in all_labels(n)])
