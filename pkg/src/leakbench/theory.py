"""Closed-form transition matrices, spectra and rate formulas.

Everything here is analytic: the (n+1)x(n+1) single-site transition
matrix and its characteristic-polynomial spectrum with bracketing
intervals, the composed-noise matrix behind interleaved benchmarking, the
two-qubit gate spectra, product-form (cross-talk-free) rates, and the
double-excitation Hamiltonian block used to extract the two-qubit damping
strength.  No sampling or fitting happens in this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qspace import CondensedQ

__all__ = [
    "SingleSiteQ",
    "SpectralSummary",
    "single_site_q",
    "char_poly_f",
    "eigen_bounds",
    "merge_degenerate",
    "degeneracy_similarity",
    "uniform_eigenbasis",
    "rates_from_q",
    "ilrb_q",
    "ilrb_eigenvalues",
    "corollary1_estimates",
    "crosstalk_free_rates",
    "two_qubit_condensed_q",
    "cz_eigenvalues",
    "gen3_eigenvalues",
    "two_qubit_rates",
    "iswap_rates_from_lambdas",
    "hamiltonian_epsilon",
    "hamiltonian_epsilon_max",
    "h2_matrix",
    "h2_evolution_oracle",
]

Q_DEGENERACY_TOL = 1e-13
ROOT_TOL = 1e-14


@dataclass(frozen=True)
class SingleSiteQ:
    """The (n+1)x(n+1) transition matrix of single-site leakage damping.

    Index 0 is the computational subspace, index i >= 1 the subspace where
    only site i is leaked.  Column j holds where the weight of subspace j
    goes in one twirled noise step.
    """

    entries: np.ndarray
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", np.asarray(self.entries, dtype=float))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))

    @property
    def n(self) -> int:
        return len(self.p)

    def as_condensed(self) -> CondensedQ:
        n = self.n
        dims = np.array([2 ** n] + [2 ** (n - 1)] * n)
        return CondensedQ(entries=self.entries, dims=dims, n=n,
                          form="single_site")


@dataclass(frozen=True)
class SpectralSummary:
    """Eigenvalues of a transition matrix with their bracketing intervals.

    Eigenvalues are ascending and listed with multiplicity; ``bounds[k]``
    is an (lo, hi) interval containing eigenvalue k, or None when no
    bracketing statement applies (e.g. the trivial eigenvalue 1).
    """

    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    bounds: tuple = ()
    notes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues",
                           np.asarray(self.eigenvalues, dtype=float))
        object.__setattr__(self, "multiplicities",
                           np.asarray(self.multiplicities, dtype=int))

    @property
    def full_spectrum(self) -> np.ndarray:
        """Eigenvalues repeated per multiplicity, ascending."""
        return np.sort(np.repeat(self.eigenvalues, self.multiplicities))


# ---------------------------------------------------------------------------
# single-site leakage: matrix, characteristic polynomial, spectrum
# ---------------------------------------------------------------------------

def _check_pq(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1 or len(p) < 1:
        raise ValueError("p and q must be equal-length vectors")
    if p.min() < 0 or q.min() < 0:
        raise ValueError("rates must be nonnegative")
    if p.sum() > 1.0 + 1e-12:
        raise ValueError(f"sum(p) = {p.sum()} exceeds 1")
    if (2 * q).max() > 1.0 + 1e-12:
        raise ValueError(f"2*q exceeds 1 for some site")
    return p, q


def single_site_q(p, q) -> SingleSiteQ:
    """Transition matrix: leak p_i out of the computational subspace into
    single-leak subspace i, seep 2 q_i back."""
    p, q = _check_pq(p, q)
    n = len(p)
    Q = np.zeros((n + 1, n + 1))
    Q[0, 0] = 1.0 - p.sum()
    for i in range(n):
        Q[0, i + 1] = 2.0 * q[i]
        Q[i + 1, 0] = p[i]
        Q[i + 1, i + 1] = 1.0 - 2.0 * q[i]
    return SingleSiteQ(entries=Q, p=p, q=q)


def char_poly_f(p, q, x) -> np.ndarray | float:
    """The degree-n factor of the characteristic polynomial, evaluated at x.

    f(x) = prod_i (x_i - x) - sum_i p_i prod_{j != i} (x_j - x), with
    x_i = 1 - 2 q_i.  Its roots are exactly the non-unit eigenvalues of
    the single-site transition matrix.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    xs = 1.0 - 2.0 * q
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    diff = xs[:, None] - x[None, :]          # (n, len(x))
    total = np.prod(diff, axis=0)
    for i in range(len(p)):
        others = np.prod(np.delete(diff, i, axis=0), axis=0) if len(p) > 1 \
            else np.ones_like(x)
        total = total - p[i] * others
    return float(total[0]) if scalar else total


def merge_degenerate(p, q, tol: float = Q_DEGENERACY_TOL):
    """Collapse sites sharing a seep rate into one effective site.

    Sites with equal q are similar (in the matrix sense) to a single site
    carrying the summed leak rate plus decoupled diagonal entries; returns
    (p_reduced, q_reduced, extra_eigenvalues) where each extra eigenvalue
    1 - 2q appears once per absorbed duplicate.
    """
    p = np.asarray(p, dtype=float).copy()
    q = np.asarray(q, dtype=float).copy()
    order = np.argsort(-q, kind="stable")
    p, q = p[order], q[order]
    keep_p, keep_q, extras = [], [], []
    i = 0
    while i < len(q):
        j = i
        ptot = 0.0
        while j < len(q) and abs(q[j] - q[i]) < tol:
            ptot += p[j]
            j += 1
        keep_p.append(ptot)
        keep_q.append(q[i])
        extras.extend([1.0 - 2.0 * q[i]] * (j - i - 1))
        i = j
    return np.array(keep_p), np.array(keep_q), np.array(extras)


def degeneracy_similarity(p, q, i: int):
    """The explicit similarity pair (A, Q') that merges sites i and i+1.

    Valid when q_i == q_{i+1}: A Q A^{-1} carries the summed leak rate
    p_i + p_{i+1} on site i and fully decouples site i+1, whose diagonal
    entry stays 1 - 2 q_i (its eigenvalue; the published merged-parameter
    list zeroes that seep rate, which would wrongly park the decoupled
    eigenvalue at 1 and contradicts root continuity).  Returned for use as
    a test oracle; ``i`` is a 0-based site index.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    n = len(p)
    if not 0 <= i < n - 1:
        raise ValueError("need a valid adjacent site pair")
    A = np.eye(n + 1)
    r = i + 1  # matrix row of site i (row 0 is the computational subspace)
    A[r, r], A[r, r + 1] = 1.0, 1.0
    A[r + 1, r], A[r + 1, r + 1] = p[i + 1], -p[i]
    p2, q2 = p.copy(), q.copy()
    p2[i], p2[i + 1] = p[i] + p[i + 1], 0.0
    q2[i + 1] = 0.0  # no seep coupling back from the decoupled row
    Qprime = np.zeros((n + 1, n + 1))
    Qprime[0, 0] = 1.0 - p2.sum()
    for k in range(n):
        Qprime[0, k + 1] = 2.0 * q2[k]
        Qprime[k + 1, 0] = p2[k]
        Qprime[k + 1, k + 1] = 1.0 - 2.0 * q2[k]
    Qprime[r + 1, r + 1] = 1.0 - 2.0 * q[i]  # decoupled mode keeps x_i
    return A, Qprime


def _bisect(fn, lo, hi, flo, fhi, tol=ROOT_TOL, max_iter=200):
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError("endpoints do not bracket a root")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0 or (hi - lo) < tol:
            return mid
        if flo * fm < 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def eigen_bounds(p, q) -> SpectralSummary:
    """Spectrum of the single-site transition matrix by root isolation.

    The non-unit eigenvalues are the roots of :func:`char_poly_f`; with
    q sorted descending (x_i = 1 - 2 q_i ascending) each root is bracketed:
    the smallest lies in (x_1 - sum(p), min(x_1, x_n - sum(p))), the others
    in (x_i, x_{i+1}).  Duplicated q values are merged first; sites with
    p_i = 0 contribute x_i directly (flagged, since such eigenvalues may
    not be fully exposed by a benchmarking fit).
    """
    p, q = _check_pq(p, q)
    notes = []
    if (p == 0).any():
        notes.append("zero leak rate on some site: matrix may not be "
                     "diagonalizable; those eigenvalues may be invisible "
                     "to the decay fit")
    pr, qr, extras = merge_degenerate(p, q)
    fixed = list(extras)
    # zero-leak sites are decoupled; their x_i are exact eigenvalues
    live = pr > 0
    fixed.extend(1.0 - 2.0 * qr[~live])
    pr, qr = pr[live], qr[live]

    roots, bounds = [], []
    if len(pr) > 0:
        xs = np.sort(1.0 - 2.0 * qr)
        psum = pr.sum()

        def fn(x):
            return char_poly_f(pr, qr, x)

        lo0 = xs[0] - psum
        hi0 = min(xs[0], xs[-1] - psum)
        if len(pr) == 1:
            root0 = xs[0] - psum  # f is linear: exact root
        else:
            # pad the left endpoint against rounding (f(lo0) >= 0 analytically)
            lo = lo0
            flo = fn(lo)
            pad = max(1e-15, 1e-12 * abs(lo))
            while flo < 0.0:
                lo -= pad
                pad *= 2
                flo = fn(lo)
            hi = hi0
            fhi = fn(hi)
            if fhi > 0.0:
                hi, fhi = xs[0], fn(xs[0])
            root0 = _bisect(fn, lo, hi, flo, fhi)
        roots.append(root0)
        bounds.append((lo0, hi0))
        for i in range(len(xs) - 1):
            r = _bisect(fn, xs[i], xs[i + 1], fn(xs[i]), fn(xs[i + 1]))
            roots.append(r)
            bounds.append((xs[i], xs[i + 1]))

    eigs = list(roots) + fixed + [1.0]
    bnds = list(bounds) + [None] * len(fixed) + [None]
    order = np.argsort(eigs)
    eigs = np.array(eigs)[order]
    bnds = [bnds[k] for k in order]
    return SpectralSummary(eigenvalues=eigs,
                           multiplicities=np.ones(len(eigs), dtype=int),
                           bounds=tuple(bnds), notes=tuple(notes))


def uniform_eigenbasis(n: int):
    """Closed-form eigenbasis (V, V^-1) of the uniform equal-rate matrix.

    For p_i = q_i = pbar the matrix diagonalizes as V S V^-1 with
    S = diag(1 - (n+2) pbar, 1 - 2 pbar (x n-1), 1), independent of the
    rate.  Column 0 of V is the decaying mode, the middle columns the
    leak-sector differences, the last the stationary direction (whose
    first entry is 2 q / p, so this closed form needs equal rates; for
    unequal uniform rates only the stationary column changes).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    V = np.zeros((n + 1, n + 1))
    V[0, 0] = -n
    V[1:, 0] = 1.0
    for s in range(1, n):
        V[1, s] = 1.0
        V[s + 1, s] = -1.0
    V[0, n] = 2.0
    V[1:, n] = 1.0
    Vinv = np.zeros((n + 1, n + 1))
    Vinv[0, 0] = -1.0 / (n + 2)
    Vinv[0, 1:] = 2.0 / (n * (n + 2))
    for s in range(1, n):
        Vinv[s, 1:] = 1.0 / n
        Vinv[s, s + 1] -= 1.0
    Vinv[n, :] = 1.0 / (n + 2)
    return V, Vinv


# ---------------------------------------------------------------------------
# rates from transition matrices
# ---------------------------------------------------------------------------

def rates_from_q(q) -> tuple[float, float]:
    """Leakage and seepage rates read off a condensed transition matrix.

    L = 1 - Q[c,c];  S = sum over leaked subspaces of dim_i Q[c,i] divided
    by the leakage dimension 3^n - 2^n.  Accepts a CondensedQ (either
    form) or a SingleSiteQ.
    """
    if isinstance(q, SingleSiteQ):
        q = q.as_condensed()
    if not isinstance(q, CondensedQ):
        raise TypeError("expected a CondensedQ or SingleSiteQ")
    m = q.entries
    n = q.n
    L = 1.0 - m[0, 0]
    S = float(np.dot(q.dims[1:], m[0, 1:])) / (3 ** n - 2 ** n)
    return float(L), S


# ---------------------------------------------------------------------------
# interleaved benchmarking: composed simplified noise
# ---------------------------------------------------------------------------

def ilrb_q(pbar: float, eps_t: float, n: int) -> SingleSiteQ:
    """Transition matrix of one interleaved step (Pauli noise after target
    noise, both simplified with rates pbar and eps_t).

    Off-diagonal leak-to-leak entries are 2^{n+1} pbar eps_t; the first
    row/column carry 2(eps_t + pbar) - (n+1) 2^{n+1} pbar eps_t and half
    of it; diagonals make every column sum to one.
    """
    if pbar < 0 or eps_t < 0:
        raise ValueError("rates must be nonnegative")
    cross = 2.0 ** (n + 1) * pbar * eps_t
    q0i = 2.0 * (eps_t + pbar) - (n + 1) * cross
    qi0 = q0i / 2.0
    if not (0.0 <= q0i <= 1.0 and 0.0 <= cross <= 1.0):
        raise ValueError("rates too large for a stochastic matrix")
    Q = np.full((n + 1, n + 1), cross)
    Q[0, 1:] = q0i
    Q[1:, 0] = qi0
    for i in range(n + 1):
        Q[i, i] = 0.0
        Q[i, i] = 1.0 - Q[:, i].sum()
    if Q.diagonal().min() < 0:
        raise ValueError("rates too large for a stochastic matrix")
    return SingleSiteQ(entries=Q, p=np.full(n, qi0), q=np.full(n, q0i / 2))


def ilrb_eigenvalues(pbar: float, eps_t: float, n: int) -> SpectralSummary:
    """Spectrum of :func:`ilrb_q` in closed form.

    {1, lambda_1 with multiplicity n-1, lambda_2} where
    lambda_1 = 1 - 2(eps_t + pbar) + 2^{n+1} pbar eps_t and
    lambda_2 = 1 - (n+2)(pbar + eps_t) + (n+1)(n+2) 2^n pbar eps_t.
    """
    lam1 = 1.0 - 2.0 * (eps_t + pbar) + 2.0 ** (n + 1) * pbar * eps_t
    lam2 = 1.0 - (n + 2) * (pbar + eps_t) \
        + (n + 1) * (n + 2) * 2.0 ** n * pbar * eps_t
    eigs = [(lam2, 1), (lam1, max(n - 1, 0)), (1.0, 1)]
    eigs = [(v, m) for v, m in eigs if m > 0]
    eigs.sort()
    return SpectralSummary(eigenvalues=[v for v, _ in eigs],
                           multiplicities=[m for _, m in eigs],
                           bounds=(None,) * len(eigs))


# ---------------------------------------------------------------------------
# rate estimators used after fitting
# ---------------------------------------------------------------------------

def corollary1_estimates(lambda_fit: float, n: int,
                         ratio: float = 1.0) -> tuple[float, float]:
    """Rates from a single fitted exponent under uniform per-site noise.

    Solves 1 - lambda = 2 qbar + n pbar with qbar = ratio * pbar; returns
    L = n pbar and S = n 2^n qbar / (3^n - 2^n).
    """
    if not 0.0 < lambda_fit <= 1.0:
        raise ValueError("fitted exponent must lie in (0, 1]")
    pbar = (1.0 - lambda_fit) / (n + 2.0 * ratio)
    qbar = ratio * pbar
    L = n * pbar
    S = n * 2.0 ** n * qbar / (3 ** n - 2 ** n)
    return L, S


def crosstalk_free_rates(p, q) -> dict:
    """Product-form rates for independent per-site noise.

    Returns L = 1 - prod(1 - p_k), the matching seepage, the per-site
    decay exponents 1 - p_k - 2 q_k, and (for n = 2) the three exponents
    of the joint survival curve.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("p and q must have equal length")
    n = len(p)
    L = 1.0 - np.prod(1.0 - p)
    S = (2.0 ** n / (3 ** n - 2 ** n)) * (np.prod(1.0 - p + q)
                                          - np.prod(1.0 - p))
    lams = 1.0 - p - 2.0 * q
    out = {"L": float(L), "S": float(S), "site_lambdas": lams}
    if n == 2:
        out["joint_lambdas"] = np.array(
            sorted([lams[0], lams[1], lams[0] * lams[1]]))
    return out


# ---------------------------------------------------------------------------
# two-qubit gate spectra
# ---------------------------------------------------------------------------

def two_qubit_condensed_q(eps1: float, eps2: float,
                          eps3: float = 0.0) -> np.ndarray:
    """3x3 transition matrix of the two-qubit damping model over the
    subspaces (both-computational, site-2 leaked [|02>-class], site-1
    leaked [|20>-class]).

    The |12> <-> |21> flip moves weight between the two single-leak
    subspaces at rate eps3/2 per step (each source state carries half of
    the normalized subspace weight), keeping the columns stochastic.
    """
    return np.array([
        [1.0 - eps1 / 4 - eps2 / 4, eps1 / 2, eps2 / 2],
        [eps1 / 4, 1.0 - eps1 / 2 - eps3 / 2, eps3 / 2],
        [eps2 / 4, eps3 / 2, 1.0 - eps2 / 2 - eps3 / 2],
    ])


def gen3_eigenvalues(eps1: float, eps2: float, eps3: float = 0.0) -> SpectralSummary:
    """Spectrum and rates of the three-parameter two-qubit model.

    The non-unit eigenvalues are
    1 - 3(eps1+eps2)/8 - eps3/2 +- sqrt(9 eps1^2 + 9 eps2^2 + 16 eps3^2
    - 14 eps1 eps2 - 8 eps1 eps3 - 8 eps2 eps3)/8.  The in-leakage flip
    eps3 shifts the spectrum but never crosses the computational boundary,
    so L = (eps1+eps2)/4 and S = (eps1+eps2)/5 regardless of eps3.
    """
    disc = (9 * eps1 ** 2 + 9 * eps2 ** 2 + 16 * eps3 ** 2
            - 14 * eps1 * eps2 - 8 * eps1 * eps3 - 8 * eps2 * eps3)
    root = np.sqrt(max(disc, 0.0)) / 8.0
    center = 1.0 - 3.0 * (eps1 + eps2) / 8.0 - eps3 / 2.0
    eigs = sorted([center - root, center + root, 1.0])
    return SpectralSummary(eigenvalues=eigs, multiplicities=[1, 1, 1],
                           bounds=(None,) * 3,
                           notes=(f"L={(eps1 + eps2) / 4}",
                                  f"S={(eps1 + eps2) / 5}"))


def cz_eigenvalues(eps1: float, eps2: float) -> SpectralSummary:
    """Two-parameter special case of :func:`gen3_eigenvalues` (eps3 = 0)."""
    if eps1 + eps2 > 1.0 + 1e-12:
        raise ValueError("eps1 + eps2 exceeds 1")
    return gen3_eigenvalues(eps1, eps2, 0.0)


def two_qubit_rates(eps1: float, eps2: float, eps3: float = 0.0) -> tuple[float, float]:
    """L and S of the two-qubit damping model: ((eps1+eps2)/4, (eps1+eps2)/5)."""
    del eps3  # in-leakage flips never cross the computational boundary
    return (eps1 + eps2) / 4.0, (eps1 + eps2) / 5.0


def iswap_rates_from_lambdas(lam: float, lam_p: float) -> tuple[float, float]:
    """Target rates from the interleaved and reference exponents.

    L = (lam_p - lam) / (2 (3 lam_p - 2)); S = 2 (lam_p - lam) /
    (5 (3 lam_p - 2)).  Requires lam_p > 2/3.
    """
    if lam_p <= 2.0 / 3.0:
        raise ValueError("reference exponent must exceed 2/3")
    diff = lam_p - lam
    L = diff / (2.0 * (3.0 * lam_p - 2.0))
    S = 2.0 * diff / (5.0 * (3.0 * lam_p - 2.0))
    return L, S


# ---------------------------------------------------------------------------
# double-excitation Hamiltonian block
# ---------------------------------------------------------------------------

def hamiltonian_epsilon(g: float, eta: float, t: float) -> float:
    """Per-cycle damping strength induced by the double-excitation block.

    g and eta are angular frequencies (rad/s), t the evolution time.  The
    prefactor is fixed by the exact two-level transition probability of
    the |11> <-> (|02>+|20>)/sqrt(2) coupling: the printed closed form
    overstates it by a factor of four, which the evolution oracle
    (:func:`h2_evolution_oracle`) pins down.
    """
    if g <= 0:
        raise ValueError("coupling g must be positive")
    om2 = 16.0 * g * g + eta * eta
    return (4.0 * g * g / om2) * (1.0 - np.cos(np.sqrt(om2) * t))


def hamiltonian_epsilon_max(g: float, eta: float) -> float:
    """Maximum of :func:`hamiltonian_epsilon` over t: 8 g^2 / (16 g^2 + eta^2)."""
    return 8.0 * g * g / (16.0 * g * g + eta * eta)


def h2_matrix(g: float, eta: float, omega: float) -> np.ndarray:
    """Double-excitation block in the basis (|11>, |02>, |20>)."""
    r2g = np.sqrt(2.0) * g
    return np.array([
        [2.0 * omega, r2g, r2g],
        [r2g, 2.0 * omega - eta, 0.0],
        [r2g, 0.0, 2.0 * omega - eta],
    ], dtype=complex)


def h2_evolution_oracle(g: float, eta: float, omega: float, t: float,
                        rho11: float, rho_prime: float) -> np.ndarray:
    """Exact diagonal of exp(-i H2 t) rho0 exp(i H2 t).

    rho0 is diagonal with weight rho11 on |11> and rho_prime on each of
    |02>, |20> (the symmetric form the block preserves).  Computed by
    eigendecomposition of the Hermitian 3x3 block; the result must equal
    ((1-2e) rho11 + 2e rho', (1-e) rho' + e rho11, same) with
    e = :func:`hamiltonian_epsilon`.
    """
    if rho11 < 0 or rho_prime < 0:
        raise ValueError("populations must be nonnegative")
    H = h2_matrix(g, eta, omega)
    w, V = np.linalg.eigh(H)
    U = V @ np.diag(np.exp(-1j * w * t)) @ V.conj().T
    rho0 = np.diag([rho11, rho_prime, rho_prime]).astype(complex)
    rho_t = U @ rho0 @ U.conj().T
    return np.real(np.diagonal(rho_t))
