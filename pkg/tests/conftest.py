"""Shared oracle helpers.

These deliberately rebuild quantities with independent brute-force code
(explicit digit loops, dense channel application) so the library under
test is checked against something other than itself.
"""

import itertools

import numpy as np
import pytest

from leakbench import noise
from leakbench.qspace import TritString


def random_density(rng, d):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


def enumerate_projector(pattern, n):
    """Diagonal projector built by explicit trit-string enumeration."""
    d = 3 ** n
    diag = np.zeros(d)
    for idx, ts in enumerate(itertools.product((0, 1, 2), repeat=n)):
        ok = True
        for k, sym in enumerate(pattern):
            if sym == "l" and ts[k] != 2:
                ok = False
            if sym == "c" and ts[k] == 2:
                ok = False
        if ok:
            diag[idx] = 1.0
    return np.diag(diag.astype(complex))


def brute_condensed(kraus_ops, n):
    """Condensed transition matrix by direct trace evaluation."""
    labels = list(itertools.product("cl", repeat=n))
    dims = [2 ** sum(1 for s in L if s == "c") for L in labels]
    Q = np.zeros((len(labels), len(labels)))
    for j, Lj in enumerate(labels):
        rho = enumerate_projector(Lj, n) / dims[j]
        out = np.zeros_like(rho)
        for E in kraus_ops:
            out += E @ rho @ E.conj().T
        for i, Li in enumerate(labels):
            Q[i, j] = np.real(np.trace(enumerate_projector(Li, n) @ out))
    return Q, labels, dims


def random_def1_spec(rng, n, scale=0.05):
    """A random valid single-site leakage damping transition map."""
    comp = [ts for ts in itertools.product((0, 1), repeat=n)]
    singles = {}
    for i in range(1, n + 1):
        singles[i] = []
        for ts in itertools.product((0, 1, 2), repeat=n):
            if ts[i - 1] == 2 and all(t < 2 for k, t in enumerate(ts)
                                      if k != i - 1):
                singles[i].append(ts)
    trans = {}
    for i in range(1, n + 1):
        for k in comp:
            for k2 in singles[i]:
                if rng.random() < 0.5:
                    trans[(TritString(k), TritString(k2))] = \
                        rng.uniform(0, scale) / (n * len(singles[i]))
                if rng.random() < 0.5:
                    trans[(TritString(k2), TritString(k))] = \
                        rng.uniform(0, scale) / len(comp)
    if rng.random() < 0.5:  # some flips inside the computational basis
        a, b = comp[0], comp[-1]
        if a != b:
            trans[(TritString(a), TritString(b))] = rng.uniform(0, scale / 4)
    return noise.SingleSiteLeakageSpec(n=n, transitions=trans)


@pytest.fixture
def rng():
    return np.random.default_rng(20240)
