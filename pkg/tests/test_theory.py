import numpy as np
import pytest

from leakbench import noise, qspace, theory

from conftest import brute_condensed


def test_single_site_q_zero_rates_identity():
    q = theory.single_site_q([0.0, 0.0], [0.0, 0.0])
    assert np.allclose(q.entries, np.eye(3))


def test_single_site_q_two_level():
    p, qq = 0.1, 0.04
    q = theory.single_site_q([p], [qq])
    assert np.allclose(q.entries, [[1 - p, 2 * qq], [p, 1 - 2 * qq]])
    ev = np.sort(np.linalg.eigvals(q.entries).real)
    assert np.abs(ev - np.sort([1.0, 1 - p - 2 * qq])).max() < 1e-14


def test_single_site_q_uniform_spectrum():
    pbar = 0.01
    q = theory.single_site_q([pbar] * 4, [pbar] * 4)
    ev = np.sort(np.linalg.eigvals(q.entries).real)
    expect = np.sort([1.0] + [1 - 2 * pbar] * 3 + [1 - 6 * pbar])
    assert np.abs(ev - expect).max() < 1e-12


def test_char_poly_root_identity():
    p = np.array([0.1, 0.2, 0.05])
    q = np.array([0.2, 0.1, 0.05])
    xs = 1 - 2 * q
    for k in range(3):
        expect = -p[k] * np.prod([xs[j] - xs[k] for j in range(3) if j != k])
        assert abs(theory.char_poly_f(p, q, xs[k]) - expect) < 1e-15


def test_char_poly_zero_p_roots_are_xs():
    q = np.array([0.15, 0.05])
    vals = theory.char_poly_f([0.0, 0.0], q, 1 - 2 * q)
    assert np.abs(vals).max() < 1e-15


def test_char_poly_roots_match_eigensolver():
    p = [0.1, 0.2]
    q = [0.05, 0.1]
    summary = theory.eigen_bounds(p, q)
    ev = np.sort(np.linalg.eigvals(theory.single_site_q(p, q).entries).real)
    assert np.abs(summary.full_spectrum - ev).max() < 1e-10


def test_eigen_bounds_two_level_exact():
    p, qq = 0.07, 0.02
    summary = theory.eigen_bounds([p], [qq])
    lam0 = summary.eigenvalues[0]
    assert abs(lam0 - (1 - p - 2 * qq)) < 1e-14
    lo, hi = summary.bounds[0]
    assert lo <= lam0 <= hi


def test_eigen_bounds_random_instances(rng):
    for _ in range(200):
        n = int(rng.integers(1, 6))
        p = rng.uniform(1e-4, 0.1, size=n)
        q = np.sort(rng.uniform(0.0, 0.2, size=n))[::-1]
        while len(np.unique(np.round(q, 12))) < n:
            q = np.sort(rng.uniform(0.0, 0.2, size=n))[::-1]
        summary = theory.eigen_bounds(p, q)
        ev = np.sort(np.linalg.eigvals(
            theory.single_site_q(p, q).entries).real)
        assert np.abs(summary.full_spectrum - ev).max() < 1e-10
        for lam, b in zip(summary.eigenvalues, summary.bounds):
            if b is not None:
                assert b[0] - 1e-12 <= lam <= b[1] + 1e-12


def test_eigen_bounds_uniform_rates_collapse():
    pbar = 0.02
    summary = theory.eigen_bounds([pbar] * 3, [pbar] * 3)
    expect = np.sort([1.0] + [1 - 2 * pbar] * 2 + [1 - 5 * pbar])
    assert np.abs(summary.full_spectrum - expect).max() < 1e-12


def test_eigen_bounds_zero_p_flagged():
    summary = theory.eigen_bounds([0.0, 0.05], [0.1, 0.02])
    assert any("zero leak" in note for note in summary.notes)
    ev = np.sort(np.linalg.eigvals(
        theory.single_site_q([0.0, 0.05], [0.1, 0.02]).entries).real)
    assert np.abs(summary.full_spectrum - ev).max() < 1e-10


def test_degeneracy_similarity_identity():
    p = np.array([0.03, 0.05, 0.02])
    q = np.array([0.08, 0.08, 0.01])  # sites 0 and 1 share a seep rate
    Q = theory.single_site_q(p, q).entries
    A, Qprime = theory.degeneracy_similarity(p, q, 0)
    lhs = A @ Q @ np.linalg.inv(A)
    assert np.abs(lhs - Qprime).max() < 1e-12


def test_appendix_eigenbasis_uniform():
    # the closed-form stationary column assumes equal leak and seep rates
    for n in (2, 3, 5):
        V, Vinv = theory.uniform_eigenbasis(n)
        assert np.abs(Vinv @ V - np.eye(n + 1)).max() < 1e-12
        pbar = 0.013
        Q = theory.single_site_q([pbar] * n, [pbar] * n).entries
        S = np.diag([1 - (n + 2) * pbar] + [1 - 2 * pbar] * (n - 1) + [1.0])
        assert np.abs(V @ S @ Vinv - Q).max() < 1e-12


def test_rates_from_q_examples():
    n = 2
    ident = qspace.condensed_rep(noise.identity_channel(n))
    assert theory.rates_from_q(ident) == (0.0, 0.0)
    p = np.array([0.02, 0.05])
    q = np.array([0.01, 0.03])
    L, S = theory.rates_from_q(theory.single_site_q(p, q))
    assert abs(L - p.sum()) < 1e-15
    assert abs(S - 2 ** n * q.sum() / (3 ** n - 2 ** n)) < 1e-15
    eps = 0.08
    Q = qspace.condensed_rep(noise.build_two_qubit_channel(
        noise.iswap_spec(eps)))
    L, S = theory.rates_from_q(Q)
    assert abs(L - eps / 2) < 1e-15
    assert abs(S - 2 * eps / 5) < 1e-15


# ---------------------------------------------------------------------------
# interleaved composition
# ---------------------------------------------------------------------------

def test_ilrb_q_zero_pauli_noise_reduces_to_single_site():
    eps = 3e-3
    q = theory.ilrb_q(0.0, eps, 3)
    ref = theory.single_site_q([eps] * 3, [eps] * 3)
    assert np.abs(q.entries - ref.entries).max() < 1e-15


def test_ilrb_q_matches_direct_channel_composition():
    n = 2
    pbar, eps = 3e-3, 7e-3
    lp = noise.build_simplified_channel(
        noise.SimplifiedSpec.from_pbar(n, pbar, u0="11", u=("20", "02")))
    lt = noise.build_simplified_channel(
        noise.SimplifiedSpec.from_pbar(n, eps, u0="11", u=("20", "02")))
    comp = noise.compose_channels(lp, lt)
    Qfull, labels, dims = brute_condensed(comp.kraus_ops, n)
    order = [labels.index(("c", "c")), labels.index(("l", "c")),
             labels.index(("c", "l"))]
    brute = Qfull[np.ix_(order, order)]
    assert np.abs(theory.ilrb_q(pbar, eps, n).entries - brute).max() < 1e-12


def test_ilrb_eigenvalue_formulas():
    # no target noise: the reference exponents
    s = theory.ilrb_eigenvalues(2e-3, 0.0, 2)
    assert np.abs(s.full_spectrum
                  - np.sort([1 - 4 * 2e-3, 1 - 2 * 2e-3, 1.0])).max() < 1e-15
    # the reproduction point
    s = theory.ilrb_eigenvalues(5e-6, 5e-5, 2)
    assert abs(s.eigenvalues[0] - 0.999780012) < 1e-9
    # exchanging the two rates leaves the spectrum unchanged
    a = theory.ilrb_eigenvalues(3e-4, 9e-4, 3).full_spectrum
    b = theory.ilrb_eigenvalues(9e-4, 3e-4, 3).full_spectrum
    assert np.abs(a - b).max() < 1e-16


def test_ilrb_eigenvalues_match_eigensolver(rng):
    for n in (2, 3, 4):
        for _ in range(10):
            pbar = rng.uniform(1e-6, 1e-3)
            eps = rng.uniform(1e-6, 1e-3)
            q = theory.ilrb_q(pbar, eps, n)
            ev = np.sort(np.linalg.eigvals(q.entries).real)
            assert np.abs(theory.ilrb_eigenvalues(pbar, eps, n).full_spectrum
                          - ev).max() < 1e-12


# ---------------------------------------------------------------------------
# rate estimators
# ---------------------------------------------------------------------------

def test_corollary1_estimates():
    assert theory.corollary1_estimates(1.0, 4) == (0.0, 0.0)
    L, S = theory.corollary1_estimates(0.999957, 4)
    assert abs(L - 2.8667e-5) < 1e-9
    assert abs(S - 7.056e-6) < 1e-9
    L, _ = theory.corollary1_estimates(0.999974, 3)
    assert abs(L - 1.56e-5) < 1e-9


def test_crosstalk_free_rates():
    res = theory.crosstalk_free_rates([0.0, 0.0], [0.0, 0.0])
    assert res["L"] == 0.0 and res["S"] == 0.0
    res = theory.crosstalk_free_rates([0.1, 0.2], [0.0, 0.0])
    assert abs(res["L"] - 0.28) < 1e-15
    res = theory.crosstalk_free_rates([0.1, 0.2], [0.05, 0.1])
    lams = res["site_lambdas"]
    assert np.allclose(lams, [1 - 0.1 - 0.1, 1 - 0.2 - 0.2])
    assert np.allclose(res["joint_lambdas"],
                       np.sort([lams[0], lams[1], lams[0] * lams[1]]))


# ---------------------------------------------------------------------------
# two-qubit spectra
# ---------------------------------------------------------------------------

def test_two_qubit_q_is_stochastic_and_matches_channel(rng):
    for _ in range(10):
        e1, e2 = rng.uniform(0, 0.5, size=2)
        e3 = rng.uniform(0, 1.0)
        Q = theory.two_qubit_condensed_q(e1, e2, e3)
        assert np.abs(Q.sum(axis=0) - 1.0).max() < 1e-14
        ch = noise.build_two_qubit_channel(
            noise.TwoQubitLeakSpec(e1, e2, e3))
        full, labels, dims = brute_condensed(ch.kraus_ops, 2)
        order = [labels.index(("c", "c")), labels.index(("c", "l")),
                 labels.index(("l", "c"))]
        assert np.abs(Q - full[np.ix_(order, order)]).max() < 1e-13


def test_cz_eigenvalues_special_cases():
    eps = 0.12
    s = theory.cz_eigenvalues(eps, eps)
    assert np.abs(np.array(sorted(s.eigenvalues))
                  - np.sort([1 - eps, 1 - eps / 2, 1.0])).max() < 1e-14
    s = theory.cz_eigenvalues(0.2, 0.0)
    assert np.abs(np.array(sorted(s.eigenvalues))
                  - np.sort([1 - 0.75 * 0.2, 1.0, 1.0])).max() < 1e-14


def test_gen3_symmetric_case_and_reduction():
    eps, e3 = 0.2, 0.05  # eps > 2*eps3
    s = theory.gen3_eigenvalues(eps, eps, e3)
    assert np.abs(np.array(sorted(s.eigenvalues))
                  - np.sort([1 - eps, 1 - eps / 2 - e3, 1.0])).max() < 1e-14
    a = theory.gen3_eigenvalues(0.11, 0.07, 0.0).eigenvalues
    b = theory.cz_eigenvalues(0.11, 0.07).eigenvalues
    assert np.abs(np.array(a) - np.array(b)).max() == 0


def test_gen3_matches_eigensolver(rng):
    for _ in range(50):
        e1, e2 = rng.uniform(0, 0.5, size=2)
        e3 = rng.uniform(0, 1.0)
        ev = np.sort(np.linalg.eigvals(
            theory.two_qubit_condensed_q(e1, e2, e3)).real)
        s = theory.gen3_eigenvalues(e1, e2, e3)
        assert np.abs(s.full_spectrum - ev).max() < 1e-12


def test_two_qubit_rates_formula():
    L, S = theory.two_qubit_rates(0.2, 0.1)
    assert abs(L - 0.075) < 1e-15 and abs(S - 0.06) < 1e-15
    assert theory.two_qubit_rates(0.2, 0.1, 0.5) == (L, S)


def test_iswap_rates_from_lambdas():
    assert theory.iswap_rates_from_lambdas(0.9, 0.9) == (0.0, 0.0)
    L, S = theory.iswap_rates_from_lambdas(0.999782, 0.999980)
    assert abs(L - 9.9e-5) < 2e-7
    assert abs(S - 7.92e-5) < 2e-7
    L, S = theory.iswap_rates_from_lambdas(1 - 4 * 5e-5, 1.0)
    assert abs(L - 2 * 5e-5) < 1e-15  # consistent with n*eps at pbar = 0
    with pytest.raises(ValueError):
        theory.iswap_rates_from_lambdas(0.5, 0.6)


# ---------------------------------------------------------------------------
# double-excitation block
# ---------------------------------------------------------------------------

def test_epsilon_hat_basics():
    g, eta = 2 * np.pi * 11.2e6, 2 * np.pi * 1.87e9
    assert theory.hamiltonian_epsilon(g, eta, 0.0) == 0.0
    om = np.sqrt(16 * g * g + eta * eta)
    peak = theory.hamiltonian_epsilon(g, eta, np.pi / om)
    assert abs(peak - theory.hamiltonian_epsilon_max(g, eta)) < 1e-18
    assert abs(peak - 8 * g * g / (16 * g * g + eta * eta)) < 1e-18
    # stays within the loose closed-form bound
    for t in np.linspace(0, 5 / 11.2e6, 37):
        v = theory.hamiltonian_epsilon(g, eta, t)
        assert 0.0 <= v <= 32 * g * g / (16 * g * g + eta * eta)


def test_epsilon_hat_device_scale():
    g, eta = 2 * np.pi * 11.2e6, 2 * np.pi * 1.87e9
    val = theory.hamiltonian_epsilon(g, eta, 2 * np.pi / 11.2e6)
    assert 1e-4 <= val <= 6e-4
    assert abs(theory.hamiltonian_epsilon_max(g, eta) - 2.87e-4) < 2e-6


def test_h2_oracle_fixed_points():
    g, eta, om, t = 1.3, 4.0, 17.0, 2.1
    d0 = theory.h2_evolution_oracle(g, eta, om, 0.0, 0.4, 0.1)
    assert np.abs(d0 - [0.4, 0.1, 0.1]).max() < 1e-14
    # fully mixed block is stationary
    d = theory.h2_evolution_oracle(g, eta, om, t, 1 / 3, 1 / 3)
    assert np.abs(d - 1 / 3).max() < 1e-13


def test_h2_oracle_matches_closed_form(rng):
    for _ in range(40):
        g = rng.uniform(0.1, 3.0)
        eta = rng.uniform(0.0, 20.0)
        om = rng.uniform(0.0, 50.0)
        t = rng.uniform(0.0, 10.0)
        r11 = rng.uniform(0, 1)
        rp = rng.uniform(0, (1 - r11) / 2)
        eps = theory.hamiltonian_epsilon(max(g, 1e-9), eta, t)
        pred = np.array([(1 - 2 * eps) * r11 + 2 * eps * rp,
                         (1 - eps) * rp + eps * r11,
                         (1 - eps) * rp + eps * r11])
        d = theory.h2_evolution_oracle(g, eta, om, t, r11, rp)
        assert np.abs(d - pred).max() < 1e-10


def test_h2_oracle_pure_11_start():
    g, eta, om, t = 0.8, 3.5, 9.0, 1.7
    eps = theory.hamiltonian_epsilon(g, eta, t)
    d = theory.h2_evolution_oracle(g, eta, om, t, 1.0, 0.0)
    assert np.abs(d - [1 - 2 * eps, eps, eps]).max() < 1e-12
