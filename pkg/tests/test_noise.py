import numpy as np
import pytest

from leakbench import noise, qspace, theory
from leakbench.qspace import TritString

from conftest import random_def1_spec


def test_empty_transitions_is_identity():
    ch = noise.build_single_site_channel(
        noise.SingleSiteLeakageSpec(n=1, transitions={}))
    assert len(ch.kraus_ops) == 1
    assert np.allclose(ch.kraus_ops[0], np.eye(3))


def test_single_damping_example():
    spec = noise.SingleSiteLeakageSpec(n=1, transitions={((0,), (2,)): 0.3})
    ch = noise.build_single_site_channel(spec)
    e0 = sorted(ch.kraus_ops, key=lambda E: -np.abs(np.trace(E)))[0]
    assert np.allclose(e0, np.diag([np.sqrt(0.7), 1.0, 1.0]))
    L, S = noise.direct_rates(ch)
    assert abs(L - 0.15) < 1e-15
    assert S == 0.0


def test_rejects_pairs_outside_allowed_set():
    # both states leaked on different sites
    with pytest.raises(ValueError):
        noise.SingleSiteLeakageSpec(
            n=2, transitions={((2, 0), (0, 2)): 0.1})
    # multi-leak state
    with pytest.raises(ValueError):
        noise.SingleSiteLeakageSpec(
            n=2, transitions={((2, 2), (0, 0)): 0.1})


def test_asymmetric_directions_allowed():
    spec = noise.SingleSiteLeakageSpec(n=1, transitions={((1,), (2,)): 0.4})
    ch = noise.build_single_site_channel(spec)
    assert noise.validate_cptp(ch).passed


def test_oversubscribed_probabilities_rejected():
    with pytest.raises(ValueError):
        noise.SingleSiteLeakageSpec(
            n=1, transitions={((0,), (2,)): 0.7, ((0,), (1,)): 0.7})


def test_validate_cptp_identity_and_broken():
    ident = noise.identity_channel(2)
    assert noise.validate_cptp(ident).deviation == 0.0
    # naive list with an undeflated residual operator: completeness fails
    # by exactly the transition probability
    E1 = np.zeros((3, 3), dtype=complex)
    E1[2, 0] = np.sqrt(0.25)
    broken = noise.KrausChannel(kraus_ops=(np.eye(3, dtype=complex), E1),
                                dim=3)
    rep = noise.validate_cptp(broken)
    assert not rep.passed
    assert abs(rep.deviation - 0.25) < 1e-12


def test_constructors_pass_cptp(rng):
    for n in (1, 2, 3):
        ch = noise.build_single_site_channel(random_def1_spec(rng, n))
        assert noise.validate_cptp(ch).passed
    ch = noise.build_two_qubit_channel(noise.TwoQubitLeakSpec(0.3, 0.2, 0.4))
    assert noise.validate_cptp(ch).passed
    ch = noise.build_simplified_channel(
        noise.SimplifiedSpec(n=2, p=0.1, u0="00", u=("20", "02")))
    assert noise.validate_cptp(ch).passed


def test_simplified_zero_is_identity():
    ch = noise.build_simplified_channel(
        noise.SimplifiedSpec(n=2, p=0.0, u0="11", u=("20", "02")))
    acc = sum(E @ E.conj().T for E in ch.kraus_ops)
    assert np.allclose(acc, np.eye(9))


def _kraus_set(ch):
    return sorted((tuple(np.round(E, 14).ravel()) for E in ch.kraus_ops
                   if np.abs(E).max() > 0), key=str)


def test_simplified_matches_two_qubit_model():
    eps = 4 * 5e-5
    simp = noise.build_simplified_channel(
        noise.SimplifiedSpec(n=2, p=eps, u0="11", u=("20", "02")))
    tq = noise.build_two_qubit_channel(noise.iswap_spec(eps))
    assert _kraus_set(simp) == _kraus_set(tq)


def test_simplified_is_single_site_special_case():
    spec = noise.SimplifiedSpec(n=2, p=0.08, u0="10", u=("21", "02"))
    a = noise.build_simplified_channel(spec)
    b = noise.build_single_site_channel(spec.as_single_site())
    assert _kraus_set(a) == _kraus_set(b)


def test_simplified_pbar_and_rates():
    spec = noise.SimplifiedSpec(n=2, p=2e-4, u0="11", u=("20", "02"))
    assert abs(spec.pbar - 5e-5) < 1e-20
    L, S = noise.direct_rates(noise.build_simplified_channel(spec))
    assert abs(L - 2 * 5e-5) < 1e-15      # n * pbar
    assert abs(S - 8e-5) < 1e-15          # 2^n n pbar / (3^n - 2^n)


def test_two_qubit_rates():
    L, S = noise.direct_rates(
        noise.build_two_qubit_channel(noise.TwoQubitLeakSpec(0.2, 0.0)))
    assert abs(L - 0.05) < 1e-15
    assert abs(S - 0.04) < 1e-15          # (eps1+eps2)/5
    # eps3 alone moves weight only inside the leakage sector
    L, S = noise.direct_rates(
        noise.build_two_qubit_channel(noise.TwoQubitLeakSpec(0.0, 0.0, 0.4)))
    assert L == 0.0 and S == 0.0


def test_two_qubit_oversubscription():
    with pytest.raises(ValueError):
        noise.TwoQubitLeakSpec(0.6, 0.6)


def test_identity_rates():
    assert noise.direct_rates(noise.identity_channel(2)) == (0.0, 0.0)


def test_direct_rates_match_q_formulas(rng):
    for n in (1, 2, 3):
        for _ in range(5):
            ch = noise.build_single_site_channel(random_def1_spec(rng, n))
            L1, S1 = noise.direct_rates(ch)
            L2, S2 = theory.rates_from_q(qspace.condensed_rep(ch))
            assert abs(L1 - L2) < 1e-12 and abs(S1 - S2) < 1e-12


def test_computational_flips_leave_rates_unchanged(rng):
    base = {(TritString("01"), TritString("21")): 0.04,
            (TritString("21"), TritString("01")): 0.03}
    L0, S0 = noise.direct_rates(noise.build_single_site_channel(
        noise.SingleSiteLeakageSpec(n=2, transitions=base)))
    withflips = dict(base)
    comp = [TritString(t) for t in ((0, 0), (0, 1), (1, 0), (1, 1))]
    for a in comp:
        for b in comp:
            if a != b:
                withflips[(a, b)] = rng.uniform(0, 0.05)
    L1, S1 = noise.direct_rates(noise.build_single_site_channel(
        noise.SingleSiteLeakageSpec(n=2, transitions=withflips)))
    assert abs(L0 - L1) < 1e-14 and abs(S0 - S1) < 1e-14


def test_compose_channels():
    a = noise.build_single_site_channel(
        noise.SingleSiteLeakageSpec(n=1, transitions={((0,), (2,)): 0.1}))
    b = noise.build_single_site_channel(
        noise.SingleSiteLeakageSpec(n=1, transitions={((2,), (1,)): 0.2}))
    comp = noise.compose_channels(a, b)
    assert noise.validate_cptp(comp).passed
    rho = np.diag([0.0, 0.0, 1.0]).astype(complex)
    out = noise.apply_channel(comp, rho)
    ref = noise.apply_channel(a, noise.apply_channel(b, rho))
    assert np.abs(out - ref).max() < 1e-14
