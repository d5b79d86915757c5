"""Exponential-decay fitting and conversion of exponents to rates.

Survival curves are fitted to A0 + sum_i B_i lambda_i^m (one or two decay
terms) by damped Gauss-Newton with analytic Jacobians; points are
weighted by inverse squared standard error when available.  Fitted
exponents convert to leakage/seepage estimates through the closed-form
models, with uncertainties propagated linearly from the parameter
covariance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import theory

__all__ = [
    "DecayFit",
    "FitError",
    "RateReport",
    "fit_decay",
    "fit_decay_arrays",
    "select_model",
    "rates_from_fit",
    "bootstrap_lambda_stderr",
]

MAX_ITER = 200
REL_TOL = 1e-12
LAMBDA_CEIL = 1.0 + 1e-6
LAMBDA_FLOOR = 1e-12


class FitError(RuntimeError):
    """Raised on non-convergence; carries the best fit found so far."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class DecayFit:
    """Result of fitting A0 + sum_i B_i lambda_i^m.

    Parameter order inside ``cov`` is (A0, B_1..B_k, lambda_1..lambda_k);
    exponents (and their amplitudes) are sorted ascending by exponent.
    """

    model_order: int
    offset: float
    amplitudes: np.ndarray
    lambdas: np.ndarray
    cov: np.ndarray
    residual_rms: float
    converged: bool
    iterations: int
    flags: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "amplitudes",
                           np.asarray(self.amplitudes, dtype=float))
        object.__setattr__(self, "lambdas",
                           np.asarray(self.lambdas, dtype=float))
        object.__setattr__(self, "cov", np.asarray(self.cov, dtype=float))

    @property
    def lambda_stderr(self) -> np.ndarray:
        k = self.model_order
        return np.sqrt(np.clip(np.diagonal(self.cov)[1 + k:], 0.0, None))

    @property
    def offset_stderr(self) -> float:
        return float(np.sqrt(max(self.cov[0, 0], 0.0)))

    def predict(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        out = np.full_like(m, self.offset, dtype=float)
        for B, lam in zip(self.amplitudes, self.lambdas):
            out += B * _power(lam, m)
        return out

    def to_json_obj(self) -> dict:
        return {
            "order": self.model_order,
            "A0": self.offset,
            "A0_stderr": self.offset_stderr,
            "amplitudes": self.amplitudes.tolist(),
            "lambdas": self.lambdas.tolist(),
            "lambda_stderr": self.lambda_stderr.tolist(),
            "residual_rms": self.residual_rms,
            "converged": self.converged,
            "flags": list(self.flags),
        }


def _power(lam: float, m: np.ndarray) -> np.ndarray:
    # stable lam**m for lam in (0, 1+eps] and large integer m
    return np.exp(m * np.log(max(lam, LAMBDA_FLOOR)))


def _model_and_jacobian(params, m, order):
    a0 = params[0]
    bs = params[1:1 + order]
    ls = params[1 + order:]
    cols = [np.ones_like(m)]
    y = np.full_like(m, a0, dtype=float)
    powers = []
    for B, lam in zip(bs, ls):
        pw = _power(lam, m)
        powers.append(pw)
        y += B * pw
    for pw in powers:
        cols.append(pw)
    for B, lam, pw in zip(bs, ls, powers):
        # d/dlam B lam^m = B m lam^(m-1)
        cols.append(B * m * pw / max(lam, LAMBDA_FLOOR))
    return y, np.stack(cols, axis=1)


def _initial_guess(m, p, sigma, order):
    """Offset from the tail, exponent from a log-linear slope.

    The mean of the last fifth of the points seeds A0; a straight-line
    fit of log(p - A0) against m (over points clearly above A0) seeds the
    exponent; a second exponent starts at sqrt(lambda).  Amplitudes then
    come from a linear solve at fixed exponents, which is robust even when
    the log-linear slope is poor.
    """
    k = max(1, len(p) // 5)
    a0 = float(np.mean(p[-k:]))
    thresh = 3.0 * sigma if sigma is not None else np.zeros_like(p)
    above = p - a0 > np.maximum(thresh, 1e-15)
    lam = None
    if above.sum() >= 2:
        slope = np.polyfit(m[above], np.log(p[above] - a0), 1)[0]
        lam = float(np.exp(np.clip(slope, -50.0, 0.0)))
    if lam is None or not 0.0 < lam <= 1.0:
        lam = 1.0 - 1.0 / max(m.max(), 2.0)
    lam = min(max(lam, LAMBDA_FLOOR), 1.0 - 1e-12)
    lams = [lam] if order == 1 else [lam, np.sqrt(lam)]
    design = np.column_stack([np.ones_like(m)] + [_power(v, m) for v in lams])
    coef, *_ = np.linalg.lstsq(design, p, rcond=None)
    return np.concatenate([[coef[0]], coef[1:], lams])


def fit_decay_arrays(m, p, sigma=None, order: int = 1) -> DecayFit:
    """Weighted nonlinear least squares of a 1- or 2-exponent decay.

    ``sigma`` holds per-point standard errors, used as relative weights;
    when absent or degenerate the fit is unweighted.  Either way the
    parameter covariance is scaled by the reduced chi-square, so reported
    standard errors reflect the actual residual scatter.
    """
    if order not in (1, 2):
        raise ValueError("model order must be 1 or 2")
    m = np.asarray(m, dtype=float)
    p = np.asarray(p, dtype=float)
    if len(np.unique(m)) < order + 2:
        raise FitError(f"need at least {order + 2} distinct lengths")
    weighted = sigma is not None and np.all(np.asarray(sigma) > 0)
    w = 1.0 / np.asarray(sigma, dtype=float) if weighted else np.ones_like(p)

    params = _initial_guess(m, p, np.asarray(sigma, dtype=float)
                            if sigma is not None else None, order)
    nb = 1 + order

    def cost(th):
        y, _ = _model_and_jacobian(th, m, order)
        r = (y - p) * w
        return r, float(r @ r)

    r, c = cost(params)
    mu = 1e-3
    converged = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        y, J = _model_and_jacobian(params, m, order)
        Jw = J * w[:, None]
        g = Jw.T @ r
        H = Jw.T @ Jw
        step_ok = False
        for _ in range(25):
            try:
                delta = np.linalg.solve(H + mu * np.diag(np.diagonal(H)
                                                         + 1e-300), -g)
            except np.linalg.LinAlgError:
                mu *= 10.0
                continue
            trial = params + delta
            trial[nb:] = np.clip(trial[nb:], LAMBDA_FLOOR, LAMBDA_CEIL)
            r2, c2 = cost(trial)
            if c2 <= c:
                params, r, c = trial, r2, c2
                mu = max(mu / 3.0, 1e-12)
                step_ok = True
                break
            mu *= 10.0
        if not step_ok:
            break
        rel = np.max(np.abs(delta) / (np.abs(params) + 1e-300))
        if rel < REL_TOL:
            converged = True
            break

    # Covariance from the Gauss-Newton normal matrix, scaled by the reduced
    # chi-square: point errors set relative weights, the overall scale comes
    # from the residuals (so model mismatch widens the error bars).
    _, J = _model_and_jacobian(params, m, order)
    Jw = J * w[:, None]
    H = Jw.T @ Jw
    dof = max(len(p) - len(params), 1)
    try:
        cov = np.linalg.inv(H)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(H)
    cov = cov * (c / dof)
    rms = float(np.sqrt(np.mean(((_model_and_jacobian(params, m, order)[0]
                                  - p)) ** 2)))

    flags = []
    order_idx = np.argsort(params[nb:])
    lams = params[nb:][order_idx]
    amps = params[1:nb][order_idx]
    perm = np.concatenate([[0], 1 + order_idx, 1 + order + order_idx])
    cov = cov[np.ix_(perm, perm)]
    for i, (B, lam) in enumerate(zip(amps, lams)):
        se_b = np.sqrt(max(cov[1 + i, 1 + i], 0.0))
        if abs(B) <= 3.0 * se_b or abs(B) < 1e-12:
            flags.append(f"amplitude {i} consistent with zero: "
                         "exponent unidentifiable")
    fit = DecayFit(model_order=order, offset=float(params[0]),
                   amplitudes=amps, lambdas=lams, cov=cov,
                   residual_rms=rms, converged=converged, iterations=it,
                   flags=tuple(flags))
    if not converged and not flags:
        raise FitError(f"no convergence after {it} iterations", best=fit)
    return fit


def fit_decay(dataset, order: int = 1) -> DecayFit:
    """Fit a survival dataset (uses stderr weights when all positive)."""
    sig = dataset.stderrs()
    sigma = sig if np.all(sig > 0) else None
    return fit_decay_arrays(dataset.ms(), dataset.ps(), sigma, order=order)


def select_model(dataset) -> DecayFit:
    """Pick between the 1- and 2-exponent models.

    The second exponent is kept only when it clearly earns its place:
    weighted residual RMS improves by more than a factor of two and the
    extra amplitude exceeds three of its standard errors.
    """
    if len(dataset.points) < 5:
        raise ValueError("model selection needs at least 5 points")
    fit1 = fit_decay(dataset, order=1)
    try:
        fit2 = fit_decay(dataset, order=2)
    except FitError:
        return fit1
    if fit2.residual_rms <= 0:
        better = fit1.residual_rms > 0
    else:
        better = fit1.residual_rms / fit2.residual_rms > 2.0
    amps_significant = True
    for i, B in enumerate(fit2.amplitudes):
        se = np.sqrt(max(fit2.cov[1 + i, 1 + i], 0.0))
        if abs(B) <= 3.0 * se:
            amps_significant = False
    if better and amps_significant:
        return fit2
    return fit1


# ---------------------------------------------------------------------------
# exponents -> rates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateReport:
    L: float
    S: float
    L_err: float
    S_err: float
    model: str
    details: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {"L": self.L, "S": self.S, "L_err": self.L_err,
                "S_err": self.S_err, "model": self.model,
                "details": self.details}


def rates_from_fit(fit: DecayFit, model: str, n: int | None = None,
                   lambda_p: float | None = None,
                   lambda_p_err: float = 0.0,
                   ratio: float = 1.0) -> RateReport:
    """Convert fitted exponents to leakage/seepage rates.

    model="corollary1" needs the site count n (uniform-noise single
    exponent); model="iswap" needs the reference exponent lambda_p;
    model="cz" uses both exponents of an order-2 fit through the trace
    identity lambda_+ + lambda_- = 2 - 3(eps1+eps2)/4; and
    model="crosstalk_free" treats each exponent as an independent site
    with q = ratio * p.  Standard errors propagate linearly.
    """
    if model == "corollary1":
        if n is None:
            raise ValueError("corollary1 model needs the site count n")
        if fit.model_order != 1:
            raise ValueError("corollary1 model expects a single exponent")
        lam = float(fit.lambdas[0])
        se = float(fit.lambda_stderr[0])
        L, S = theory.corollary1_estimates(lam, n, ratio)
        dL = n / (n + 2.0 * ratio)
        dS = n * 2.0 ** n * ratio / ((3 ** n - 2 ** n) * (n + 2.0 * ratio))
        return RateReport(L=L, S=S, L_err=dL * se, S_err=dS * se,
                          model=model,
                          details={"lambda": lam, "lambda_stderr": se,
                                   "n": n, "ratio": ratio})
    if model == "iswap":
        if lambda_p is None:
            raise ValueError("iswap model needs the reference exponent")
        if fit.model_order != 1:
            raise ValueError("iswap model expects a single exponent")
        lam = float(fit.lambdas[0])
        se = float(fit.lambda_stderr[0])
        L, S = theory.iswap_rates_from_lambdas(lam, lambda_p)
        denom = 3.0 * lambda_p - 2.0
        dL_dlam = -1.0 / (2.0 * denom)
        dL_dlp = (1.0 / (2.0 * denom)
                  - 3.0 * (lambda_p - lam) / (2.0 * denom ** 2))
        L_err = np.hypot(dL_dlam * se, dL_dlp * lambda_p_err)
        S_err = (4.0 / 5.0) * L_err
        return RateReport(L=L, S=S, L_err=float(L_err), S_err=float(S_err),
                          model=model,
                          details={"lambda": lam, "lambda_stderr": se,
                                   "lambda_p": lambda_p,
                                   "lambda_p_stderr": lambda_p_err})
    if model == "cz":
        if fit.model_order != 2:
            raise ValueError("cz model expects two exponents")
        lam_sum = float(fit.lambdas.sum())
        eps_sum = (2.0 - lam_sum) * 4.0 / 3.0
        L, S = eps_sum / 4.0, eps_sum / 5.0
        k = fit.model_order
        cov_ll = fit.cov[1 + k:, 1 + k:]
        var_sum = float(np.ones(2) @ cov_ll @ np.ones(2))
        se_sum = np.sqrt(max(var_sum, 0.0))
        return RateReport(L=L, S=S, L_err=se_sum / 3.0,
                          S_err=se_sum * 4.0 / 15.0, model=model,
                          details={"lambda_sum": lam_sum,
                                   "eps1_plus_eps2": eps_sum})
    if model == "crosstalk_free":
        lams = fit.lambdas
        ses = fit.lambda_stderr
        ps = (1.0 - lams) / (1.0 + 2.0 * ratio)
        qs = ratio * ps
        out = theory.crosstalk_free_rates(ps, qs)
        dp = ses / (1.0 + 2.0 * ratio)
        prod = np.prod(1.0 - ps)
        L_err = float(np.sqrt(np.sum((prod / (1.0 - ps) * dp) ** 2)))
        n_sites = len(lams)
        scale = 2.0 ** n_sites / (3 ** n_sites - 2 ** n_sites)
        prod_pq = np.prod(1.0 - ps + qs)
        dS = scale * np.abs(prod_pq / (1.0 - ps + qs) * (ratio - 1.0)
                            - prod / (1.0 - ps) * (-1.0)) * dp
        S_err = float(np.sqrt(np.sum(dS ** 2)))
        return RateReport(L=out["L"], S=out["S"], L_err=L_err, S_err=S_err,
                          model=model,
                          details={"site_lambdas": lams.tolist(),
                                   "ratio": ratio})
    raise ValueError(f"unknown rate model {model!r}")


def bootstrap_lambda_stderr(dataset, order: int = 1, resamples: int = 200,
                            seed: int = 0) -> np.ndarray:
    """Case-bootstrap standard errors of the fitted exponents."""
    rng = np.random.default_rng(seed)
    m = dataset.ms()
    p = dataset.ps()
    sig = dataset.stderrs()
    sigma = sig if np.all(sig > 0) else None
    out = []
    attempts = 0
    while len(out) < resamples and attempts < resamples * 20:
        attempts += 1
        pick = rng.integers(0, len(m), size=len(m))
        if len(np.unique(m[pick])) < order + 2:
            continue
        try:
            fit = fit_decay_arrays(m[pick], p[pick],
                                   sigma[pick] if sigma is not None else None,
                                   order=order)
        except (FitError, np.linalg.LinAlgError):
            continue
        out.append(fit.lambdas)
    if len(out) < 2:
        raise FitError("too few successful bootstrap resamples")
    return np.std(np.array(out), axis=0, ddof=1)
