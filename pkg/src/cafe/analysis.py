"""Fidelity-decay models, damped least-squares fitting, and error budgeting.

The fitter is a small in-house Levenberg-Marquardt loop with a numerically
differenced Jacobian and box bounds; five parameters over at most a handful
of depth points do not warrant anything heavier, and keeping it local makes
every fit bit-for-bit reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .qcore import dagger

__all__ = [
    "LsqResult",
    "least_squares_lm",
    "CzModelParams",
    "FitResult",
    "ErrorBudget",
    "model_cz",
    "model_general",
    "model_1q",
    "model_quadratic",
    "fit",
    "fit_group",
    "budget",
    "unitarity_relations",
]


# ---------------------------------------------------------------------------
# Damped least squares


@dataclass
class LsqResult:
    x: np.ndarray
    cost: float
    converged: bool
    iterations: int


def _fd_jacobian(fun: Callable, x: np.ndarray, r: np.ndarray, step: float) -> np.ndarray:
    jac = np.empty((r.size, x.size))
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        jac[:, i] = (np.asarray(fun(xp)) - np.asarray(fun(xm))) / (2 * h)
    return jac


def least_squares_lm(
    fun: Callable[[np.ndarray], np.ndarray],
    x0: Sequence[float],
    bounds: tuple[Sequence[float], Sequence[float]] | None = None,
    max_iter: int = 200,
    fd_step: float = 1e-6,
    cost_tol: float = 1e-28,
) -> LsqResult:
    """Minimize sum(fun(x)**2) with Marquardt damping and box bounds.

    The residual function must be defined in a neighborhood of the bounds
    (finite differences may step slightly outside). Trial points are clipped
    into the box before evaluation, so the returned x always satisfies the
    bounds.
    """
    x = np.asarray(x0, dtype=float).copy()
    if bounds is not None:
        lo = np.asarray(bounds[0], dtype=float)
        hi = np.asarray(bounds[1], dtype=float)
    else:
        lo = np.full(x.size, -np.inf)
        hi = np.full(x.size, np.inf)
    x = np.clip(x, lo, hi)

    r = np.asarray(fun(x), dtype=float)
    cost = float(r @ r)
    lam = 1e-3
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        if cost <= cost_tol:
            converged = True
            break
        jac = _fd_jacobian(fun, x, r, fd_step)
        grad = jac.T @ r
        if np.abs(grad).max() <= 1e-14 * (1.0 + cost):
            converged = True
            break
        jtj = jac.T @ jac
        diag = np.clip(np.diag(jtj), 1e-12, None)
        improved = False
        for _ in range(60):
            a = jtj + lam * np.diag(diag)
            try:
                step = np.linalg.solve(a, -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            xt = np.clip(x + step, lo, hi)
            rt = np.asarray(fun(xt), dtype=float)
            ct = float(rt @ rt)
            if ct < cost:
                rel = (cost - ct) / max(cost, 1e-300)
                x, r, cost = xt, rt, ct
                lam = max(lam / 3.0, 1e-14)
                improved = True
                if rel < 1e-14 or np.linalg.norm(step) <= 1e-15 * (1.0 + np.linalg.norm(x)):
                    converged = True
                break
            lam *= 4.0
            if lam > 1e15:
                break
        if not improved:
            # No descent direction left at maximal damping: numerically stationary.
            converged = True
            break
        if converged:
            break
    return LsqResult(x=x, cost=cost, converged=converged, iterations=it)


def _multistart(fun, starts, bounds, **kwargs) -> LsqResult:
    best: LsqResult | None = None
    for x0 in starts:
        res = least_squares_lm(fun, x0, bounds=bounds, **kwargs)
        if best is None or res.cost < best.cost:
            best = res
        if best.cost <= 1e-26:
            break
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# Decay models


@dataclass(frozen=True)
class CzModelParams:
    """Fitted parameters of the CZ-cycle decay model."""

    dtheta: float = 0.0
    dgamma: float = 0.0
    dphi: float = 0.0
    p_depol: float = 0.0
    eps_spam: float = 0.0


def _cz_curve(n, dtheta, dgamma, dphi, p_depol, eps_spam):
    n = np.asarray(n, dtype=float)
    tr = (
        1.0
        + 2.0 * np.exp(-1j * n * dgamma) * np.cos(n * dtheta)
        + np.exp(-1j * n * (2.0 * dgamma + dphi))
    )
    return 0.25 - eps_spam - (1.0 - p_depol) ** n * (1.0 - np.abs(tr) ** 2) / 20.0


def model_cz(n, p: CzModelParams):
    """Fidelity after n repetitions of a noisy CZ-like cycle.

    F_n = 1/4 - eps_spam - (1-p)^n (1 - |1 + 2 e^{-i n dgamma} cos(n dtheta)
    + e^{-i n (2 dgamma + dphi)}|^2) / 20.
    """
    return _cz_curve(n, p.dtheta, p.dgamma, p.dphi, p.p_depol, p.eps_spam)


def model_general(n, u_tilde: np.ndarray, u_ref: np.ndarray, p_depol: float = 0.0, eps_spam: float = 0.0):
    """Fidelity of n applications of (unitary + depolarizing) against a reference.

    F_n = (1-p)^n (d + |tr[(U_ref^dag)^n U_tilde^n]|^2) / (d (d+1))
        + (1 - (1-p)^n) / d - eps_spam.
    """
    u_tilde = np.asarray(u_tilde, dtype=np.complex128)
    u_ref = np.asarray(u_ref, dtype=np.complex128)
    if u_tilde.shape != u_ref.shape:
        raise ValueError("unitary dimensions do not match")
    d = u_ref.shape[0]

    def one(k: int) -> float:
        w = np.linalg.matrix_power(dagger(u_ref), k) @ np.linalg.matrix_power(u_tilde, k)
        tr2 = abs(np.trace(w)) ** 2
        dec = (1.0 - p_depol) ** k
        return dec * (d + tr2) / (d * (d + 1)) + (1.0 - dec) / d - eps_spam

    if np.isscalar(n):
        return one(int(n))
    return np.array([one(int(k)) for k in np.asarray(n).ravel()])


def model_1q(n, dmu: float, p_depol: float = 0.0, eps_spam: float = 0.0):
    """Fidelity after n repetitions of a miscalibrated X(pi) cycle.

    F_n = 1/2 - eps_spam + (1-p)^n ((2/3) cos^2(n dmu / 2) - 1/6).
    """
    n = np.asarray(n, dtype=float)
    return 0.5 - eps_spam + (1.0 - p_depol) ** n * (
        (2.0 / 3.0) * np.cos(n * dmu / 2.0) ** 2 - 1.0 / 6.0
    )


def model_quadratic(n, eps_spam: float, eps_lin: float, eps_quad: float):
    """Small-error expansion: F_n = 1 - eps_spam - eps_lin n - eps_quad n^2."""
    n = np.asarray(n, dtype=float)
    return 1.0 - eps_spam - eps_lin * n - eps_quad * n * n


# ---------------------------------------------------------------------------
# Fitting


MODELS = ("cz", "oneq", "general", "quad")

_N_PARAMS = {"cz": 5, "oneq": 3, "general": 2, "quad": 3}


@dataclass(frozen=True)
class FitResult:
    model: str
    params: dict[str, float]
    residual_rms: float
    converged: bool
    depths: tuple[int, ...]
    context: dict = field(default_factory=dict, repr=False, compare=False)

    def curve(self, n):
        """Evaluate the fitted model at depth(s) n."""
        p = self.params
        if self.model == "cz":
            return _cz_curve(n, p["dtheta"], p["dgamma"], p["dphi"], p["p_depol"], p["eps_spam"])
        if self.model == "oneq":
            return model_1q(n, p["dmu"], p["p_depol"], p["eps_spam"])
        if self.model == "general":
            return model_general(
                n, self.context["u_tilde"], self.context["u_ref"], p["p_depol"], p["eps_spam"]
            )
        if self.model == "quad":
            return model_quadratic(n, p["eps_spam"], p["eps_lin"], p["eps_quad"])
        raise ValueError(f"unknown model {self.model!r}")


def _init_decay(n: np.ndarray, y: np.ndarray, d: int) -> float:
    """Crude depolarizing-probability estimate from the log-slope of F_n - 1/d."""
    z = y - 1.0 / d
    good = np.flatnonzero(z > 1e-6)
    if good.size >= 2 and n[good[-1]] > n[good[0]]:
        i, j = good[0], good[-1]
        rate = (np.log(z[j]) - np.log(z[i])) / (n[j] - n[i])
        return float(np.clip(1.0 - np.exp(rate), 0.0, 0.9))
    return 0.01


def _init_spam(n: np.ndarray, y: np.ndarray) -> float:
    at0 = y[n == 0]
    f0 = float(at0[0]) if at0.size else float(y.max())
    return float(np.clip(1.0 - f0, 0.0, 0.4))


def fit(
    depths: Sequence[int],
    values: Sequence[float],
    model: str = "cz",
    even_only: bool = True,
    u_tilde: np.ndarray | None = None,
    u_ref: np.ndarray | None = None,
) -> FitResult:
    """Least-squares fit of a decay model to per-depth fidelity estimates.

    Odd depths are dropped unless ``even_only`` is False. Multi-start over a
    small grid of angle initializations makes the result deterministic given
    the data. Degenerate (constant) data returns zero parameters with the
    constant absorbed into eps_spam. Non-convergence is reported via the
    ``converged`` flag with best-effort parameters.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    n = np.asarray(depths, dtype=float)
    y = np.asarray(values, dtype=float)
    if n.shape != y.shape:
        raise ValueError("depths and values differ in length")
    if even_only:
        keep = (np.asarray(depths, dtype=int) % 2) == 0
        n, y = n[keep], y[keep]
    order = np.argsort(n)
    n, y = n[order], y[order]
    used = tuple(int(k) for k in n)
    if n.size < _N_PARAMS[model]:
        raise ValueError(
            f"{model} model has {_N_PARAMS[model]} free parameters but only "
            f"{n.size} usable depth points"
        )

    if y.max() - y.min() <= 1e-12:
        # Constant data: all dynamics parameters vanish by contract.
        s = float(np.clip(1.0 - y.mean(), 0.0, 0.5))
        params = _zero_params(model)
        params["eps_spam"] = s
        resid = _rms(_curve_for(model, params, u_tilde, u_ref)(n) - y)
        return FitResult(model, params, resid, True, used, _ctx(model, u_tilde, u_ref))

    if model == "quad":
        basis = np.column_stack([np.ones_like(n), n, n * n])
        coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
        params = {
            "eps_spam": float(1.0 - coef[0]),
            "eps_lin": float(-coef[1]),
            "eps_quad": float(-coef[2]),
        }
        resid = _rms(basis @ coef - y)
        return FitResult("quad", params, resid, True, used)

    p0 = _init_decay(n, y, 4 if model in ("cz", "general") else 2)
    s0 = _init_spam(n, y)

    if model == "cz":
        grid = (0.0, 0.02, -0.02)
        starts = [
            (th, g, ph, p0, s0) for th in grid for g in grid for ph in grid
        ]
        bounds = ([-0.5, -0.5, -0.5, 0.0, 0.0], [0.5, 0.5, 0.5, 1.0, 0.5])

        def resid_fn(x):
            return _cz_curve(n, *x) - y

    elif model == "oneq":
        starts = [(dm, p0, s0) for dm in (0.0, 0.02, -0.02)]
        bounds = ([-0.5, 0.0, 0.0], [0.5, 1.0, 0.5])

        def resid_fn(x):
            return model_1q(n, x[0], x[1], x[2]) - y

    else:  # general
        if u_tilde is None or u_ref is None:
            raise ValueError("general model requires u_tilde and u_ref")
        starts = [(p0, s0), (0.01, 0.0)]
        bounds = ([0.0, 0.0], [1.0, 0.5])

        def resid_fn(x):
            return model_general(n, u_tilde, u_ref, x[0], x[1]) - y

    best = _multistart(resid_fn, starts, bounds)
    params = _label_params(model, best.x)
    params = _canonicalize(model, params)
    resid = _rms(_curve_for(model, params, u_tilde, u_ref)(n) - y)
    return FitResult(model, params, resid, bool(best.converged), used, _ctx(model, u_tilde, u_ref))


def fit_group(group_result, model: str | None = None, even_only: bool = True) -> FitResult:
    """Fit a protocol GroupResult, defaulting the model by group size."""
    if model is None:
        model = "oneq" if group_result.m == 1 else "cz"
    return fit(group_result.depths, group_result.f_hat, model=model, even_only=even_only)


def _zero_params(model: str) -> dict[str, float]:
    names = {
        "cz": ("dtheta", "dgamma", "dphi", "p_depol", "eps_spam"),
        "oneq": ("dmu", "p_depol", "eps_spam"),
        "general": ("p_depol", "eps_spam"),
        "quad": ("eps_spam", "eps_lin", "eps_quad"),
    }[model]
    return {k: 0.0 for k in names}


def _label_params(model: str, x: np.ndarray) -> dict[str, float]:
    out = _zero_params(model)
    for k, v in zip(out, x):
        out[k] = float(v)
    return out


def _canonicalize(model: str, params: dict[str, float]) -> dict[str, float]:
    """Resolve sign degeneracies: dtheta and dmu enter through even functions,
    and (dgamma, dphi) only through a joint complex conjugation."""
    if model == "cz":
        params["dtheta"] = abs(params["dtheta"])
        if params["dgamma"] < 0 or (params["dgamma"] == 0 and params["dphi"] < 0):
            params["dgamma"] = -params["dgamma"]
            params["dphi"] = -params["dphi"]
        params["dgamma"] += 0.0  # normalize -0.0
        params["dphi"] += 0.0
    elif model == "oneq":
        params["dmu"] = abs(params["dmu"])
    return params


def _ctx(model: str, u_tilde, u_ref) -> dict:
    if model == "general":
        return {"u_tilde": u_tilde, "u_ref": u_ref}
    return {}


def _curve_for(model: str, params: dict[str, float], u_tilde=None, u_ref=None):
    def curve(n):
        if model == "cz":
            return _cz_curve(
                n, params["dtheta"], params["dgamma"], params["dphi"],
                params["p_depol"], params["eps_spam"],
            )
        if model == "oneq":
            return model_1q(n, params["dmu"], params["p_depol"], params["eps_spam"])
        if model == "general":
            return model_general(n, u_tilde, u_ref, params["p_depol"], params["eps_spam"])
        return model_quadratic(n, params["eps_spam"], params["eps_lin"], params["eps_quad"])

    return curve


def _rms(r: np.ndarray) -> float:
    r = np.asarray(r, dtype=float)
    return float(np.sqrt(np.mean(r * r)))


# ---------------------------------------------------------------------------
# Error budgeting


@dataclass(frozen=True)
class ErrorBudget:
    """SPAM-normalized error budget of a single cycle application."""

    total_infidelity: float
    eps_incoh: float
    eps_coh: float
    eps_spam: float
    params: dict[str, float]
    residual_rms: float
    converged: bool
    depths: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "total_infidelity": self.total_infidelity,
            "eps_incoh": self.eps_incoh,
            "eps_coh": self.eps_coh,
            "eps_spam": self.eps_spam,
            "params": dict(self.params),
            "residual_rms": self.residual_rms,
            "converged": self.converged,
            "depths": list(self.depths),
        }


def budget(fit_result: FitResult) -> ErrorBudget:
    """Budget total/incoherent/coherent error from a fitted model.

    All three quantities evaluate the fitted curve at n = 1 and normalize by
    the fitted SPAM term: the incoherent part zeroes the coherent angles, the
    coherent part zeroes the depolarizing probability.
    """
    p = dict(fit_result.params)
    s = p["eps_spam"]
    if s >= 1.0:
        raise ValueError(f"eps_spam={s} >= 1 leaves no signal to normalize")
    denom = 1.0 - s

    if fit_result.model == "cz":
        f1 = _cz_curve(1, p["dtheta"], p["dgamma"], p["dphi"], p["p_depol"], s)
        f1_incoh = _cz_curve(1, 0.0, 0.0, 0.0, p["p_depol"], s)
        f1_coh = _cz_curve(1, p["dtheta"], p["dgamma"], p["dphi"], 0.0, s)
    elif fit_result.model == "oneq":
        f1 = model_1q(1, p["dmu"], p["p_depol"], s)
        f1_incoh = model_1q(1, 0.0, p["p_depol"], s)
        f1_coh = model_1q(1, p["dmu"], 0.0, s)
    elif fit_result.model == "general":
        u_tilde = fit_result.context["u_tilde"]
        u_ref = fit_result.context["u_ref"]
        f1 = model_general(1, u_tilde, u_ref, p["p_depol"], s)
        f1_incoh = model_general(1, u_ref, u_ref, p["p_depol"], s)
        f1_coh = model_general(1, u_tilde, u_ref, 0.0, s)
    elif fit_result.model == "quad":
        lin, quad = p["eps_lin"], p["eps_quad"]
        return ErrorBudget(
            total_infidelity=max((lin + quad) / denom, 0.0),
            eps_incoh=max(lin / denom, 0.0),
            eps_coh=max(quad / denom, 0.0),
            eps_spam=s,
            params=p,
            residual_rms=fit_result.residual_rms,
            converged=fit_result.converged,
            depths=fit_result.depths,
        )
    else:
        raise ValueError(f"unknown model {fit_result.model!r}")

    return ErrorBudget(
        total_infidelity=float(1.0 - f1 / denom),
        eps_incoh=float(1.0 - f1_incoh / denom),
        eps_coh=float(1.0 - f1_coh / denom),
        eps_spam=float(s),
        params=p,
        residual_rms=fit_result.residual_rms,
        converged=fit_result.converged,
        depths=fit_result.depths,
    )


def unitarity_relations(p_depol: float, d: int = 4) -> dict[str, float]:
    """Unitarity of the depolarizing channel and its incoherent-error bound.

    Returns u = (1-p)^2, the bound (d-1)(1 - sqrt(u))/d, and the incoherent
    error R = (d-1) p / d; the bound never exceeds R (equality for pure
    depolarizing noise).
    """
    if not 0.0 <= p_depol <= 1.0:
        raise ValueError(f"p_depol={p_depol} outside [0, 1]")
    u = (1.0 - p_depol) ** 2
    bound = (d - 1) * (1.0 - np.sqrt(u)) / d
    r = (d - 1) * p_depol / d
    assert bound <= r + 1e-12
    return {"u": float(u), "lower_bound": float(bound), "r": float(r)}
