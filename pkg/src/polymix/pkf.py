"""Set-membership Kalman filtering on polynotopes.

One iteration performs

    reduce   : xbar = reduce(x, q)
    predict  : p = f~(xbar, u, v)
    innovate : e = g~(xbar, u, v, y)        (contains 0 whenever the model
                                             and bounds are honest)
    align    : stack [p; e] so common monomials share generator columns
    gain     : G = (Rp Phi Re^T)(Re Phi Re^T)^-1
    update   : x_next = p - G e

where f~ and g~ are inclusion-preserving maps built from this library's
operators.  Because the update is the weighted combination z1 - G z2 with
0 in z2's set, membership of the true state is preserved for any G; the
specific G above minimizes the trace of the weighted covariation
R Phi R^T of the update, which is the least-squares optimal gain.  On
linear models over interval symbols the iteration collapses to the
zonotopic filter: E stays an identity and G equals A Pbar C^T
(C Pbar C^T + F F^T)^-1 with Pbar the reduced-state covariation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import polynotope as pn
from .errors import DimensionError, DomainError
from .symbols import SymbolProvider, SymbolType, provider

__all__ = ["PkfConfig", "PkfModel", "PkfStepInfo", "pkf_step",
           "pkf_step_detailed", "zkf_path"]


@dataclass(frozen=True)
class PkfConfig:
    """Reduction order, covariation weighting, gain regularization.

    ``phi=None`` means the identity weighting.  ``lam=None`` picks the
    default Tikhonov term 1e-12 * tr(Re Phi Re^T)/rows; pass 0 to disable
    (a singular innovation covariation then falls back to a pseudo-inverse
    with a warning).
    """

    q: int
    phi: np.ndarray | None = None
    lam: float | None = None

    def __post_init__(self):
        if self.q < 0:
            raise DomainError("reduction order must be nonnegative")
        if self.lam is not None and self.lam < 0:
            raise DomainError("regularization must be nonnegative")


@dataclass(frozen=True)
class PkfModel:
    """Inclusion maps for prediction and innovation."""

    predict: Callable  # (xbar, u, v) -> Polynotope
    innovate: Callable  # (xbar, u, v, y) -> Polynotope


@dataclass(frozen=True)
class PkfStepInfo:
    """Diagnostics of one iteration (gain, intermediate polynotopes)."""

    gain: np.ndarray
    reduced: pn.Polynotope
    prediction: pn.Polynotope
    innovation: pn.Polynotope
    aligned_count: int
    cov_trace: float


def _weighted(rp: np.ndarray, re: np.ndarray, phi: np.ndarray | None):
    if phi is None:
        return rp @ re.T, re @ re.T
    m = rp.shape[1]
    if phi.shape != (m, m):
        raise DimensionError(
            f"weighting must match the aligned monomial count {m}, got {phi.shape}"
        )
    if not np.array_equal(phi, phi.T):
        raise DimensionError("weighting must be symmetric")
    return rp @ phi @ re.T, re @ phi @ re.T


def _solve_gain(cross: np.ndarray, s: np.ndarray, lam: float | None):
    """G = cross * (s + lam I)^-1 with pseudo-inverse fallback."""
    ne = s.shape[0]
    if ne == 0:
        return np.zeros((cross.shape[0], 0))
    if not s.any() and not cross.any():
        return np.zeros_like(cross)
    if lam is None:
        lam = 1e-12 * float(np.trace(s)) / ne
    sreg = s + lam * np.eye(ne)
    try:
        g = np.linalg.solve(sreg.T, cross.T).T
        if np.isfinite(g).all():
            return g
    except np.linalg.LinAlgError:
        pass
    warnings.warn(
        "innovation covariation is singular; using a pseudo-inverse gain",
        RuntimeWarning,
        stacklevel=3,
    )
    return cross @ np.linalg.pinv(s)


def pkf_step_detailed(x: pn.Polynotope, u, v, y, model: PkfModel,
                      cfg: PkfConfig, prov: SymbolProvider | None = None
                      ) -> tuple[pn.Polynotope, PkfStepInfo]:
    """One filter iteration, returning the new state and diagnostics."""
    prov = prov or provider()
    xbar = pn.reduce(x, cfg.q, prov)
    p = model.predict(xbar, u, v)
    e = model.innovate(xbar, u, v, y)
    n = p.dim
    aligned = pn.vcat(p, e)
    rp = aligned.R[:n]
    re = aligned.R[n:]
    cross, s = _weighted(rp, re, cfg.phi)
    gain = _solve_gain(cross, s, cfg.lam)
    x_next = pn._prune(
        aligned.c[:n] - gain @ aligned.c[n:],
        rp - gain @ re,
        aligned.I,
        aligned.E,
    )
    if cfg.phi is None:
        trace = float((x_next.R * x_next.R).sum())
    else:
        rn = rp - gain @ re
        trace = float(np.trace(rn @ cfg.phi @ rn.T))
    info = PkfStepInfo(gain, xbar, p, e, aligned.gen_count, trace)
    return x_next, info


def pkf_step(x: pn.Polynotope, u, v, y, model: PkfModel, cfg: PkfConfig,
             prov: SymbolProvider | None = None) -> pn.Polynotope:
    """One filter iteration (state only)."""
    return pkf_step_detailed(x, u, v, y, model, cfg, prov)[0]


# --------------------------------------------------------------------------
# linear path: the iteration restricted to zonotopes
# --------------------------------------------------------------------------


def _require_interval_zonotope(z: pn.Polynotope, name: str) -> None:
    if z.symbol_count and np.any(z.I % 4 != int(SymbolType.INTERVAL)):
        raise DomainError(f"{name} must use interval symbols only")
    if not z.is_zonotope and z.gen_count:
        raise DomainError(f"{name} must be a zonotope (identity exponents)")


def zkf_path(A, B, C, D, E, F, x: pn.Polynotope, u, y, v: pn.Polynotope,
             q: int, phi: np.ndarray | None = None,
             prov: SymbolProvider | None = None
             ) -> tuple[pn.Polynotope, PkfStepInfo]:
    """Filter iteration for the linear model

        x+ = A x + B u + E v_p,        0 = C x + D u + F v_e - y,

    with ``v = [v_p; v_e]`` a zonotope over interval symbols disjoint from
    the state's.  Asserts that every intermediate stays a zonotope and
    returns the same diagnostics as :func:`pkf_step_detailed`.
    """
    A, B, C, D, E, F = (np.atleast_2d(np.asarray(m, dtype=float))
                        for m in (A, B, C, D, E, F))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    _require_interval_zonotope(x, "state")
    _require_interval_zonotope(v, "noise")
    if set(x.I.tolist()) & set(v.I.tolist()):
        raise DomainError("state and noise must not share symbols")
    n_vp, n_ve = E.shape[1], F.shape[1]
    if v.dim != n_vp + n_ve:
        raise DimensionError("noise dimension must match [E, F] columns")

    vp_rows = list(range(n_vp))
    ve_rows = list(range(n_vp, n_vp + n_ve))

    def predict(xbar, u_, v_):
        return (A @ xbar) + (E @ v_[vp_rows]) + (B @ u_)

    def innovate(xbar, u_, v_, y_):
        return (C @ xbar) + (F @ v_[ve_rows]) + (D @ u_ - y_)

    model = PkfModel(predict, innovate)
    x_next, info = pkf_step_detailed(x, u, v, y, model, PkfConfig(q, phi),
                                     prov)
    for z, name in ((info.reduced, "reduced state"),
                    (info.prediction, "prediction"),
                    (info.innovation, "innovation"),
                    (x_next, "update")):
        _require_interval_zonotope(z, name)
    return x_next, info
