"""The cone-manifold path q = 0: cone angle, singular-locus length, the
volume integral of the Schlaefli formula, and the path limits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dehnmap import DefPoint, LadderError, _newton_1d, _pq, dehn_coefficients

PI = np.pi


class ConePathError(RuntimeError):
    """Cone-path solve failed or left the hyperbolic regime."""


@dataclass
class ConePathSample:
    s: float
    tau: float
    alpha: float        # cone angle 2 pi / p
    length: float       # length of the singular locus, sqrt(tau)
    vol: float = 0.0
    q_residual: float = 0.0


def cone_path(F, s_samples):
    """Per s, solve q(s, tau) = 0 for tau near 3 s^2 (hyperbolic side)."""
    out = []
    for s in s_samples:
        if s == 0:
            out.append(ConePathSample(0.0, 0.0, PI, 0.0))
            continue
        tau = _newton_1d(lambda t: _pq(F, s, t)[1], 3 * s * s, s * s)
        if not np.isfinite(tau):
            raise ConePathError(f"q = 0 solve failed at s = {s}")
        if tau <= 0:
            raise ConePathError(f"tau = {tau} <= 0 at s = {s}: left the "
                                "hyperbolic regime")
        c = dehn_coefficients(F, DefPoint(s, tau))
        out.append(ConePathSample(float(s), float(tau), 2 * PI / c.p,
                                  float(np.sqrt(tau)), q_residual=abs(c.q)))
    return out


def schlafli_volume(path):
    """Fill cumulative volumes: d vol = -1/2 length d alpha from alpha = pi.

    The input must be ordered with alpha decreasing from pi; trapezoidal
    rule, in place, returning the same list.
    """
    if not path:
        return path
    alphas = [p.alpha for p in path]
    if any(a2 >= a1 + 1e-15 for a1, a2 in zip(alphas, alphas[1:])):
        raise ConePathError("cone angle must decrease along the path")
    path[0].vol = 0.0
    vol = 0.0
    for prev, cur in zip(path, path[1:]):
        vol += -0.5 * 0.5 * (prev.length + cur.length) * (cur.alpha - prev.alpha)
        cur.vol = vol
    return path


def default_s_grid(s_max, n=240):
    """Sample density increasing like s^2 toward the outer end, plus 0."""
    u = np.linspace(0.0, 1.0, n) ** (1.0 / 3.0)
    return np.unique(np.concatenate([[0.0], s_max * u]))


def volume_refinement_drift(F, s_max, n=240):
    """Relative change of the end volume under halving the step."""
    coarse = schlafli_volume(cone_path(F, default_s_grid(s_max, n)))
    fine = schlafli_volume(cone_path(F, default_s_grid(s_max, 2 * n)))
    v1, v2 = coarse[-1].vol, fine[-1].vol
    return abs(v1 - v2) / max(abs(v2), 1e-300)


def path_limits(path, a3=None):
    """Extrapolated limits along the cone path.

    ratio_vol = vol / ((pi - alpha) length) -> 3/8 and
    l0_est = length / (pi - alpha)^{1/3}; both by a c0 + c1 s fit over the
    small-s end of the path.  When a3 is supplied the closed form
    sqrt(3) / (2 a3^{1/3}) is reported alongside.
    """
    pts = [p for p in path if p.s > 0 and p.vol > 0]
    if len(pts) < 6:
        raise LadderError("cone path too short for limit extrapolation")
    pts = sorted(pts, key=lambda p: p.s)[:max(6, len(pts) // 3)]
    ss = np.array([p.s for p in pts])
    ratio = np.array([p.vol / ((PI - p.alpha) * p.length) for p in pts])
    l0run = np.array([p.length / (PI - p.alpha) ** (1.0 / 3.0) for p in pts])

    def extrap(ys, label):
        c1, c0 = np.polyfit(ss, ys, 1)
        c0_inner = np.polyfit(ss[:len(ss) // 2], ys[:len(ss) // 2], 1)[1] \
            if len(ss) >= 12 else c0
        if abs(c0_inner - c0) > 0.05 * max(abs(c0), 1e-12):
            raise LadderError(f"{label} ladder not converged")
        return float(c0)

    out = {"ratio_vol": extrap(ratio, "vol-ratio"),
           "l0_est": extrap(l0run, "l0")}
    if a3 is not None:
        out["l0_closed_form"] = float(np.sqrt(3.0) / (2 * a3 ** (1.0 / 3.0)))
    return out
