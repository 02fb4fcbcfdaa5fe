"""The Dehn-filling coefficient map (p, q) on the deformation half-disc,
its Jacobian and fold locus, the Euclidean boundary curve, inversion, and
the asymptotic limits controlled by the germ's cubic coefficient.

Everything is computed in the regularized holonomy lengths (Re parts
divided by the translation scale t), which glue analytically across the
Euclidean line tau = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PI = np.pi


class TrustRadiusError(ValueError):
    """Evaluation outside the germ's trust radius."""


class SingularSystemError(RuntimeError):
    """The 2x2 length system is singular (outside the trusted neighborhood)."""


class LadderError(RuntimeError):
    """An extrapolation ladder failed to converge."""


@dataclass(frozen=True)
class DefPoint:
    """Deformation-space coordinate (s >= 0, tau); tau > 0 hyperbolic,
    tau < 0 spherical, tau = 0 Euclidean."""

    s: float
    tau: float

    @property
    def geometry(self):
        if self.tau > 0:
            return "hyperbolic"
        if self.tau < 0:
            return "spherical"
        return "euclidean"

    @property
    def t(self):
        return float(np.sqrt(abs(self.tau)))


@dataclass(frozen=True)
class HolonomyLengths:
    u: complex
    v: complex
    u_reg: complex
    v_reg: complex


@dataclass(frozen=True)
class DehnCoefficients:
    p: float
    q: float


class SeriesGerm:
    """Odd polynomial germ a3 w^3 + a5 w^5 + a7 w^7 with exact derivative."""

    def __init__(self, a3, a5=0.0, a7=0.0, radius=0.5, orientation=1):
        self.a3 = float(a3)
        self.a5 = float(a5)
        self.a7 = float(a7)
        self.radius = float(radius)
        self.orientation = orientation

    @classmethod
    def from_fit(cls, fit, radius=None):
        return cls(fit.a3, fit.a5, fit.a7, radius or fit.w_max,
                   getattr(fit, "orientation", 1))

    def __call__(self, w):
        w2 = w * w
        return w * w2 * (self.a3 + w2 * (self.a5 + w2 * self.a7))

    def deriv(self, w):
        w2 = w * w
        return w2 * (3 * self.a3 + w2 * (5 * self.a5 + 7 * w2 * self.a7))


class FunctionGerm:
    """Wrap a raw germ callable (continuation- or curve-backed) with a
    finite-difference derivative and a trust radius."""

    def __init__(self, func, radius=0.3, a3=None):
        self.func = func
        self.radius = float(radius)
        self.a3 = a3

    def __call__(self, w):
        return self.func(w)

    def deriv(self, w, h=None):
        h = h or 1e-4 * max(abs(w), 0.05)
        d1 = (self.func(w + h) - self.func(w - h)) / (2 * h)
        d2 = (self.func(w + h / 2) - self.func(w - h / 2)) / h
        return (4 * d2 - d1) / 3


def check_odd(germ, radius=None, n=7, tol=1e-8):
    """Max |F(w) + F(-w)| over sampled pairs; the germ contract."""
    r = radius or germ.radius
    worst = 0.0
    for m in np.linspace(r / n, r, n):
        for d in (1, 1j, np.exp(0.7j)):
            w = d * m
            worst = max(worst, abs(germ(w) + germ(-w)))
    if worst > tol:
        raise ValueError(f"germ is not odd: |F(w)+F(-w)| up to {worst}")
    return worst


# ---------------------------------------------------------------------------
# holonomy lengths and the coefficient map

def uv_lengths(F, pt: DefPoint) -> HolonomyLengths:
    """Exact-formula holonomy lengths per geometry, plus regularized forms.

    Hyperbolic: u = i(pi + F(s - i t)), spherical: u from the two SU(2)
    factors at w = s +- t, Euclidean: the derivative formulas; in every
    case v has translation part t and rotation s.
    """
    s, tau = pt.s, pt.tau
    radius = getattr(F, "radius", None)
    if radius is not None and max(abs(s), np.sqrt(abs(tau))) > radius + 1e-12:
        raise TrustRadiusError(f"point {(s, tau)} outside trust radius {radius}")
    if tau > 0:
        t = np.sqrt(tau)
        z = F(s + 1j * t)
        u_reg = z.imag / t + 1j * (PI + z.real)
        u = z.imag + 1j * (PI + z.real)
        v = t + 1j * s
    elif tau < 0:
        t = np.sqrt(-tau)
        fp, fm = F(s + t), F(s - t)
        re = (complex(fp).real - complex(fm).real) / 2
        im = PI + (complex(fp).real + complex(fm).real) / 2
        u_reg = re / t + 1j * im
        u = re + 1j * im
        v = t + 1j * s
    else:
        fs = complex(F(s)).real
        dfs = complex(F.deriv(s)).real
        u_reg = dfs + 1j * (PI + fs)
        u = 1j * (PI + fs)
        v = 1j * s
    v_reg = 1 + 1j * s
    return HolonomyLengths(complex(u), complex(v), complex(u_reg), complex(v_reg))


def dehn_coefficients(F, pt: DefPoint) -> DehnCoefficients:
    """Solve p Re(u~) + q Re(v~) = 0, p Im(u~) + q Im(v~) = 2 pi."""
    L = uv_lengths(F, pt)
    a = np.array([[L.u_reg.real, L.v_reg.real],
                  [L.u_reg.imag, L.v_reg.imag]])
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if abs(det) < 1e-12:
        raise SingularSystemError(f"length system singular at {(pt.s, pt.tau)}")
    sol = np.linalg.solve(a, np.array([0.0, 2 * PI]))
    return DehnCoefficients(float(sol[0]), float(sol[1]))


def _pq(F, s, tau):
    c = dehn_coefficients(F, DefPoint(s, tau))
    return c.p, c.q


def jacobian(F, pt: DefPoint) -> float:
    """det d(p,q)/d(s,tau) by central differences, Richardson once."""
    s, tau = pt.s, pt.tau
    h = 1e-4 * max(1.0, abs(s), abs(tau))

    def det_fd(hh):
        ps_p, qs_p = _pq(F, s + hh, tau)
        ps_m, qs_m = _pq(F, s - hh, tau)
        pt_p, qt_p = _pq(F, s, tau + hh)
        pt_m, qt_m = _pq(F, s, tau - hh)
        dps, dqs = (ps_p - ps_m) / (2 * hh), (qs_p - qs_m) / (2 * hh)
        dpt, dqt = (pt_p - pt_m) / (2 * hh), (qt_p - qt_m) / (2 * hh)
        return dps * dqt - dpt * dqs

    return (4 * det_fd(h / 2) - det_fd(h)) / 3


# ---------------------------------------------------------------------------
# distinguished curves

def _newton_1d(fun, x0, rel_scale, itmax=60):
    x = x0
    for _ in range(itmax):
        f = fun(x)
        h = 1e-5 * max(abs(x), rel_scale)
        df = (fun(x + h) - fun(x - h)) / (2 * h)
        step = -f / df
        x += step
        if abs(step) < 1e-14 * max(1e-6, abs(x)) + 1e-18:
            break
    return x


def fold_curve(F, s_samples):
    """The fold locus J = 0 near tau = -9 s^2 and its (p, q) image.

    Returns a list of (s, tau*, p, q); samples where the 1-D Newton fails
    are skipped (reported in the .skipped attribute of the result list).
    """
    out = []
    skipped = []
    for s in s_samples:
        tau0 = -9 * s * s
        try:
            tau = _newton_1d(lambda t: jacobian(F, DefPoint(s, t)), tau0, s * s)
        except (FloatingPointError, ZeroDivisionError):
            skipped.append(s)
            continue
        if not np.isfinite(tau) or abs(tau - tau0) > 8 * s * s + 1e-12:
            skipped.append(s)
            continue
        p, q = _pq(F, s, tau)
        out.append((float(s), float(tau), p, q))
    result = FoldResult(out)
    result.skipped = skipped
    return result


class FoldResult(list):
    """Fold samples with the fitted leading coefficient of tau*(s)/s^2."""

    skipped = ()

    def leading_coefficient(self):
        s = np.array([r[0] for r in self])
        tau = np.array([r[1] for r in self])
        return float(np.polyfit(s, tau / s ** 2, 1)[1])


def g_curve(F, s_samples):
    """The Euclidean boundary curve: closed forms
    p = 2 pi / (pi + F(s) - s F'(s)), q = -p F'(s)."""
    out = []
    for s in s_samples:
        fs = complex(F(s)).real
        dfs = complex(F.deriv(s)).real
        p = 2 * PI / (PI + fs - s * dfs)
        q = -p * dfs
        out.append((float(s), p, q))
    return out


def invert_dehn(F, target: DehnCoefficients, seeds=None, tol=1e-10,
                dedupe=1e-6, smax=0.25, taumax=0.05):
    """All deformation-space preimages of a (p, q) target.

    Gauss-Newton from a seed grid over the half-disc; solutions are
    deduplicated, restricted to s >= 0 and verified by forward evaluation.
    """
    if seeds is None:
        seeds = [(s, tau)
                 for s in np.linspace(0.0, smax, 6)
                 for tau in np.linspace(-taumax, taumax, 9)]
    tgt = np.array([target.p, target.q])
    found = []
    for s0, tau0 in seeds:
        s, tau = float(s0), float(tau0)
        ok = False
        for _ in range(60):
            try:
                p, q = _pq(F, s, tau)
            except (TrustRadiusError, SingularSystemError):
                break
            r = np.array([p, q]) - tgt
            if np.abs(r).max() < tol:
                ok = True
                break
            h = 1e-6 * max(1.0, abs(s), abs(tau))
            try:
                ps1, qs1 = _pq(F, s + h, tau)
                ps2, qs2 = _pq(F, s - h, tau)
                pt1, qt1 = _pq(F, s, tau + h)
                pt2, qt2 = _pq(F, s, tau - h)
            except (TrustRadiusError, SingularSystemError):
                break
            J = np.array([[(ps1 - ps2) / (2 * h), (pt1 - pt2) / (2 * h)],
                          [(qs1 - qs2) / (2 * h), (qt1 - qt2) / (2 * h)]])
            try:
                step = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError:
                break
            s, tau = s + step[0], tau + step[1]
            if not (np.isfinite(s) and np.isfinite(tau)):
                break
            if max(abs(s), abs(tau)) > 1.0:
                break
        if not ok or s < -1e-9:
            continue
        s = max(s, 0.0)
        pt = DefPoint(s, tau)
        c = dehn_coefficients(F, pt)
        if max(abs(c.p - target.p), abs(c.q - target.q)) > 1e-8:
            continue
        if any(abs(s - f.s) < dedupe and abs(tau - f.tau) < dedupe for f in found):
            continue
        found.append(pt)
    if not found:
        raise SingularSystemError(f"no preimage found for {(target.p, target.q)}")
    return sorted(found, key=lambda d: (d.s, d.tau))


# ---------------------------------------------------------------------------
# asymptotic limits

def _ladder_extrapolate(xs, ys, label):
    """Fit y = c0 + c1 x and return c0; the ladder must be consistent."""
    c1, c0 = np.polyfit(xs, ys, 1)
    # successive-estimate consistency: drop the largest x and refit
    c0_inner = np.polyfit(xs[:-1], ys[:-1], 1)[1] if len(xs) > 3 else c0
    if abs(c0_inner - c0) > 0.05 * max(abs(c0), 1e-12):
        raise LadderError(f"{label} ladder not converged: {c0} vs {c0_inner}")
    return float(c0)


def asymptotic_limits(F, s_max=0.04, rungs=7):
    """Extrapolated fold and Euclidean-curve limits, against the closed form.

    lim_f = (2 - f(q)) / |q|^{3/2} along the fold image, lim_g analogously
    along the Euclidean curve, both as q -> 0-; compared with
    4 l0^{3/2} / (9 * 3^{1/4} * pi), l0 = sqrt(3) / (2 a3^{1/3}).
    """
    a3 = getattr(F, "a3", None)
    if a3 is None or a3 <= 0:
        raise ValueError("asymptotic limits need a validated germ with a3 > 0")
    ss = np.array([s_max / 2 ** k for k in range(rungs)])

    fold = fold_curve(F, ss)
    qf = np.array([r[3] for r in fold])
    pf = np.array([r[2] for r in fold])
    lim_f = _ladder_extrapolate(np.sqrt(np.abs(qf)), (2 - pf) / np.abs(qf) ** 1.5,
                                "fold-limit")

    g = g_curve(F, ss)
    qg = np.array([r[2] for r in g])
    pg = np.array([r[1] for r in g])
    lim_g = _ladder_extrapolate(np.sqrt(np.abs(qg)), (pg - 2) / np.abs(qg) ** 1.5,
                                "g-limit")

    l0 = np.sqrt(3.0) / (2 * a3 ** (1.0 / 3.0))
    closed_form = 4 * l0 ** 1.5 / (9 * 3 ** 0.25 * PI)
    return {"lim_f": lim_f, "lim_g": lim_g, "l0": float(l0),
            "closed_form": float(closed_form)}
