"""Numerical representation variety: the binary dihedral base representation,
Newton continuation along the local parameter w inside the slice gauge, and
the odd germ F(w) with its cubic coefficient.

The slice gauge keeps rho(meridian) on the e1 axis and kills the e2
component of a chosen even generator g0; w is imposed through the trace
formula  w = 2 arccos(I_{lm}/2) - 2 arccos(I_m/2).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import liealg
from .liealg import IDENT, E1, E3, RepresentationPoint, evaluate_word, sl2_inverse
from .presentation import Word, exponent_sum_matrix, free_reduce

NEWTON_TOL = 1e-12
NEWTON_ITMAX = 50
MIN_STEP = 1e-6


class NoGradingError(ValueError):
    """No Z/2 grading with an odd meridian exists (abelian-type input)."""


class CongruenceError(ValueError):
    """The dihedral angle congruences have no isolated solution."""


class NewtonError(RuntimeError):
    """Newton correction failed to converge."""


class UnstableFitError(RuntimeError):
    """Odd-series fit moved by more than 1% under radius halving."""


class BranchCollisionError(RuntimeError):
    """Several plane-curve roots too close to 0 to separate branches."""

    def __init__(self, message, roots):
        super().__init__(message)
        self.roots = list(roots)


# ---------------------------------------------------------------------------
# theta gradings and dihedral congruences

def theta_gradings(pres):
    """All Z/2 gradings of the generators killing the relators with an odd
    meridian, as tuples of 0/1 per generator."""
    n = len(pres.generators)
    rows = [[e % 2 for e in row] for row in exponent_sum_matrix(pres)]
    sols = []
    for bits in range(2 ** n):
        theta = [(bits >> i) & 1 for i in range(n)]
        if any(sum(r * t for r, t in zip(row, theta)) % 2 for row in rows):
            continue
        if sum(theta[g] * e for g, e in pres.meridian) % 2 != 1:
            continue
        if sum(theta[g] * e for g, e in pres.longitude) % 2 != 0:
            continue
        sols.append(tuple(theta))
    if not sols:
        raise NoGradingError("no Z/2 grading with odd meridian and even longitude")
    return sols


def _dihedral_eval(word, theta, ngens):
    """Evaluate a word in the symbolic binary dihedral group.

    Elements are (eps, form) for X^eps * exp(form * e3), eps in {0,1}, with
    `form` an affine-linear expression (const, coeffs) over the generator
    angles; const counts multiples of pi (exact Fractions).  Generator g
    contributes (theta_g, x_g).
    """
    eps, const, coeffs = 0, Fraction(0), [Fraction(0)] * ngens

    def mul(e2, c2, f2):
        nonlocal eps, const, coeffs
        # (eps, d) * (e2, d2) = (eps xor e2, d2 + (-1)^{e2} d + 2pi eps e2)
        sign = -1 if e2 else 1
        const2 = c2 + sign * const + (Fraction(2) if eps and e2 else 0)
        coeffs2 = [a2 + sign * a for a, a2 in zip(coeffs, f2)]
        eps, const, coeffs = eps ^ e2, const2, coeffs2

    for g, e in word:
        unit = [Fraction(0)] * ngens
        unit[g] = Fraction(1)
        if e > 0:
            for _ in range(e):
                mul(theta[g], Fraction(0), unit)
        else:
            # inverse of (t, x_g): even -> (0, -x_g); odd -> (1, x_g - 2pi)
            t = theta[g]
            inv_c = Fraction(-2) if t else Fraction(0)
            inv_f = [u if t else -u for u in unit]
            for _ in range(-e):
                mul(t, inv_c, inv_f)
    return eps, const, coeffs


def _smith_normal_form(M):
    """Smith normal form over Z: returns (U, D, V) with U M V = D."""
    M = [row[:] for row in M]
    m, n = len(M), len(M[0]) if M else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_op(i, j, k):  # row_i += k * row_j
        for c in range(n):
            M[i][c] += k * M[j][c]
        for c in range(m):
            U[i][c] += k * U[j][c]

    def col_op(i, j, k):  # col_i += k * col_j
        for r in range(m):
            M[r][i] += k * M[r][j]
        for r in range(n):
            V[r][i] += k * V[r][j]

    def swap_rows(i, j):
        M[i], M[j] = M[j], M[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in range(m):
            M[r][i], M[r][j] = M[r][j], M[r][i]
        for r in range(n):
            V[r][i], V[r][j] = V[r][j], V[r][i]

    t = 0
    while t < min(m, n):
        # find pivot
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if M[i][j] and (piv is None or abs(M[i][j]) < abs(M[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        again = True
        while again:
            again = False
            for i in range(t + 1, m):
                if M[i][t]:
                    row_op(i, t, -(M[i][t] // M[t][t]))
                    if M[i][t]:
                        swap_rows(t, i)
                        again = True
            for j in range(t + 1, n):
                if M[t][j]:
                    col_op(j, t, -(M[t][j] // M[t][t]))
                    if M[t][j]:
                        swap_cols(t, j)
                        again = True
        t += 1
    return U, M, V


def _solve_congruences(C, b, modulus=4):
    """All solutions x (mod `modulus`) of C x = b, C integer, b Fractions.

    Raises CongruenceError when the solution set is empty or positive
    dimensional (a free angle).
    """
    m = len(C)
    n = len(C[0]) if C else 0
    if n == 0:
        return [()]
    if m == 0:
        raise CongruenceError("no constraints: dihedral angles are free")
    U, D, V = _smith_normal_form(C)
    Ub = [sum(Fraction(U[i][j]) * b[j] for j in range(m)) for i in range(m)]
    ys = [[]]
    rank = 0
    for i in range(n):
        d = D[i][i] if i < m else 0
        if d:
            rank += 1
            base = Ub[i] / d
            step = Fraction(modulus, abs(d))
            choices = [(base + step * k) % modulus for k in range(abs(d))]
            ys = [y + [c] for y in ys for c in choices]
        else:
            rhs = Ub[i] if i < m else Fraction(0)
            if i < m and rhs % modulus != 0:
                return []
            raise CongruenceError("free dihedral angle: solution set is not isolated")
    for i in range(n, m):
        if Ub[i] % modulus != 0:
            return []
    sols = set()
    for y in ys:
        x = tuple(sum(Fraction(V[i][j]) * y[j] for j in range(n)) % modulus
                  for i in range(n))
        sols.add(x)
    return sorted(sols)


@dataclass
class DihedralCandidate:
    """One solution of the angle congruences, angles in units of pi."""

    theta: tuple
    angles: tuple           # Fractions, units of pi, mod 4
    rep: RepresentationPoint

    def has_slice_generator(self):
        """An even generator with exp(angle e3) non-central exists (the g0
        of the slice gauge)."""
        return self.slice_generator() is not None

    def slice_generator(self):
        for t, a, g in zip(self.theta, self.angles, range(len(self.angles))):
            if t == 0 and a % 2 != 0:
                return g
        return None


def _candidate_rep(pres, theta, angles):
    X = liealg.exp_e1(np.pi)
    images = {}
    for name, t, a in zip(pres.names, theta, angles):
        m = liealg.exp_e3(float(a) * np.pi)
        if t:
            m = X @ m
        images[name] = m
    rep = RepresentationPoint(images)
    rep.residual = liealg.relator_residual(rep, pres)
    return rep


def dihedral_candidates(pres):
    """All binary dihedral base representations solving the relator
    congruences, normalized by rho(meridian) = exp(pi e1) and
    trace(rho(longitude)) = +2, deduplicated up to the angle sign flip."""
    out = []
    ngens = len(pres.generators)
    for theta in theta_gradings(pres):
        C, b = [], []
        words = list(pres.relators)
        for w in words:
            eps, const, coeffs = _dihedral_eval(w, theta, ngens)
            if eps:  # cannot happen for a valid grading
                continue
            C.append([int(c) for c in coeffs])
            b.append(-const)
        # normalizations: meridian angle == 0, longitude angle == 0 (mod 4pi)
        for w in (pres.meridian, pres.longitude):
            eps, const, coeffs = _dihedral_eval(w, theta, ngens)
            C.append([int(c) for c in coeffs])
            b.append(-const)
        if any(any(c % 1 for c in row) for row in C):
            raise CongruenceError("non-integer congruence coefficients")
        try:
            sols = _solve_congruences(C, b)
        except CongruenceError:
            continue
        seen = set()
        for x in sols:
            flip = tuple((-a) % 4 for a in x)
            if flip in seen:
                continue
            seen.add(x)
            out.append(DihedralCandidate(theta, x, _candidate_rep(pres, theta, x)))
    if not out:
        raise CongruenceError("no dihedral congruence solution")
    out.sort(key=lambda c: c.angles)
    return out


def dihedral_base_rep(pres, germ_filter=True):
    """The selected binary dihedral base representation.

    Candidates are filtered by: relator residual, existence of the slice
    generator g0, and (when `germ_filter`) a short continuation whose odd
    cubic fit has small residual, the computable stand-in for the geometric
    selection.  Remaining ties go to the lexicographically smallest angles.
    Returns (RepresentationPoint, list of all candidates).
    """
    cands = dihedral_candidates(pres)
    viable = [c for c in cands if c.rep.residual <= 1e-12 and c.has_slice_generator()]
    if not viable:
        raise CongruenceError("no candidate passes the residual/slice filters")
    if germ_filter and len(viable) > 1:
        scored = []
        for c in viable:
            try:
                samples = sample_germ(pres, c.rep, radius=0.2, per_ray=3)
                fit = fit_odd_series(samples, validate=False)
                rel = fit.residual / max(1e-300, max(abs(F) for _, F in samples))
                scored.append((rel, c))
            except (NewtonError, ValueError):
                continue
        good = [c for rel, c in scored if rel < 1e-3]
        if good:
            viable = good
    return viable[0].rep, cands


# ---------------------------------------------------------------------------
# slice Newton solve

@dataclass
class SlicePoint:
    w: complex
    rep: RepresentationPoint
    alpha: complex
    F: complex

    @property
    def residual(self):
        return self.rep.residual


class _SliceSystem:
    """Gauss-Newton system for the slice: unknowns are all matrix entries."""

    def __init__(self, pres, g0_index):
        self.pres = pres
        self.names = pres.names
        self.g0 = self.names[g0_index]
        self.mer = pres.meridian
        self.lonmer = free_reduce(pres.longitude * pres.meridian)

    def pack(self, rep):
        return np.concatenate([rep[n].reshape(4) for n in self.names])

    def unpack(self, u):
        images = {}
        for i, n in enumerate(self.names):
            images[n] = u[4 * i:4 * i + 4].reshape(2, 2)
        return images

    def w_value(self, images):
        tlm = np.trace(evaluate_word(images, self.lonmer, self.names))
        tm = np.trace(evaluate_word(images, self.mer, self.names))
        return 2 * np.arccos(tlm / 2) - 2 * np.arccos(tm / 2)

    def residual(self, u, w_target):
        images = self.unpack(u)
        out = []
        for r in self.pres.relators:
            d = evaluate_word(images, r, self.names) - IDENT
            out.extend(d.reshape(4))
        for n in self.names:
            m = images[n]
            out.append(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0] - 1)
        merim = evaluate_word(images, self.mer, self.names)
        _, _, p2, p3 = liealg.axis_e1_components(merim)
        out.append(p2)
        out.append(p3)
        out.append(liealg.axis_e1_components(images[self.g0])[2])
        out.append(self.w_value(images) - w_target)
        return np.array(out)

    def jacobian(self, u, w_target, h=1e-7):
        cols = []
        for k in range(len(u)):
            up = u.copy()
            up[k] += h
            um = u.copy()
            um[k] -= h
            cols.append((self.residual(up, w_target) - self.residual(um, w_target)) / (2 * h))
        return np.array(cols).T

    def newton(self, u0, w_target, tol=NEWTON_TOL, itmax=NEWTON_ITMAX):
        u = u0.copy()
        for _ in range(itmax):
            F = self.residual(u, w_target)
            if np.abs(F).max() < tol:
                return u
            J = self.jacobian(u, w_target)
            du, *_ = np.linalg.lstsq(J, -F, rcond=None)
            if not np.all(np.isfinite(du)):
                raise NewtonError(f"non-finite Newton step at w={w_target}")
            u = u + du
        final = np.abs(self.residual(u, w_target)).max()
        if final < 1e-9:
            return u
        raise NewtonError(f"Newton stalled at w={w_target} (residual {final:.2e})")


def _pick_g0(pres, rep):
    """First even generator whose image is a non-central e3 rotation."""
    for i, n in enumerate(pres.names):
        m = rep[n]
        _, p1, p2, p3 = liealg.axis_e1_components(m)
        if abs(p1) < 1e-9 and abs(p2) < 1e-9 and abs(p3) > 1e-6:
            return i
    raise ValueError("no slice generator: every even image is central")


def _make_point(system, u, alpha_ref):
    images = system.unpack(u)
    rep = RepresentationPoint(images)
    rep.residual = liealg.relator_residual(rep, system.pres)
    merim = evaluate_word(images, system.mer, system.names)
    alpha = liealg.e1_axis_angle(merim, reference=alpha_ref)
    w = system.w_value(images)
    return SlicePoint(w, rep, alpha, alpha - np.pi)


def solve_slice(pres, target_w, seed, system=None):
    """Newton-correct from a seed SlicePoint to the slice point at target_w."""
    if seed.rep.residual > 1e-6:
        raise ValueError(f"seed residual {seed.rep.residual} too large")
    system = system or _SliceSystem(pres, _pick_g0(pres, seed.rep))
    u = system.newton(system.pack(seed.rep).astype(complex), target_w)
    return _make_point(system, u, seed.alpha)


def base_slice_point(pres, rep0):
    """Wrap a base representation as the w = 0 slice point."""
    merim = evaluate_word(rep0, pres.meridian, pres.names)
    alpha = liealg.e1_axis_angle(merim, reference=np.pi)
    return SlicePoint(0.0, rep0, alpha, alpha - np.pi)


def continue_path(pres, w_samples, rep0=None, seed=None, max_halvings=20):
    """Threaded continuation through the given w samples (starting at 0).

    Steps are halved automatically on Newton failure, down to MIN_STEP.
    Returns the list of converged SlicePoints, one per requested sample.
    """
    if seed is None:
        if rep0 is None:
            rep0, _ = dihedral_base_rep(pres)
        seed = base_slice_point(pres, rep0)
    system = _SliceSystem(pres, _pick_g0(pres, seed.rep))
    out = []
    current = seed
    for wt in w_samples:
        if abs(complex(wt)) < 1e-300 and abs(current.w) < 1e-300:
            out.append(current)
            continue
        stack = [complex(wt)]
        halved = 0
        while stack:
            target = stack[-1]
            try:
                nxt = solve_slice(pres, target, current, system=system)
            except NewtonError:
                halved += 1
                if halved > max_halvings or abs(target - current.w) < MIN_STEP:
                    raise NewtonError(
                        f"continuation stuck between w={current.w} and w={target}")
                stack.append(current.w + (target - current.w) / 2)
                continue
            stack.pop()
            current = nxt
        out.append(current)
    return out


def F_of_w(pt: SlicePoint) -> complex:
    """The germ value F = alpha - pi at a converged slice point."""
    return pt.F


# ---------------------------------------------------------------------------
# germ sampling and odd-series fitting

def germ_rays(radius, per_ray):
    """Sample w values on the four half-axes, |w| in (0, radius]."""
    mags = np.linspace(radius / per_ray, radius, per_ray)
    ws = []
    for direction in (1, -1, 1j, -1j):
        ws.extend(direction * m for m in mags)
    return ws


def sample_germ(pres, rep0, radius=0.3, per_ray=6):
    """Continue along the four half-axes; returns [(w, F)] samples."""
    seed = base_slice_point(pres, rep0)
    samples = []
    mags = np.linspace(radius / per_ray, radius, per_ray)
    for direction in (1, -1, 1j, -1j):
        pts = continue_path(pres, [direction * m for m in mags], seed=seed)
        samples.extend((p.w, p.F) for p in pts)
    return samples


@dataclass
class OddSeries:
    """Odd polynomial germ fit a3 w^3 + a5 w^5 + a7 w^7."""

    a3: float
    a5: float
    a7: float
    residual: float
    w_max: float
    stable: bool = True
    orientation: int = 1    # +1: as sampled; -1: mirrored to make a3 > 0

    def __call__(self, w):
        w2 = w * w
        return w * w2 * (self.a3 + w2 * (self.a5 + w2 * self.a7))

    def deriv(self, w):
        w2 = w * w
        return w2 * (3 * self.a3 + w2 * (5 * self.a5 + 7 * w2 * self.a7))


def _lstsq_odd(samples):
    ws = np.array([complex(w) for w, _ in samples])
    Fs = np.array([complex(F) for _, F in samples])
    A = np.stack([ws ** 3, ws ** 5, ws ** 7], axis=1)
    M = np.vstack([A.real, A.imag])
    rhs = np.concatenate([Fs.real, Fs.imag])
    coef, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    res = float(np.abs(M @ coef - rhs).max())
    return coef, res


def fit_odd_series(samples, validate=True) -> OddSeries:
    """Least squares odd fit on {w^3, w^5, w^7}.

    Needs at least 8 samples placed symmetrically about 0.  With `validate`,
    refitting on the samples inside half the radius must move a3 by <= 1%.
    """
    if len(samples) < 8:
        raise ValueError("need at least 8 samples")
    ws = [complex(w) for w, _ in samples]
    wset = set(np.round(np.array(ws), 12))
    if any(np.round(-w, 12) not in wset for w in ws):
        raise ValueError("samples must be symmetric about 0")
    coef, res = _lstsq_odd(samples)
    wmax = max(abs(w) for w in ws)
    series = OddSeries(coef[0], coef[1], coef[2], res, wmax)
    if validate:
        inner = [(w, F) for w, F in samples if abs(complex(w)) <= wmax / 2]
        if len(inner) >= 8:
            coef2, _ = _lstsq_odd(inner)
            if abs(coef2[0] - coef[0]) > 0.01 * abs(coef[0]):
                raise UnstableFitError(
                    f"a3 moved from {coef[0]} to {coef2[0]} under radius halving")
    return series


def oriented_germ_fit(samples) -> OddSeries:
    """Fit and normalize orientation so the validated germ has a3 > 0.

    The geometric branch has a3 > 0; when the raw parametrization comes out
    mirrored (a3 < 0) the germ is relabeled w -> -w, i.e. F -> -F.
    """
    fit = fit_odd_series(samples)
    if fit.a3 < 0:
        mirrored = [(w, -F) for w, F in samples]
        fit = fit_odd_series(mirrored)
        fit.orientation = -1
    if fit.a3 <= 0:
        raise UnstableFitError("validated germ needs a3 > 0")
    return fit


# ---------------------------------------------------------------------------
# germ from the plane curve

def _curve_x_roots(P, y_value):
    """All roots in x of P(., y_value) via the companion matrix."""
    deg = P.degree("x")
    iy = P.vars.index("y")
    ix = P.vars.index("x")
    coeffs = np.zeros(deg + 1, dtype=complex)
    for k, c in P.terms.items():
        coeffs[deg - k[ix]] += complex(c) * y_value ** k[iy]
    return np.roots(coeffs)


def F_from_plane_curve(P, w, branch=-1, collision_tol=1e-6, _steps=None):
    """Germ value from the curve: solve P(x, 2 cos(w/2)) = 0 for the branch
    through x(0) = 0 and return F = -2 arcsin(x/2), F(0) = 0.

    `branch` is the sign of x for real positive w; the default (-1) is the
    geometric branch with a3 > 0.  Raises BranchCollisionError when several
    roots lie within `collision_tol` of 0 so the branches cannot be told
    apart.
    """
    base = P.evaluate({"x": 0.0, "y": 2.0})
    if abs(base) > 1e-9 * float(max(1, P.coefficient_scale())):
        raise ValueError("curve does not vanish at the base character (0, 2)")
    w = complex(w)
    if w == 0:
        return 0.0 + 0.0j
    y_val = 2 * np.cos(w / 2)
    roots = _curve_x_roots(P, y_val)
    near = sorted((r for r in roots if abs(r) < collision_tol), key=abs)
    if len(near) > 1:
        raise BranchCollisionError(
            f"{len(near)} roots within {collision_tol} of 0 at w={w}", near)
    # track the branch from a cubic seed; Newton in x on the polynomial
    a3_scale = _estimate_a3_scale(P)
    steps = _steps or max(8, int(abs(w) / 0.05) + 1)
    x = None
    for k in range(1, steps + 1):
        wk = w * k / steps
        yk = 2 * np.cos(wk / 2)
        seed = x if x is not None else branch * a3_scale * wk ** 3
        if abs(seed) == 0:
            seed = branch * a3_scale * wk ** 3
        x = _newton_root(P, seed, yk)
    return -2 * np.arcsin(x / 2)


def _estimate_a3_scale(P):
    """Leading-order |x| / |w|^3 from the curve's local (2,3) cusp at (0,2).

    Writing P = c_eta (y-2)^3 + c_x x^2 + ..., the branch is
    x ~ sqrt(-c_eta/c_x) (w^2/4)^{3/2}.
    """
    c_eta = P.terms.get((0, 3), Fraction(0))
    # x^2 coefficient at y = 2: sum over terms x^2 y^j of c * 2^j
    c_x = Fraction(0)
    for k, c in P.terms.items():
        if k[P.vars.index("x")] == 2:
            c_x += c * Fraction(2) ** k[P.vars.index("y")]
    if c_eta == 0 or c_x == 0:
        return 0.015625
    return float(np.sqrt(abs(float(c_eta / c_x)))) / 8


def _newton_root(P, x0, y_val):
    x = complex(x0)
    ix = P.vars.index("x")
    iy = P.vars.index("y")
    for _ in range(80):
        f = 0j
        d = 0j
        for k, c in P.terms.items():
            base = complex(c) * y_val ** k[iy]
            f += base * x ** k[ix]
            if k[ix]:
                d += base * k[ix] * x ** (k[ix] - 1)
        step = -f / d
        x += step
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    return x


def curve_germ_samples(P, radius=0.3, per_ray=6, w_min=0.05, branch=-1):
    """(w, F) samples of the plane-curve germ on the four half-axes.

    Magnitudes start at `w_min` to stay outside the branch-collision region
    around the base character.
    """
    mags = np.linspace(max(w_min, radius / per_ray), radius, per_ray)
    out = []
    for direction in (1, -1, 1j, -1j):
        for m in mags:
            w = direction * m
            out.append((w, F_from_plane_curve(P, w, branch=branch)))
    return out


def sample_characters(pres, rep0, rmap, ws):
    """Reduced-coordinate characters (x1, x2, x3) at continued slice points.

    `rmap` is the rewriting map from two_generator_reduction; x1, x2, x3 are
    the traces of the first kept generator, the second (the meridian), and
    their product.
    """
    seed = base_slice_point(pres, rep0)
    chars = []
    for w in ws:
        pts = continue_path(pres, [w], seed=seed)
        rep = pts[-1].rep
        # images of the two kept generators
        g1, g2 = _kept_images(pres, rep, rmap)
        chars.append((complex(np.trace(g1)), complex(np.trace(g2)),
                      complex(np.trace(g1 @ g2))))
    return chars


def _kept_images(pres, rep, rmap):
    """Matrices of the two kept generators (in reduced index order)."""
    by_index = {}
    for name, w in rmap.items():
        if len(w) == 1 and abs(w.letters[0][1]) == 1:
            idx, e = w.letters[0]
            if e == 1 and idx not in by_index:
                m = rep[name]
                by_index[idx] = m
    if set(by_index) != {0, 1}:
        raise ValueError("rewriting map does not expose the two kept generators")
    return by_index[0], by_index[1]
