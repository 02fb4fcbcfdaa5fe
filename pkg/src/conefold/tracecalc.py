"""Exact computer algebra: trace polynomials, character ideals, resultant
elimination to the plane curve P(x, y) = 0 in (x = I_m, y = I_l).

Coefficients are exact rationals throughout; floating point enters only in
the numeric sampling filter that strips extraneous factors.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import sympy as sp

from .presentation import Presentation, PresentationError, Word, free_reduce


class EliminationError(RuntimeError):
    """Elimination degenerated; records the stage at which it happened."""

    def __init__(self, message, stage=None):
        super().__init__(message + (f" [stage: {stage}]" if stage else ""))
        self.stage = stage


# ---------------------------------------------------------------------------
# MultiPoly

class MultiPoly:
    """Multivariate polynomial over Q: exponent-tuple -> Fraction, no zeros."""

    __slots__ = ("vars", "terms")

    def __init__(self, variables, terms=None):
        self.vars = tuple(variables)
        self.terms = {}
        for k, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                self.terms[tuple(k)] = c

    @classmethod
    def constant(cls, variables, c):
        return cls(variables, {(0,) * len(variables): Fraction(c)})

    @classmethod
    def variable(cls, variables, name):
        exps = [0] * len(variables)
        exps[list(variables).index(name)] = 1
        return cls(variables, {tuple(exps): Fraction(1)})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, MultiPoly) and self.vars == other.vars \
            and self.terms == other.terms

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            c2 = out.get(k, 0) + c
            if c2:
                out[k] = c2
            else:
                out.pop(k, None)
        return MultiPoly(self.vars, out)

    def __neg__(self):
        return MultiPoly(self.vars, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return MultiPoly(self.vars, {k: c * other for k, c in self.terms.items()})
        out = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                c = out.get(k, 0) + c1 * c2
                if c:
                    out[k] = c
                else:
                    out.pop(k, None)
        return MultiPoly(self.vars, out)

    __rmul__ = __mul__

    def _coerce(self, other):
        if isinstance(other, (int, Fraction)):
            return MultiPoly.constant(self.vars, other)
        if other.vars != self.vars:
            raise ValueError("variable mismatch")
        return other

    def degree(self, name=None):
        if not self.terms:
            return -1
        if name is None:
            return max(sum(k) for k in self.terms)
        i = self.vars.index(name)
        return max(k[i] for k in self.terms)

    def evaluate(self, values):
        """Evaluate at a mapping name -> number (complex allowed)."""
        vals = [values[v] for v in self.vars]
        out = 0
        for k, c in self.terms.items():
            t = complex(c)
            for v, e in zip(vals, k):
                if e:
                    t *= v ** e
            out += t
        return out

    def coefficient_scale(self):
        return max((abs(c) for c in self.terms.values()), default=Fraction(0))

    def rename(self, mapping):
        """Rename/reorder variables; mapping old name -> new name."""
        newvars = tuple(mapping.get(v, v) for v in self.vars)
        return MultiPoly(newvars, self.terms)

    def serialize(self):
        """Plain-text monomial list 'coeff * x^i * y^j', deterministic order."""
        lines = []
        for k in sorted(self.terms, reverse=True):
            c = self.terms[k]
            parts = [str(c)]
            parts += [f"{v}^{e}" for v, e in zip(self.vars, k) if e]
            lines.append(" * ".join(parts))
        return "\n".join(lines) if lines else "0"

    def __repr__(self):
        return f"MultiPoly({self.vars}, {len(self.terms)} terms)"


TRACE_VARS = ("x1", "x2", "x3")


def to_sympy(p):
    syms = sp.symbols(p.vars)
    if p.is_zero():
        return sp.Integer(0)
    return sp.Poly.from_dict({k: sp.Rational(c) for k, c in p.terms.items()}, *syms).as_expr()


def from_sympy(expr, variables):
    syms = sp.symbols(variables)
    poly = sp.Poly(expr, *syms)
    terms = {}
    for mono, coeff in poly.terms():
        terms[tuple(int(e) for e in mono)] = Fraction(int(coeff.p), int(coeff.q))
    return MultiPoly(variables, terms)


# ---------------------------------------------------------------------------
# trace polynomials (Fricke reduction)

_trace_cache = {}


def _cyc_reduce(word):
    w = []
    for g, e in word:
        if not e:
            continue
        if w and w[-1][0] == g:
            e2 = w[-1][1] + e
            w.pop()
            if e2:
                w.append((g, e2))
        else:
            w.append((g, e))
    while len(w) > 1 and w[0][0] == w[-1][0]:
        g, e = w[0][0], w[0][1] + w[-1][1]
        w = w[1:-1]
        if e:
            w.insert(0, (g, e))
    return tuple(w)


def _canon(word):
    if not word:
        return word
    return min(word[i:] + word[:i] for i in range(len(word)))


def _power_trace(x, n, const2, mul, add, neg):
    t0, t1 = const2, x
    if n == 0:
        return t0
    for _ in range(n - 1):
        t0, t1 = t1, add(mul(x, t1), neg(t0))
    return t1


def _trace_word(word):
    """tr(word) as MultiPoly in (x1, x2, x3); word uses generator ids 0, 1."""
    word = _canon(_cyc_reduce(word))
    if word in _trace_cache:
        return _trace_cache[word]

    X = [MultiPoly.variable(TRACE_VARS, v) for v in TRACE_VARS]
    const2 = MultiPoly.constant(TRACE_VARS, 2)
    mul = MultiPoly.__mul__
    add = MultiPoly.__add__
    neg = MultiPoly.__neg__

    if not word:
        res = const2
    elif len(word) == 1:
        g, e = word[0]
        res = _power_trace(X[g], abs(e), const2, mul, add, neg)
    else:
        res = None
        for i, (g, e) in enumerate(word):
            if abs(e) >= 2:
                rest = word[i + 1:] + word[:i]
                s = 1 if e > 0 else -1
                t1 = _trace_word(((g, e - s),) + rest)
                t2 = _trace_word(((g, e - 2 * s),) + rest)
                res = add(mul(X[g], t1), neg(t2))
                break
        if res is None:
            for i, (g, e) in enumerate(word):
                if e == -1:
                    rest = word[i + 1:] + word[:i]
                    t1 = _trace_word(rest)
                    t2 = _trace_word(((g, 1),) + rest)
                    res = add(mul(X[g], t1), neg(t2))
                    break
        if res is None:
            # all exponents +1 and cyclically alternating: (AB)^n
            res = _power_trace(X[2], len(word) // 2, const2, mul, add, neg)

    _trace_cache[word] = res
    return res


def trace_polynomial(w: Word, gen_pair=(0, 1)) -> MultiPoly:
    """Trace of w(A, B) as a polynomial in (x1, x2, x3) = (trA, trB, trAB).

    `gen_pair` names the word's generator indices playing (A, B); a word
    using any other generator index is rejected.
    """
    relabel = {gen_pair[0]: 0, gen_pair[1]: 1}
    letters = []
    for g, e in w:
        if g not in relabel:
            raise ValueError(f"word uses generator index {g} outside the designated pair")
        letters.append((relabel[g], e))
    return _trace_word(_cyc_reduce(tuple(letters)))


# ---------------------------------------------------------------------------
# two-generator reduction

def _substitute_word(w, tables):
    out = []
    for g, e in w:
        rep = tables[g]
        if rep is None:
            out.append((g, e))
        else:
            piece = rep if e > 0 else rep.inverse()
            out.extend(piece.letters * abs(e))
    return free_reduce(Word(tuple(out)))


def two_generator_reduction(pres, subst):
    """Rewrite onto the two kept generators using the declared substitution.

    `subst` maps surplus generator names to words in the kept generators.
    Returns (reduced Presentation, rewriting map name -> Word in kept gens).
    """
    surplus = set(subst)
    kept = [g.name for g in pres.generators if g.name not in surplus]
    if len(kept) != 2:
        raise PresentationError(
            f"substitution keeps {len(kept)} generators, need exactly 2")
    kept_index = {n: i for i, n in enumerate(kept)}

    # a substitution word may only use kept generators
    tables = []
    for i, g in enumerate(pres.generators):
        if g.name in surplus:
            w = subst[g.name]
            letters = []
            for gi, e in w:
                name = pres.names[gi]
                if name not in kept_index:
                    raise PresentationError(
                        f"substitution for {g.name!r} uses surplus generator {name!r}")
                letters.append((kept_index[name], e))
            tables.append(Word(tuple(letters)))
        else:
            tables.append(None)

    def rewrite(w):
        out = []
        for gi, e in w:
            t = tables[gi]
            if t is None:
                out.append((kept_index[pres.names[gi]], e))
            else:
                piece = t if e > 0 else t.inverse()
                out.extend(piece.letters * abs(e))
        return free_reduce(Word(tuple(out)))

    relators = tuple(r2 for r2 in (rewrite(r) for r in pres.relators) if len(r2))
    from .presentation import Generator
    reduced = Presentation(tuple(Generator(n) for n in kept), relators,
                           rewrite(pres.meridian), rewrite(pres.longitude))
    rmap = {}
    for i, g in enumerate(pres.generators):
        t = tables[i]
        rmap[g.name] = t if t is not None else Word(((kept_index[g.name], 1),))
    return reduced, rmap


# ---------------------------------------------------------------------------
# character ideal

def character_ideal(pres):
    """The classical trace conditions: per relator r, the polynomials
    tr(r) - 2, tr(r A) - x1, tr(r B) - x2."""
    if len(pres.generators) != 2:
        raise PresentationError("character ideal needs a 2-generator presentation")
    X1 = MultiPoly.variable(TRACE_VARS, "x1")
    X2 = MultiPoly.variable(TRACE_VARS, "x2")
    out = []
    for r in pres.relators:
        rl = tuple(r.letters)
        out.append(_trace_word(rl) - MultiPoly.constant(TRACE_VARS, 2))
        out.append(_trace_word(_cyc_reduce(rl + ((0, 1),))) - X1)
        out.append(_trace_word(_cyc_reduce(rl + ((1, 1),))) - X2)
    return out


# ---------------------------------------------------------------------------
# resultants (sympy backed: subresultant PRS, exact rationals)

def resultant(f: MultiPoly, g: MultiPoly, var: str) -> MultiPoly:
    if f.degree(var) <= 0 or g.degree(var) <= 0:
        raise ValueError(f"resultant needs positive degree in {var!r}")
    allvars = tuple(dict.fromkeys(f.vars + g.vars))
    fe = to_sympy(MultiPoly(allvars, _embed(f, allvars)))
    ge = to_sympy(MultiPoly(allvars, _embed(g, allvars)))
    r = sp.resultant(fe, ge, sp.Symbol(var))
    keep = tuple(v for v in allvars if v != var)
    if not keep:
        keep = (var,)  # constant result; keep a variable slot
    return from_sympy(sp.expand(r), keep)


def _embed(p, allvars):
    pos = [allvars.index(v) for v in p.vars]
    out = {}
    for k, c in p.terms.items():
        key = [0] * len(allvars)
        for e, i in zip(k, pos):
            key[i] = e
        out[tuple(key)] = c
    return out


# ---------------------------------------------------------------------------
# plane curve elimination

def _balanced_split(relator):
    """Split the cyclic relator as W1 * W2^-1 with balanced syllable lengths."""
    letters = []
    for g, e in relator:
        letters.extend([(g, 1 if e > 0 else -1)] * abs(e))
    n = len(letters)
    best = None
    for rot in range(n):
        w = letters[rot:] + letters[:rot]
        for cut in range(1, n):
            w1 = w[:cut]
            w2 = [(g, -e) for g, e in reversed(w[cut:])]
            score = max(cut, n - cut) * 16 + _split_weight(w1) + _split_weight(w2)
            if best is None or score < best[0]:
                best = (score, w1, w2)
    w1 = free_reduce(Word(tuple(best[1])))
    w2 = free_reduce(Word(tuple(best[2])))
    return w1, w2


def _split_weight(letters):
    d = {}
    for g, e in letters:
        d[g] = d.get(g, 0) + abs(e)
    out = 1
    for v in d.values():
        out *= (v + 1)
    return out


def _vanishes_at(f, syms, samples, tol):
    """True when f vanishes at every sample, relative to the local term scale."""
    poly = sp.Poly(f, *syms)
    monos = poly.monoms()
    coeffs = [complex(c) for c in poly.coeffs()]
    for s in samples:
        val = 0.0
        scale = 1.0
        for mono, c in zip(monos, coeffs):
            t = c
            for v, e in zip(s, mono):
                if e:
                    t *= v ** e
            val += t
            scale = max(scale, abs(t))
        if abs(val) > tol * scale:
            return False
    return True


def _kept_factors(expr, syms, samples, tol):
    """Irreducible factors of expr that vanish at every sample point."""
    return [f for f, _ in sp.factor_list(expr)[1]
            if _vanishes_at(f, syms, samples, tol)]


def plane_curve(pres, subst, samples, elimination_order=("x3", "x1", "x2"),
                tol=1e-6):
    """Eliminate to the squarefree plane curve P(x, y) with x = I_m, y = I_l.

    `samples` are numerically continued true characters, as (x1, x2, x3)
    triples for the reduced two-generator presentation; they drive the
    removal of extraneous factors at every elimination stage.

    The relator is rewritten as a balanced W1 = W2 and the constraints
    tr(W1 u) = tr(W2 u), u in {1, A, B, AB} (equivalent to the character
    ideal on the irreducible locus) keep resultant degrees small.
    """
    reduced, _ = two_generator_reduction(pres, subst)
    if len(reduced.relators) != 1:
        raise EliminationError(
            f"need exactly one relator after reduction, got {len(reduced.relators)}"
            + ("" if reduced.relators else " (free group: projection is 2-dimensional)"),
            stage="reduction")
    relator = reduced.relators[0]

    syms = sp.symbols(("x1", "x2", "x3", "x", "y"))
    x1s, x2s, x3s, xs, ys = syms

    w1, w2 = _balanced_split(relator)
    eqs = []
    for u in (Word(()), Word(((0, 1),)), Word(((1, 1),)), Word(((0, 1), (1, 1)))):
        lhs = _trace_word(_cyc_reduce(tuple((w1 * u).letters)))
        rhs = _trace_word(_cyc_reduce(tuple((w2 * u).letters)))
        e = to_sympy(lhs - rhs)
        if e != 0:
            eqs.append(sp.expand(e))

    X = to_sympy(trace_polynomial(reduced.meridian))
    Y = to_sympy(trace_polynomial(reduced.longitude))
    eqs.append(sp.expand(ys - Y))

    elim = list(elimination_order)
    # meridian trace that is itself a coordinate: substitute instead of adjoining
    if X in (x1s, x2s):
        sub = {X: xs}
        eqs = [e.subs(sub) for e in eqs]
        elim = [v for v in elim if sp.Symbol(v) != X]
    else:
        eqs.append(sp.expand(xs - X))

    # augment samples with their (x, y) values so filters work at every stage
    full_samples = []
    for s in samples:
        vals = {"x1": s[0], "x2": s[1], "x3": s[2]}
        xv = trace_polynomial(reduced.meridian).evaluate(vals)
        yv = trace_polynomial(reduced.longitude).evaluate(vals)
        full_samples.append((s[0], s[1], s[2], xv, yv))
    if not full_samples:
        raise EliminationError("no sample characters supplied", stage="sampling")

    for var in elim:
        v = sp.Symbol(var)
        with_v = [e for e in eqs if sp.degree(e, v) > 0]
        without = [e for e in eqs if sp.degree(e, v) <= 0 and e != 0]
        if not with_v:
            continue
        if len(with_v) == 1:
            raise EliminationError(f"only one equation involves {var}", stage=var)
        with_v.sort(key=lambda e: sp.degree(e, v))
        pivot = with_v[0]
        new = []
        for other in with_v[1:]:
            r = sp.expand(sp.resultant(pivot, other, v))
            if r == 0:
                continue
            new.extend(_kept_factors(r, syms, full_samples, tol))
        if not new:
            raise EliminationError("elimination produced only zero resultants",
                                   stage=var)
        eqs = list(dict.fromkeys(sp.expand(e) for e in new)) + without

    finals = [e for e in eqs if e.free_symbols <= {xs, ys} and e != 0]
    if not finals:
        raise EliminationError("no equations purely in (x, y) remain", stage="final")
    g = finals[0]
    for e in finals[1:]:
        g = sp.gcd(g, e)
    if g.is_number:
        raise EliminationError("final gcd is constant", stage="final")

    kept = _kept_factors(g, syms, full_samples, tol)
    if not kept:
        raise EliminationError("no factor vanishes at the sampled characters",
                               stage="final")
    prod = sp.expand(sp.prod(kept))  # squarefree by construction (distinct irreducibles)
    P = from_sympy(prod, ("x", "y"))
    return _normalize_curve(P)


def _normalize_curve(P):
    """Integer content stripped, leading (lex-max) coefficient positive."""
    dens = 1
    for c in P.terms.values():
        dens = dens * c.denominator // gcd(dens, c.denominator)
    terms = {k: c * dens for k, c in P.terms.items()}
    nums = 0
    for c in terms.values():
        nums = gcd(nums, abs(c.numerator))
    if nums:
        terms = {k: c / nums for k, c in terms.items()}
    lead = max(terms)
    if terms[lead] < 0:
        terms = {k: -c for k, c in terms.items()}
    return MultiPoly(P.vars, terms)


def printed_reference_curve():
    """The published plane curve for the bundled example, with its flagged
    '(7 - 5 y^2)' possibly-misprinted term; see compare_with_printed."""
    x = MultiPoly.variable(("x", "y"), "x")
    y = MultiPoly.variable(("x", "y"), "y")
    one = MultiPoly.constant(("x", "y"), 1)
    ym2 = y - 2 * one
    inner = (64 * one - 16 * x * x + x * x * x * x
             + ym2 * (32 * one - 5 * x * x)
             + ym2 * ym2 * (7 * one - 5 * y * y))
    return _normalize_curve(ym2 * ym2 * ym2 + x * x * inner)


def corrected_reference_curve():
    """The published curve with the flagged term read as (7 - x^2)."""
    x = MultiPoly.variable(("x", "y"), "x")
    y = MultiPoly.variable(("x", "y"), "y")
    one = MultiPoly.constant(("x", "y"), 1)
    ym2 = y - 2 * one
    inner = (64 * one - 16 * x * x + x * x * x * x
             + ym2 * (32 * one - 5 * x * x)
             + ym2 * ym2 * (7 * one - x * x))
    return _normalize_curve(ym2 * ym2 * ym2 + x * x * inner)


def compare_with_printed(P):
    """Compare an eliminated curve with the published one.

    Returns a dict with keys 'matches_printed', 'matches_corrected',
    'flagged_term_only' (True when the only discrepancy is the published
    '(7 - 5 y^2)' term, which our elimination reads as '(7 - x^2)').
    """
    Pn = _normalize_curve(P)
    printed = printed_reference_curve()
    corrected = corrected_reference_curve()
    return {
        "matches_printed": Pn == printed,
        "matches_corrected": Pn == corrected,
        "flagged_term_only": Pn == corrected and Pn != printed,
    }
