"""SL2(C) / SU(2) matrix kernel: the su(2) basis, exponentials, word
evaluation and branch-threaded complex lengths.

The basis is realized as e_j = -(i/2) sigma_j, so that exp(theta e3) is
diagonal with trace 2 cos(theta/2) and exp(pi e1) is the standard meridian
image of the binary dihedral representations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DET_TOL = 1e-10

IDENT = np.eye(2, dtype=complex)
_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
E1, E2, E3 = (-0.5j * s for s in _SIGMA)


class UnimodularError(ValueError):
    """Determinant strayed from 1 beyond tolerance."""


class ParabolicError(ValueError):
    """Complex length requested for a parabolic (trace +-2, non-central) element."""


class NoReferenceError(ValueError):
    """Complex length at a central element needs a reference branch."""


def basis_matrices():
    """The fixed su(2) basis (e1, e2, e3) with [e1,e2]=e3 and cyclic."""
    return E1.copy(), E2.copy(), E3.copy()


def sl2_check(m, tol=DET_TOL):
    """Raise unless |det(m) - 1| <= tol; returns m unchanged."""
    d = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(d - 1) > tol:
        raise UnimodularError(f"determinant {d} is not 1 within {tol}")
    return m


def sl2_inverse(m):
    """Adjugate inverse; exact for det 1."""
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=complex)


def exp_algebra(v):
    """Matrix exponential of a trace-0 2x2 via the closed form.

    For trace-0 v one has v^2 = -det(v) I, so exp(v) = cos(mu) I + sinc(mu) v
    with mu = sqrt(det v).
    """
    tr = v[0, 0] + v[1, 1]
    if abs(tr) > 1e-9:
        raise ValueError(f"exp_algebra needs a trace-0 matrix, got trace {tr}")
    det = v[0, 0] * v[1, 1] - v[0, 1] * v[1, 0]
    mu = np.sqrt(complex(det))
    if abs(mu) < 1e-8:
        # series for cos(mu), sin(mu)/mu; mu^2 = det
        c = 1 - det / 2 + det * det / 24
        s = 1 - det / 6 + det * det / 120
    else:
        c = np.cos(mu)
        s = np.sin(mu) / mu
    return sl2_check(c * IDENT + s * v)


def exp_e1(theta):
    """exp(theta e1) for complex theta."""
    return np.cos(theta / 2) * IDENT + 2 * np.sin(theta / 2) * E1


def exp_e3(theta):
    """exp(theta e3) = diag(e^{-i theta/2}, e^{i theta/2})."""
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


def axis_e1_components(m):
    """Coefficients (pi0, pi1, pi2, pi3) of m in the basis {I, e1, e2, e3}."""
    pi0 = (m[0, 0] + m[1, 1]) / 2
    pi1 = 1j * (m[0, 1] + m[1, 0])
    pi2 = m[1, 0] - m[0, 1]
    pi3 = 1j * (m[0, 0] - m[1, 1])
    return pi0, pi1, pi2, pi3


def e1_axis_angle(m, reference=0.0):
    """Angle alpha with m = exp(alpha e1), branch nearest the reference.

    Requires m to lie on the e1 axis (components along e2, e3 negligible).
    """
    pi0, pi1, pi2, pi3 = axis_e1_components(m)
    off = max(abs(pi2), abs(pi3))
    if off > 1e-6:
        raise ValueError(f"matrix is off the e1 axis by {off}")
    # exp(alpha e1) = cos(alpha/2) I + 2 sin(alpha/2) e1
    half = -1j * np.log(pi0 + 1j * pi1 / 2)
    alpha = 2 * half
    k = round(((reference - alpha) / (4 * np.pi)).real)
    return alpha + 4 * np.pi * k


@dataclass
class RepresentationPoint:
    """Images of the generators plus the worst relator deviation from identity."""

    images: dict
    residual: float = 0.0

    def __getitem__(self, name):
        return self.images[name]

    def copy(self):
        return RepresentationPoint({k: v.copy() for k, v in self.images.items()},
                                   self.residual)


def evaluate_word(rep, word, names):
    """Ordered product of generator images over the word's syllables.

    `rep` maps generator names to matrices (a RepresentationPoint works);
    `names` gives the generator name for each word index.
    """
    out = IDENT
    for g, e in word:
        m = rep[names[g]]
        if e < 0:
            m = sl2_inverse(m)
        for _ in range(abs(e)):
            out = out @ m
    return out


def relator_residual(rep, pres):
    """Max entry deviation of every relator image from the identity."""
    worst = 0.0
    for r in pres.relators:
        d = np.abs(evaluate_word(rep, r, pres.names) - IDENT).max()
        worst = max(worst, float(d))
    return worst


def su2_deviation(m):
    """How far m is from SU(2): max entry of m m* - I."""
    return float(np.abs(m @ m.conj().T - IDENT).max())


@dataclass(frozen=True)
class ComplexLength:
    """Complex length: Re = translation length, Im = rotation angle.

    The value is only defined up to +-(value + 2 pi i Z); `reference` records
    the branch anchor that selected this representative.
    """

    value: complex
    reference: complex = 0.0


def complex_length(m, reference=None):
    """Complex length lambda with trace(m) = +-2 cosh(lambda/2).

    The representative nearest to `reference` is returned (threading the
    branch along a path resolves the +-(lambda + 2 pi i Z) ambiguity).
    Central elements need a reference; parabolics are rejected.
    """
    t = (m[0, 0] + m[1, 1]) / 2
    central = np.abs(m - IDENT).max() < 1e-12 or np.abs(m + IDENT).max() < 1e-12
    if central:
        if reference is None:
            raise NoReferenceError("complex length at +-identity needs a reference")
        base = 0.0 if np.abs(m - IDENT).max() < 1e-12 else 2j * np.pi
        cands = [base + 4j * np.pi * k for k in range(-3, 4)]
        cands += [-c for c in cands]
        return ComplexLength(min(cands, key=lambda c: abs(c - reference)), reference)
    if abs(abs(t) - 1) < 1e-12:
        raise ParabolicError(f"trace {2 * t} is parabolic")
    ref = 0.0 if reference is None else complex(reference)
    # lambda/2 = arccosh(+-t); enumerate both trace signs, both length signs,
    # and nearby 2 pi i shifts, then take the branch nearest the reference
    cands = []
    for sign in (1, -1):
        z = sign * t
        lam0 = 2 * np.log(z + np.sqrt(z * z - 1))
        for s2 in (1, -1):
            for k in range(-3, 4):
                cands.append(s2 * lam0 + 4j * np.pi * k + (2j * np.pi if sign < 0 else 0))
    best = min(cands, key=lambda c: abs(c - ref))
    return ComplexLength(best, ref)
