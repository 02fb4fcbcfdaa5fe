"""Twisted group cohomology dimensions via Fox calculus.

For a presentation with generators g_1..g_n and relators r_1..r_k acting on
V through a matrix action, the cochain complex is

    V --D1--> V^n --D2--> V^k,   D1(v) = (v - A_i v),  D2 = Fox Jacobian,

so dim H^0 = dim ker D1 and dim H^1 = dim ker D2 - rank D1.  Ranks are
numerical (SVD threshold); the target modules have small integer ranks far
from the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import liealg

RANK_TOL = 1e-8


@dataclass
class TwistedModule:
    """A pi_1-module: dimension and one invertible matrix per generator."""

    dimension: int
    action: dict

    def __post_init__(self):
        for name, m in self.action.items():
            m = np.asarray(m, dtype=float)
            if m.shape != (self.dimension, self.dimension):
                raise ValueError(f"action for {name!r} has shape {m.shape}, "
                                 f"expected {(self.dimension,) * 2}")
            self.action[name] = m


def _act(module, names, word):
    out = np.eye(module.dimension)
    for g, e in word:
        m = module.action[names[g]]
        if e < 0:
            m = np.linalg.inv(m)
        for _ in range(abs(e)):
            out = out @ m
    return out


def fox_derivative(word, gen_index, module, names):
    """Fox derivative d(word)/d(g) pushed through the module action."""
    d = module.dimension
    out = np.zeros((d, d))
    prefix = np.eye(d)
    for g, e in word:
        m = module.action[names[g]]
        if g == gen_index:
            if e > 0:
                acc = np.zeros((d, d))
                p = np.eye(d)
                for _ in range(e):
                    acc += p
                    p = p @ m
            else:
                minv = np.linalg.inv(m)
                acc = np.zeros((d, d))
                p = minv.copy()
                for _ in range(-e):
                    acc -= p
                    p = p @ minv
            out += prefix @ acc
        step = m if e > 0 else np.linalg.inv(m)
        for _ in range(abs(e)):
            prefix = prefix @ step
    return out


def _rank(m):
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > RANK_TOL * max(1.0, float(s.max(initial=0.0)))))


def twisted_h01(pres, module):
    """(dim H^0, dim H^1) of the presentation's group with this module."""
    names = pres.names
    for n in names:
        if n not in module.action:
            raise ValueError(f"module has no action for generator {n!r}")
    d = module.dimension
    D1 = np.vstack([np.eye(d) - module.action[n] for n in names])
    if pres.relators:
        D2 = np.block([[fox_derivative(r, j, module, names)
                        for j in range(len(names))] for r in pres.relators])
        rank2 = _rank(D2)
    else:
        rank2 = 0
    rank1 = _rank(D1)
    h0 = d - rank1
    h1 = (len(names) * d - rank2) - rank1
    return h0, h1


# ---------------------------------------------------------------------------
# the three standard modules built from a base representation

def adjoint_action(rep, names):
    """Ad rho as 3x3 real matrices in the basis (e1, e2, e3)."""
    basis = liealg.basis_matrices()
    out = {}
    for n in names:
        u = rep[n]
        uinv = liealg.sl2_inverse(u)
        cols = []
        for ej in basis:
            v = u @ ej @ uinv
            # orthonormal under <X, Y> = -2 tr(XY)
            cols.append([(-2 * np.trace(v @ ei)).real for ei in basis])
        out[n] = np.array(cols).T
    return out


def module_su2(pres, rep):
    """su(2) with the adjoint action of the base representation."""
    return TwistedModule(3, adjoint_action(rep, pres.names))


def module_plane(pres, rep):
    """The invariant plane R^2 x 0 (rotational part of the adjoint)."""
    ad = adjoint_action(rep, pres.names)
    action = {}
    for n, m in ad.items():
        if np.abs(m[2, :2]).max() > 1e-9 or np.abs(m[:2, 2]).max() > 1e-9:
            raise ValueError(f"adjoint action of {n!r} does not preserve the plane")
        action[n] = m[:2, :2].copy()
    return TwistedModule(2, action)


def module_axis(pres, rep):
    """The axis 0 x R: the sign action through the grading."""
    ad = adjoint_action(rep, pres.names)
    return TwistedModule(1, {n: m[2:, 2:].copy() for n, m in ad.items()})


def module_trivial(pres):
    """The trivial one-dimensional module."""
    return TwistedModule(1, {n: np.eye(1) for n in pres.names})
