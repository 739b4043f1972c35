"""Gauge groups for the 1-D lattice: u1 (phases) and su2 (unit quaternions).

Lie-algebra elements are stored as real vectors of length ``dim``.  For su2
the bracket is the cross product and ``exp(X)`` is the quaternion rotating
by ``|X|`` about ``X``, so ``Ad_{exp(tX)} Y = Y + t X x Y + O(t^2)``.
The invariant pairing used for traces is the Euclidean dot product.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GaugeGroupSpec:
    name: str
    dim: int
    structure: np.ndarray      # f[a, b, c] with [e_a, e_b] = f[a, b, c] e_c

    def __post_init__(self):
        f = self.structure
        if f.shape != (self.dim,) * 3:
            raise ValueError("structure constants have the wrong shape")
        if not np.allclose(f, -np.swapaxes(f, 0, 1)):
            raise ValueError(f"{self.name}: structure constants not antisymmetric")
        # Jacobi: f_abe f_ecd + f_bce f_ead + f_cae f_ebd = 0
        jac = (np.einsum("abe,ecd->abcd", f, f) + np.einsum("bce,ead->abcd", f, f)
               + np.einsum("cae,ebd->abcd", f, f))
        if not np.allclose(jac, 0):
            raise ValueError(f"{self.name}: Jacobi identity fails")

    @property
    def abelian(self) -> bool:
        return not self.structure.any()

    # -- algebra ---------------------------------------------------------
    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Site-wise bracket of arrays of shape (..., dim)."""
        if self.abelian:
            return np.zeros(np.broadcast_shapes(x.shape, y.shape))
        return np.cross(x, y)

    def ad_matrix(self, x: np.ndarray) -> np.ndarray:
        """Matrix of ``ad_x`` (shape dim x dim) for one algebra vector."""
        return np.einsum("a,abc->cb", x, self.structure)

    # -- group -----------------------------------------------------------
    def identity(self, n: int) -> np.ndarray:
        if self.abelian:
            return np.zeros((n, 1))
        out = np.zeros((n, 4))
        out[:, 0] = 1.0
        return out

    def exp(self, x: np.ndarray) -> np.ndarray:
        if self.abelian:
            return np.array(x, dtype=float)
        angle = np.linalg.norm(x, axis=-1, keepdims=True)
        half = angle / 2
        with np.errstate(invalid="ignore", divide="ignore"):
            axis = np.where(angle > 0, x / np.where(angle > 0, angle, 1), 0.0)
        return np.concatenate([np.cos(half), np.sin(half) * axis], axis=-1)

    def log(self, g: np.ndarray) -> np.ndarray:
        if self.abelian:
            return (g + np.pi) % (2 * np.pi) - np.pi
        w, v = g[..., :1], g[..., 1:]
        s = np.linalg.norm(v, axis=-1, keepdims=True)
        # choose the representative with w >= 0 so the angle lies in [0, pi]
        sgn = np.where(w < 0, -1.0, 1.0)
        angle = 2 * np.arctan2(s, np.abs(w))
        with np.errstate(invalid="ignore", divide="ignore"):
            axis = np.where(s > 0, sgn * v / np.where(s > 0, s, 1), 0.0)
        return angle * axis

    def mul(self, g: np.ndarray, h: np.ndarray) -> np.ndarray:
        if self.abelian:
            return g + h
        w1, v1 = g[..., :1], g[..., 1:]
        w2, v2 = h[..., :1], h[..., 1:]
        w = w1 * w2 - np.sum(v1 * v2, axis=-1, keepdims=True)
        v = w1 * v2 + w2 * v1 + np.cross(v1, v2)
        return np.concatenate([w, v], axis=-1)

    def inv(self, g: np.ndarray) -> np.ndarray:
        if self.abelian:
            return -g
        out = np.array(g, dtype=float)
        out[..., 1:] *= -1
        return out

    def Ad(self, g: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Adjoint action site by site: ``g x g^{-1}``."""
        if self.abelian:
            return np.array(x, dtype=float)
        w, v = g[..., :1], g[..., 1:]
        t = 2 * np.cross(v, x)
        return x + w * t + np.cross(v, t)

    def normalize(self, g: np.ndarray) -> np.ndarray:
        if self.abelian:
            return np.array(g, dtype=float)
        return g / np.linalg.norm(g, axis=-1, keepdims=True)


def _levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for (a, b, c), s in {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
                         (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}.items():
        eps[a, b, c] = s
    return eps


U1 = GaugeGroupSpec("u1", 1, np.zeros((1, 1, 1)))
SU2 = GaugeGroupSpec("su2", 3, _levi_civita())
GROUPS = {"u1": U1, "su2": SU2}


def get_group(name: str) -> GaugeGroupSpec:
    try:
        return GROUPS[name]
    except KeyError:
        raise ValueError(f"unknown gauge group {name!r} (choose from {sorted(GROUPS)})") from None
