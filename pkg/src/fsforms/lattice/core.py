"""Sampled Yang-Mills fields on [0, 1] and the Coulomb-type functional connection.

Arrays of algebra vectors have shape ``(N, dim)``; flattened vectors use
site-major order ``i * dim + a``.  Sites sit at ``x_i = i * dx`` with
``dx = 1 / (N - 1)``.

The covariant derivative is a forward difference on the N-1 links.  Where
an N-site field is needed (fundamental vectors, the connection) the last
link row is repeated at the final site, so the extended operator has an
exact kernel: the covariantly constant parameters, one per algebra
direction.  The last entry of ``A`` is never read by any derivative; it is
carried along so that configurations and tangents share one shape.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np

from .groups import GaugeGroupSpec, get_group

MIN_SITES = 8
DEFAULT_CUTOFF = 1e-10
BOUNDARIES = ("free", "fixed")


class LatticeError(ValueError):
    pass


class DegeneracyError(LatticeError):
    """The FP operator is (numerically) singular beyond its expected kernel."""

    def __init__(self, smallest: float, cutoff: float):
        self.smallest = smallest
        self.cutoff = cutoff
        super().__init__(f"degenerate Faddeev-Popov operator: smallest nonkernel singular "
                         f"value {smallest:.3e} below cutoff {cutoff:.3e}")


class ConvergenceError(LatticeError):
    pass


# ---------------------------------------------------------------------------
# data


def _field(x, n: int, dim: int, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1 and arr.size == n * dim:
        arr = arr.reshape(n, dim)
    if arr.shape != (n, dim):
        raise LatticeError(f"{what} has shape {arr.shape}, expected {(n, dim)}")
    if not np.all(np.isfinite(arr)):
        raise LatticeError(f"{what} has non-finite entries")
    return arr


@dataclass(frozen=True)
class LatticeConfig:
    group: GaugeGroupSpec
    A: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        if isinstance(self.group, str):
            object.__setattr__(self, "group", get_group(self.group))
        n = len(np.asarray(self.A))
        if n < MIN_SITES:
            raise LatticeError(f"need at least {MIN_SITES} sites, got {n}")
        object.__setattr__(self, "A", _field(self.A, n, self.group.dim, "A"))
        object.__setattr__(self, "E", _field(self.E, n, self.group.dim, "E"))

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def dim(self) -> int:
        return self.group.dim

    @property
    def dx(self) -> float:
        return 1.0 / (self.N - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.N)

    def replace(self, A=None, E=None) -> "LatticeConfig":
        return LatticeConfig(self.group, self.A if A is None else A, self.E if E is None else E)


@dataclass(frozen=True)
class TangentVector:
    gamma: np.ndarray


@dataclass(frozen=True)
class GaugeParameter:
    X: np.ndarray


@dataclass(frozen=True)
class GroupField:
    g: np.ndarray
    group: GaugeGroupSpec = field(default=None)

    def __post_init__(self):
        if self.group is not None and not self.group.abelian:
            norms = np.linalg.norm(self.g, axis=-1)
            if not np.allclose(norms, 1.0, atol=1e-12):
                raise LatticeError("group field is not unit norm at every site")


Vec = Union[np.ndarray, TangentVector, GaugeParameter]


def _arr(v: Vec, cfg: LatticeConfig) -> np.ndarray:
    if isinstance(v, TangentVector):
        v = v.gamma
    elif isinstance(v, GaugeParameter):
        v = v.X
    return _field(v, cfg.N, cfg.dim, "vector")


def norm(v: np.ndarray, dx: float) -> float:
    """Discrete L2 norm ``sqrt(sum |v_i|^2 dx)``."""
    return float(np.sqrt(np.sum(np.asarray(v) ** 2) * dx))


# ---------------------------------------------------------------------------
# smooth seeded fields


def smooth_field(rng: np.random.Generator, n: int, dim: int, modes: int = 4,
                 decay: float = 1.0) -> np.ndarray:
    """Samples of a random trigonometric polynomial on [0, 1].

    The same random coefficients give the same continuum field at every
    resolution, which is what the convergence checks rely on."""
    x = np.linspace(0.0, 1.0, n)
    coeff = rng.normal(size=(2, modes, dim)) / (1.0 + np.arange(modes))[None, :, None] ** decay
    k = np.pi * np.arange(modes)
    return (np.cos(np.outer(x, k)) @ coeff[0]) + (np.sin(np.outer(x, k)) @ coeff[1])


def gauss_electric_field(group: GaugeGroupSpec, A: np.ndarray, E0: np.ndarray) -> np.ndarray:
    """Integrate ``D_A E = 0`` along the lattice: ``E_{i+1} = E_i - dx [A_i, E_i]``."""
    n = A.shape[0]
    dx = 1.0 / (n - 1)
    E = np.empty_like(A, dtype=float)
    E[0] = E0
    for i in range(n - 1):
        E[i + 1] = E[i] - dx * group.bracket(A[i], E[i])
    return E


# ---------------------------------------------------------------------------
# derivatives


def cov_deriv(cfg: LatticeConfig, X: Vec) -> np.ndarray:
    """``(D_A X)_i = (X_{i+1} - X_i)/dx + [A_i, X_i]`` on the N-1 links."""
    X = _arr(X, cfg)
    return np.diff(X, axis=0) / cfg.dx + cfg.group.bracket(cfg.A[:-1], X[:-1])


def _extend(links: np.ndarray) -> np.ndarray:
    return np.concatenate([links, links[-1:]], axis=0)


def fundamental_vector(cfg: LatticeConfig, X: Vec) -> TangentVector:
    """``X#(A) = -D_A X`` on all N sites (final site repeats the last link)."""
    return TangentVector(-_extend(cov_deriv(cfg, X)))


def difference_matrix(n: int, dim: int, dx: float) -> np.ndarray:
    """Forward difference (N-1 links x N sites), tensored with the algebra."""
    d = (np.eye(n - 1, n, 1) - np.eye(n - 1, n)) / dx
    return np.kron(d, np.eye(dim))


def _bracket_rows(group: GaugeGroupSpec, A: np.ndarray) -> np.ndarray:
    n, dim = A.shape
    out = np.zeros(((n - 1) * dim, n * dim))
    if group.abelian:
        return out
    for i in range(n - 1):
        out[i * dim:(i + 1) * dim, i * dim:(i + 1) * dim] = group.ad_matrix(A[i])
    return out


def link_matrix(cfg: LatticeConfig) -> np.ndarray:
    """Matrix of ``D_A``: N-1 links x N sites."""
    return difference_matrix(cfg.N, cfg.dim, cfg.dx) + _bracket_rows(cfg.group, cfg.A)


def extended_matrix(cfg: LatticeConfig) -> np.ndarray:
    """Square matrix ``K`` with ``X# = -K X``."""
    L = link_matrix(cfg)
    return np.vstack([L, L[-cfg.dim:]])


def _columns(cfg: LatticeConfig, boundary: str) -> np.ndarray:
    if boundary not in BOUNDARIES:
        raise LatticeError(f"unknown boundary closure {boundary!r}")
    idx = np.arange(cfg.N * cfg.dim)
    if boundary == "fixed":
        idx = idx[cfg.dim:-cfg.dim]
    return idx


def fp_operator(cfg: LatticeConfig, boundary: str = "free") -> np.ndarray:
    """Faddeev-Popov operator ``d^T D_A`` (lattice divergence after covariant derivative).

    ``free`` keeps every site (Neumann closure, constants in the kernel at
    A = 0); ``fixed`` pins the parameter at both endpoints (Dirichlet)."""
    M = difference_matrix(cfg.N, cfg.dim, cfg.dx).T @ link_matrix(cfg)
    idx = _columns(cfg, boundary)
    return M[np.ix_(idx, idx)]


def constant_modes(n: int, dim: int) -> np.ndarray:
    return np.kron(np.ones((n, 1)), np.eye(dim)) / np.sqrt(n)


# ---------------------------------------------------------------------------
# the functional connection


class CoulombConnection:
    """Least-squares vertical projection at one configuration.

    ``omega(v) = argmin_X |v + D_A X|^2 = -K^+ v`` with the pseudo-inverse
    taken on the complement of the kernel of ``K``.  With the ``fixed``
    closure, parameters vanish at both endpoints and the kernel is trivial.
    """

    def __init__(self, cfg: LatticeConfig, boundary: str = "free", cutoff: float = DEFAULT_CUTOFF):
        self.cfg = cfg
        self.boundary = boundary
        self.cutoff = cutoff
        self.columns = _columns(cfg, boundary)
        K = extended_matrix(cfg)[:, self.columns]
        U, s, Vt = np.linalg.svd(K)
        kernel = cfg.dim if boundary == "free" else 0
        rank = len(s) - kernel
        limit = cutoff * s[0]
        if s[rank - 1] <= limit:
            raise DegeneracyError(float(s[rank - 1]), float(limit))
        self.K = K
        self.singular_values = s
        self.rank = rank
        self.condition = float(s[0] / s[rank - 1])
        self._U = U[:, :rank]
        self._Vt = Vt[:rank]
        self._s = s[:rank]
        self.pinv = (self._Vt.T / self._s) @ self._U.T

    # matrices
    @cached_property
    def V(self) -> np.ndarray:
        return self._U @ self._U.T

    @cached_property
    def H(self) -> np.ndarray:
        return np.eye(self.K.shape[0]) - self.V

    @cached_property
    def kernel_complement(self) -> np.ndarray:
        """Orthogonal projector onto parameters that ``omega`` can return."""
        return self._Vt.T @ self._Vt

    # actions on fields
    def _embed(self, y: np.ndarray) -> np.ndarray:
        full = np.zeros(self.cfg.N * self.cfg.dim)
        full[self.columns] = y
        return full.reshape(self.cfg.N, self.cfg.dim)

    def omega(self, v: Vec) -> np.ndarray:
        v = _arr(v, self.cfg).ravel()
        return self._embed(-self.pinv @ v)

    def vertical(self, v: Vec) -> np.ndarray:
        v = _arr(v, self.cfg).ravel()
        return (self.V @ v).reshape(self.cfg.N, self.cfg.dim)

    def horizontal(self, v: Vec) -> np.ndarray:
        v = _arr(v, self.cfg).ravel()
        return (v - self.V @ v).reshape(self.cfg.N, self.cfg.dim)

    def project_parameter(self, X: Vec) -> np.ndarray:
        """Component of ``X`` orthogonal to the kernel (and zero at pinned ends)."""
        X = _arr(X, self.cfg).ravel()[self.columns]
        return self._embed(self.kernel_complement @ X)


def coulomb_connection(cfg: LatticeConfig, v: Vec, boundary: str = "free",
                       cutoff: float = DEFAULT_CUTOFF) -> GaugeParameter:
    return GaugeParameter(CoulombConnection(cfg, boundary, cutoff).omega(v))


# ---------------------------------------------------------------------------
# gauge transformations


def _link_log(group: GaugeGroupSpec, g: np.ndarray, dx: float) -> np.ndarray:
    """``((dg) g^{-1})`` on links, via the log of neighbouring ratios."""
    return group.log(group.mul(g[1:], group.inv(g[:-1]))) / dx


def _group_array(g) -> np.ndarray:
    return np.asarray(g.g if isinstance(g, GroupField) else g, dtype=float)


def gauge_transform(cfg: LatticeConfig, g) -> LatticeConfig:
    """``A_i -> Ad_{g_i} A_i - ((dg) g^{-1})_i`` on links, ``E_i -> Ad_{g_i} E_i``.

    The final (unread) entry of A is shifted by the same increment as the
    last link, matching the repeated row of the extended operator."""
    g = _group_array(g)
    G = cfg.group
    links = G.Ad(g[:-1], cfg.A[:-1]) - _link_log(G, g, cfg.dx)
    A = np.concatenate([links, cfg.A[-1:] + links[-1:] - cfg.A[-2:-1]], axis=0)
    return cfg.replace(A=A, E=G.Ad(g, cfg.E))


def push_tangent(cfg: LatticeConfig, g, v: Vec) -> np.ndarray:
    """Tangent map of ``gauge_transform(., g)`` for field-independent ``g``."""
    g = _group_array(g)
    v = _arr(v, cfg)
    links = cfg.group.Ad(g[:-1], v[:-1])
    return np.concatenate([links, v[-1:] + links[-1:] - v[-2:-1]], axis=0)


def constant_group_field(cfg: LatticeConfig, X: Vec, t: float) -> np.ndarray:
    return cfg.group.exp(t * _arr(X, cfg))


def equivariance_check(cfg: LatticeConfig, v: Vec, X: Vec, t: float,
                       boundary: str = "free", cutoff: float = DEFAULT_CUTOFF) -> float:
    """``|omega_{A'}(v') - Ad_g omega_A(v)|`` for ``g = exp(tX)``, ``A' = g.A``,
    ``v'`` the pushed-forward tangent."""
    g = constant_group_field(cfg, X, t)
    cfg2 = gauge_transform(cfg, g)
    w1 = CoulombConnection(cfg2, boundary, cutoff).omega(push_tangent(cfg, g, v))
    w0 = cfg.group.Ad(g, CoulombConnection(cfg, boundary, cutoff).omega(v))
    return norm(w1 - w0, cfg.dx)


BetaFunctional = Callable[[LatticeConfig], np.ndarray]


def local_beta(kappa: float = 0.5) -> BetaFunctional:
    """Field-dependent gauge transformation ``beta_i(A) = exp(kappa A_i)``."""
    def beta(cfg: LatticeConfig) -> np.ndarray:
        return cfg.group.exp(kappa * cfg.A)
    return beta


def field_dependent_check(cfg: LatticeConfig, v: Vec, beta: BetaFunctional, h: float = 1e-5,
                          boundary: str = "free", cutoff: float = DEFAULT_CUTOFF) -> float:
    """Residual of ``omega_{A'}(v') = Ad_beta omega_A(v) + (delta beta) beta^{-1}``,
    both sides projected off the kernel at ``A'``.

    ``v'`` and ``(delta beta) beta^{-1}`` are central finite differences along ``v``."""
    v = _arr(v, cfg)
    G = cfg.group
    b0 = beta(cfg)
    plus, minus = cfg.replace(A=cfg.A + h * v), cfg.replace(A=cfg.A - h * v)
    v2 = (gauge_transform(plus, beta(plus)).A - gauge_transform(minus, beta(minus)).A) / (2 * h)
    dbeta = (G.log(G.mul(beta(plus), G.inv(b0))) - G.log(G.mul(beta(minus), G.inv(b0)))) / (2 * h)
    cfg2 = gauge_transform(cfg, b0)
    conn2 = CoulombConnection(cfg2, boundary, cutoff)
    lhs = conn2.omega(v2)
    rhs = conn2.project_parameter(G.Ad(b0, CoulombConnection(cfg, boundary, cutoff).omega(v)) + dbeta)
    return norm(lhs - rhs, cfg.dx)


# ---------------------------------------------------------------------------
# curvature


def _horizontal_field(u: np.ndarray, boundary: str, cutoff: float):
    def field_(cfg: LatticeConfig) -> np.ndarray:
        return CoulombConnection(cfg, boundary, cutoff).horizontal(u)
    return field_


def _lie_bracket_fd(cfg: LatticeConfig, fu, fv, eps: float) -> np.ndarray:
    """Commutator of two vector fields on the (flat) space of connections."""
    hu, hv = fu(cfg), fv(cfg)

    def ddir(f, w):
        return (f(cfg.replace(A=cfg.A + eps * w)) - f(cfg.replace(A=cfg.A - eps * w))) / (2 * eps)

    return ddir(fv, hu) - ddir(fu, hv)


@dataclass
class CurvatureProbe:
    value: np.ndarray
    norm: float
    floor: float
    ratio: float
    condition: float


def curvature_probe(cfg: LatticeConfig, u: Vec, v: Vec, eps: float = 1e-2,
                    boundary: str = "free", cutoff: float = DEFAULT_CUTOFF) -> CurvatureProbe:
    """``F(u, v) = -omega([Hu, Hv])`` with the commutator from central differences,
    Richardson-extrapolated over ``eps, eps/2``; ``eps/4`` certifies the rate.

    ``floor`` is the extrapolation error estimate plus a rounding estimate."""
    u, v = _arr(u, cfg), _arr(v, cfg)
    conn = CoulombConnection(cfg, boundary, cutoff)
    fu, fv = _horizontal_field(u, boundary, cutoff), _horizontal_field(v, boundary, cutoff)
    r = [-conn.omega(_lie_bracket_fd(cfg, fu, fv, eps / 2 ** k)) for k in range(3)]
    d1, d2 = norm(r[0] - r[1], cfg.dx), norm(r[1] - r[2], cfg.dx)
    scale = max(norm(conn.horizontal(u), cfg.dx) * norm(conn.horizontal(v), cfg.dx), 1.0)
    roundoff = 64 * np.finfo(float).eps * conn.condition * scale / (eps / 4)
    ratio = d1 / d2 if d2 > 0 else np.inf
    if d2 > roundoff and ratio < 2.0:
        raise ConvergenceError(f"Richardson ratio {ratio:.2f} (expected about 4)")
    best = (4 * r[2] - r[1]) / 3
    floor = d2 / 3 + roundoff if d1 > 0 or d2 > 0 else 0.0
    return CurvatureProbe(best, norm(best, cfg.dx), float(floor), float(ratio), conn.condition)


def curvature_exact(cfg: LatticeConfig, u: Vec, v: Vec, boundary: str = "free",
                    cutoff: float = DEFAULT_CUTOFF) -> np.ndarray:
    """Closed-form ``-omega([Hu, Hv])`` from the derivative of the projector
    ``V = K K^+``: ``dV = H dK K^+ + (H dK K^+)^T``."""
    u, v = _arr(u, cfg).ravel(), _arr(v, cfg).ravel()
    conn = CoulombConnection(cfg, boundary, cutoff)
    H, Kp = conn.H, conn.pinv

    def dK(w):
        rows = _bracket_rows(cfg.group, w.reshape(cfg.N, cfg.dim))
        return np.vstack([rows, rows[-cfg.dim:]])[:, conn.columns]

    def dHx(w, x):
        a = H @ dK(w) @ Kp
        return -(a + a.T) @ x

    hu, hv = H @ u, H @ v
    bracket = dHx(hu, hv) - dHx(hv, hu)
    return conn._embed(Kp @ bracket)


# ---------------------------------------------------------------------------
# presymplectic potential and charges


def theta(cfg: LatticeConfig, v: Vec) -> float:
    return float(np.sum(cfg.E * _arr(v, cfg)) * cfg.dx)


def theta_H(cfg: LatticeConfig, v: Vec, boundary: str = "free",
            cutoff: float = DEFAULT_CUTOFF) -> float:
    return theta(cfg, CoulombConnection(cfg, boundary, cutoff).horizontal(v))


def corner_charge(cfg: LatticeConfig, X: Vec) -> float:
    X = _arr(X, cfg)
    return float(cfg.E[-1] @ X[-1] - cfg.E[0] @ X[0])


def gauss_term(cfg: LatticeConfig, X: Vec) -> float:
    """``sum_i (D_A E)_i . X_i dx`` over the links."""
    X = _arr(X, cfg)
    return float(np.sum(cov_deriv(cfg, cfg.E) * X[:-1]) * cfg.dx)


# ---------------------------------------------------------------------------
# Gribov scan


def fp_spectrum_floor(cfg: LatticeConfig, boundary: str = "free") -> tuple[float, float]:
    """Smallest eigenvalue and condition number of the symmetric part of the
    FP operator, with constant modes removed under the free closure."""
    M = fp_operator(cfg, boundary)
    S = (M + M.T) / 2
    if boundary == "free":
        C = constant_modes(cfg.N, cfg.dim)
        Q = np.linalg.svd(C.T)[2][cfg.dim:].T
        S = Q.T @ S @ Q
    lam = np.linalg.eigvalsh(S)
    mags = np.abs(lam)
    cond = float(mags.max() / mags.min()) if mags.min() > 0 else float("inf")
    return float(lam[0]), cond


@dataclass
class GribovReport:
    rows: list                    # (t, smallest eigenvalue, condition number)
    bracket: Optional[tuple]      # (t_lo, t_hi) around the first sign change
    t_star: Optional[float]

    @property
    def crossing(self) -> bool:
        return self.t_star is not None

    def summary(self) -> str:
        if not self.crossing:
            return "no crossing"
        lo, hi = self.bracket
        return f"crossing at t* = {self.t_star:.10g} (bracket [{lo:.6g}, {hi:.6g}])"


def gribov_scan(cfg0: LatticeConfig, t_max: float, steps: int, boundary: str = "free",
                tol: float = 1e-10) -> GribovReport:
    """Track the smallest FP eigenvalue along ``A = t A0`` for ``t`` in ``(0, t_max]``."""
    if steps <= 0:
        raise LatticeError("steps must be positive")
    if t_max <= 0:
        raise LatticeError("t_max must be positive")

    def lam(t):
        return fp_spectrum_floor(cfg0.replace(A=t * cfg0.A), boundary)

    rows, prev = [], (0.0, lam(0.0)[0])
    bracket = None
    for k in range(1, steps + 1):
        t = t_max * k / steps
        value, cond = lam(t)
        rows.append((t, value, cond))
        if bracket is None and prev[1] > 0 >= value:
            bracket = (prev[0], t)
        prev = (t, value)
    t_star = None
    if bracket is not None:
        lo, hi = bracket
        for _ in range(200):
            if hi - lo <= tol * t_max:
                break
            mid = (lo + hi) / 2
            if lam(mid)[0] > 0:
                lo = mid
            else:
                hi = mid
        t_star = (lo + hi) / 2
    return GribovReport(rows, bracket, t_star)
