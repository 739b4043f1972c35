import numpy as np
import pytest

from fsforms.lattice import core
from fsforms.lattice.core import (
    CoulombConnection, DegeneracyError, LatticeConfig, LatticeError, norm, smooth_field,
)
from fsforms.lattice.groups import SU2, U1, GaugeGroupSpec
from fsforms.lattice.settings import ConfigError, LatticeSettings, parse_settings


def make(group, n, seed=0, gauss=False, scale=1.0):
    rng = np.random.default_rng(seed)
    A = scale * smooth_field(rng, n, group.dim)
    E0 = rng.normal(size=group.dim)
    E = core.gauss_electric_field(group, A, E0) if gauss else smooth_field(rng, n, group.dim)
    return LatticeConfig(group, A, E), rng


def rodrigues(axis_angle):
    theta = np.linalg.norm(axis_angle)
    k = axis_angle / theta
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(theta) * K + (1 - np.cos(theta)) * K @ K


# -- groups ---------------------------------------------------------------------------


def test_su2_adjoint_matches_rodrigues():
    rng = np.random.default_rng(1)
    for _ in range(5):
        x, y = rng.normal(size=3), rng.normal(size=3)
        assert np.allclose(SU2.Ad(SU2.exp(x), y), rodrigues(x) @ y)


def test_group_laws():
    rng = np.random.default_rng(2)
    x, y, z = rng.normal(size=(3, 3))
    g, h = SU2.exp(x), SU2.exp(y)
    assert np.allclose(SU2.Ad(SU2.mul(g, h), z), SU2.Ad(g, SU2.Ad(h, z)))
    assert np.allclose(SU2.mul(g, SU2.inv(g)), SU2.identity(1)[0])
    assert np.allclose(SU2.log(SU2.exp(0.7 * x / np.linalg.norm(x))), 0.7 * x / np.linalg.norm(x))
    assert np.allclose(SU2.ad_matrix(x) @ y, SU2.bracket(x, y))
    assert np.allclose(U1.log(U1.exp(np.array([4.0]))), 4.0 - 2 * np.pi)


def test_structure_constant_validation():
    bad = np.zeros((2, 2, 2))
    bad[0, 1, 0] = 1.0  # not antisymmetric
    with pytest.raises(ValueError, match="antisymmetric"):
        GaugeGroupSpec("bad", 2, bad)
    assert SU2.structure[0, 1, 2] == 1 and U1.abelian


# -- configurations ---------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(LatticeError):
        LatticeConfig(SU2, np.zeros((4, 3)), np.zeros((4, 3)))
    A = np.zeros((10, 3))
    A[3, 1] = np.nan
    with pytest.raises(LatticeError, match="non-finite"):
        LatticeConfig(SU2, A, np.zeros((10, 3)))
    with pytest.raises(LatticeError, match="shape"):
        LatticeConfig(SU2, np.zeros((10, 3)), np.zeros((10, 2)))


# -- covariant derivative and fundamental vectors -------------------------------------


def test_cov_deriv_trivial_cases():
    cfg = LatticeConfig(SU2, np.zeros((16, 3)), np.zeros((16, 3)))
    assert np.allclose(core.cov_deriv(cfg, np.ones((16, 3))), 0)
    cfg, rng = make(U1, 32)
    X = rng.normal(size=(32, 1))
    assert np.allclose(core.cov_deriv(cfg, X), np.diff(X, axis=0) * 31)


def test_fundamental_vector_trivial_cases():
    cfg, rng = make(SU2, 32)
    assert np.allclose(core.fundamental_vector(cfg, np.zeros((32, 3))).gamma, 0)
    flat = LatticeConfig(U1, np.zeros((32, 1)), np.zeros((32, 1)))
    X = rng.normal(size=(32, 1))
    gamma = core.fundamental_vector(flat, X).gamma
    assert np.allclose(gamma[:-1], -np.diff(X, axis=0) * 31)


def test_fundamental_vector_is_orbit_velocity():
    cfg, rng = make(SU2, 64, seed=3)
    X = smooth_field(rng, 64, 3)

    def orbit(t):
        return core.gauge_transform(cfg, SU2.exp(t * X)).A

    errs = []
    for dt in (1e-2, 5e-3):
        fd = (orbit(dt) - orbit(-dt)) / (2 * dt)
        errs.append(np.max(np.abs(fd - core.fundamental_vector(cfg, X).gamma)))
    assert errs[1] < errs[0] / 3.5  # second order in dt
    assert errs[1] < 1e-3


# -- FP operator -----------------------------------------------------------------------


def test_u1_fp_spectrum_is_neumann_laplacian():
    n = 40
    cfg, _ = make(U1, n)
    dx = cfg.dx
    lam = np.sort(np.linalg.eigvals(core.fp_operator(cfg)).real)
    expected = np.sort(4 / dx ** 2 * np.sin(np.pi * np.arange(n) / (2 * n)) ** 2)
    assert np.allclose(lam, expected, atol=1e-8 * expected.max())
    assert abs(lam[0]) < 1e-8


def test_u1_fixed_closure_is_dirichlet_laplacian():
    n = 40
    cfg, _ = make(U1, n)
    lam = np.sort(np.linalg.eigvalsh(core.fp_operator(cfg, "fixed")))
    k = np.arange(1, n - 1)
    expected = 4 / cfg.dx ** 2 * np.sin(np.pi * k / (2 * (n - 1))) ** 2
    assert np.allclose(lam, expected, atol=1e-8 * expected.max())


def test_su2_flat_fp_is_three_laplacians():
    n = 24
    cfg = LatticeConfig(SU2, np.zeros((n, 3)), np.zeros((n, 3)))
    u1 = LatticeConfig(U1, np.zeros((n, 1)), np.zeros((n, 1)))
    lam = np.sort(np.linalg.eigvalsh(core.fp_operator(cfg)))
    one = np.sort(np.linalg.eigvalsh(core.fp_operator(u1)))
    assert np.allclose(lam, np.sort(np.repeat(one, 3)))


# -- connection and projectors -------------------------------------------------------


@pytest.mark.parametrize("group", [U1, SU2])
@pytest.mark.parametrize("boundary", ["free", "fixed"])
def test_projector_algebra(group, boundary):
    cfg, rng = make(group, 48, seed=5)
    conn = CoulombConnection(cfg, boundary)
    V, H = conn.V, conn.H
    assert np.linalg.norm(V @ V - V, 2) < 1e-10
    assert np.linalg.norm(H @ H - H, 2) < 1e-10
    assert np.allclose(V + H, np.eye(len(V)))
    v = rng.normal(size=(48, group.dim))
    assert norm(conn.omega(conn.horizontal(v)), cfg.dx) < 1e-10
    X = conn.project_parameter(rng.normal(size=(48, group.dim)))
    assert norm(conn.omega(core.fundamental_vector(cfg, X)) - X, cfg.dx) < 1e-10


def test_u1_pure_gauge_inversion():
    cfg, rng = make(U1, 40, seed=6)
    xi = rng.normal(size=(40, 1))
    xi -= xi.mean()
    v = core.fundamental_vector(cfg, xi)  # -d xi on links, repeated at the end
    assert np.allclose(core.coulomb_connection(cfg, v).X, xi)


def test_kernel_is_covariantly_constant():
    cfg, _ = make(SU2, 32, seed=7)
    conn = CoulombConnection(cfg)
    s = conn.singular_values
    assert s[-1] < 1e-10 * s[0] and s[-3] < 1e-10 * s[0] and s[-4] > 1e-6 * s[0]
    kernel = np.linalg.svd(conn.K)[2][-3:]
    for row in kernel:
        assert np.allclose(core.cov_deriv(cfg, row.reshape(32, 3)), 0, atol=1e-8)


def test_degeneracy_error_carries_singular_value():
    cfg, _ = make(SU2, 16)
    with pytest.raises(DegeneracyError) as info:
        CoulombConnection(cfg, cutoff=1.0)
    assert info.value.smallest > 0


# -- gauge transformations ---------------------------------------------------------------


def test_identity_transform():
    cfg, _ = make(SU2, 32)
    out = core.gauge_transform(cfg, SU2.identity(32))
    assert np.allclose(out.A, cfg.A) and np.allclose(out.E, cfg.E)


def test_composition_to_first_order():
    errs = []
    for n in (256, 512):
        cfg, rng = make(SU2, n, seed=8)
        g = SU2.exp(smooth_field(rng, n, 3))
        h = SU2.exp(smooth_field(rng, n, 3))
        two = core.gauge_transform(core.gauge_transform(cfg, g), h)
        one = core.gauge_transform(cfg, SU2.mul(h, g))
        errs.append(norm(two.A - one.A, cfg.dx))
        assert np.allclose(two.E, one.E)
    assert errs[1] < 0.05
    assert 1.6 < errs[0] / errs[1] < 2.4


def test_u1_equivariance_exact():
    cfg, rng = make(U1, 64)
    v, X = rng.normal(size=(64, 1)), rng.normal(size=(64, 1))
    assert core.equivariance_check(cfg, v, X, 0.7) < 1e-10


def test_su2_equivariance_first_order():
    res = []
    for n in (64, 128, 256):
        cfg, rng = make(SU2, n, seed=9)
        v, X = smooth_field(rng, n, 3), smooth_field(rng, n, 3)
        v, X = v / norm(v, cfg.dx), X / norm(X, cfg.dx)
        res.append(core.equivariance_check(cfg, v, X, 0.25))
    assert all(1.6 < a / b < 2.4 for a, b in zip(res, res[1:]))


def test_field_dependent_law_first_order():
    res = []
    for n in (64, 128, 256):
        cfg, rng = make(SU2, n, seed=10)
        v = smooth_field(rng, n, 3)
        res.append(core.field_dependent_check(cfg, v / norm(v, cfg.dx), core.local_beta(0.5)))
    assert all(1.6 < a / b < 2.4 for a, b in zip(res, res[1:]))


def test_field_dependent_law_fails_without_correction():
    # dropping (delta beta) beta^-1 leaves an O(1) residual
    cfg, rng = make(SU2, 64, seed=10)
    v = smooth_field(rng, 64, 3)
    G = SU2
    beta = core.local_beta(0.5)
    h = 1e-5
    plus, minus = cfg.replace(A=cfg.A + h * v), cfg.replace(A=cfg.A - h * v)
    v2 = (core.gauge_transform(plus, beta(plus)).A - core.gauge_transform(minus, beta(minus)).A) / (2 * h)
    cfg2 = core.gauge_transform(cfg, beta(cfg))
    naive = G.Ad(beta(cfg), CoulombConnection(cfg).omega(v))
    conn2 = CoulombConnection(cfg2)
    assert norm(conn2.omega(v2) - conn2.project_parameter(naive), cfg.dx) > 0.1


# -- curvature ---------------------------------------------------------------------------


def test_u1_curvature_vanishes():
    cfg, rng = make(U1, 32, seed=11)
    u, v = rng.normal(size=(2, 32, 1))
    p = core.curvature_probe(cfg, u, v, boundary="fixed")
    assert p.norm <= p.floor


def test_su2_curvature_matches_projector_derivative_oracle():
    cfg, rng = make(SU2, 32, seed=12)
    u, v = smooth_field(rng, 32, 3), smooth_field(rng, 32, 3)
    p = core.curvature_probe(cfg, u, v, boundary="fixed")
    exact = core.curvature_exact(cfg, u, v, boundary="fixed")
    assert norm(p.value - exact, cfg.dx) < 10 * p.floor + 1e-10
    assert p.norm > 10 * p.floor
    assert 3.5 < p.ratio < 4.5


def test_curvature_antisymmetric():
    cfg, rng = make(SU2, 32, seed=13)
    u, v = smooth_field(rng, 32, 3), smooth_field(rng, 32, 3)
    a = core.curvature_probe(cfg, u, v, boundary="fixed")
    b = core.curvature_probe(cfg, v, u, boundary="fixed")
    assert norm(a.value + b.value, cfg.dx) <= a.floor + b.floor


def test_free_closure_connection_is_flat():
    # with free endpoints every configuration has a covariantly constant
    # stabiliser and the horizontal space has the dimension of the algebra
    cfg, rng = make(SU2, 32, seed=14)
    u, v = smooth_field(rng, 32, 3), smooth_field(rng, 32, 3)
    assert norm(core.curvature_exact(cfg, u, v, "free"), cfg.dx) < 1e-8
    assert np.linalg.matrix_rank(CoulombConnection(cfg).H, tol=1e-8) == 3


# -- potentials and charges ----------------------------------------------------------------


def test_potentials_vanish_without_electric_field():
    cfg, rng = make(SU2, 32)
    cfg = cfg.replace(E=np.zeros((32, 3)))
    v, X = rng.normal(size=(2, 32, 3))
    assert core.theta(cfg, v) == 0 and core.theta_H(cfg, v) == 0 and core.corner_charge(cfg, X) == 0


def test_summation_by_parts_identity_first_order():
    devs = []
    for n in (128, 256, 512):
        cfg, rng = make(SU2, n, seed=15)
        X = smooth_field(rng, n, 3)
        lhs = core.theta(cfg, core.fundamental_vector(cfg, X))
        rhs = -core.corner_charge(cfg, X) + core.gauss_term(cfg, X)
        devs.append(abs(lhs - rhs))
    assert all(1.6 < a / b < 2.4 for a, b in zip(devs, devs[1:]))


def test_flux_identity_on_gauss_configurations():
    cfg, rng = make(SU2, 256, seed=16, gauss=True)
    X = smooth_field(rng, 256, 3)
    vert = core.fundamental_vector(cfg, X)
    assert abs(core.gauss_term(cfg, X)) < 1e-12
    assert abs(core.theta(cfg, vert) + core.corner_charge(cfg, X)) < 5 * cfg.dx * np.abs(X).max() * np.abs(cfg.E).max() * 10
    assert abs(core.theta_H(cfg, vert)) < 1e-10


# -- Gribov scan ------------------------------------------------------------------------------


def test_gribov_u1_never_crosses():
    cfg, _ = make(U1, 64)
    assert core.gribov_scan(cfg, 50.0, 10).summary() == "no crossing"


def test_gribov_su2_crossing_resolution_independent():
    stars = []
    for n in (64, 128):
        cfg, _ = make(SU2, n, seed=42)
        rep = core.gribov_scan(cfg, 10.0, 20)
        assert rep.crossing
        lo, hi = rep.bracket
        assert lo <= rep.t_star <= hi
        stars.append(rep.t_star)
    assert abs(stars[0] - stars[1]) / stars[1] < 0.05


def test_gribov_argument_errors():
    cfg, _ = make(SU2, 16)
    with pytest.raises(LatticeError):
        core.gribov_scan(cfg, 1.0, 0)


# -- settings ---------------------------------------------------------------------------------


def test_settings_parse():
    s = parse_settings("group = u1\nN = 64, 128\nseed = 7\n# comment\neps = 1e-3\n")
    assert (s.group, s.N, s.seed, s.eps) == ("u1", (64, 128), 7, 1e-3)


@pytest.mark.parametrize("text", ["group = so3\n", "N = 4\n", "colour = red\n", "seed = x\n",
                                  "steps = 0\n", "not a line\n"])
def test_settings_errors(text):
    with pytest.raises(ConfigError):
        parse_settings(text)


def test_settings_overrides():
    s = LatticeSettings().with_overrides(seed=3, group=None)
    assert s.seed == 3 and s.group == "su2"
