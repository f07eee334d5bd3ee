import numpy as np
import pytest

from gradflow.analyzer import (SingularCoefficientError, StageEnergyChecker, Verdict, auxiliary_g,
                               certify, diff_matrices, diff_matrix, scan_grid, stage_energy_check,
                               sym_minors)
from gradflow.models import DoubleWell
from gradflow.scalarfun import CorrectionKind, coefficient_arrays
from gradflow.specop import Grid, SpectralOperator
from gradflow.stepper import SchemeSpec, Stepper
from gradflow.tableau import REGISTRY, registry_get

from conftest import CORRECTED
from oracles import det_cofactor

e = np.exp


def D_forms():
    return {
        ("IF1", "T"): lambda z: [[1 - z / 2]],
        ("IF1", "N"): lambda z: [[z / (e(z) - 1) + z / 2]],
        ("Heun2", "T"): lambda z: [[1 - z / 2, 0], [e(z), e(z) * (2 - z) - z / 2]],
        ("Heun2", "N"): lambda z: [[z / (e(z) - 1) + z / 2, 0],
                                   [e(z) * z / (e(z) - 1), (z * z * e(z) - 2 * z * (e(z) + 1)) / (2 * e(z) * (z - 2) + 4)]],
        ("Ralston2", "T"): lambda z: [[1.5 - z / 2, 0], [5 / 6 * e(2 * z / 3), (4 - z) / 3 * e(2 * z / 3) - z / 2]],
        ("Ralston2", "N"): lambda z: [[z / (e(2 * z / 3) - 1) + z / 2, 0],
                                      [e(z) * (e(2 * z / 3) * (z - 4) + 4) * z / ((e(2 * z / 3) - 1) * (e(z) * (z - 4) + 4)),
                                       (e(z) * (z - 4) - 4) * z / (2 * e(z) * (z - 4) + 8)]],
        ("Heun3", "T"): lambda z: [[3 - z / 2, 0, 0], [1.5 * e(z / 3), 1.5 * e(z / 3) - z / 2, 0],
                                   [e(2 * z / 3) / 3, e(2 * z / 3) * (4 - z) / 3, e(2 * z / 3) * (4 - z) / 3 - z / 2]],
        ("Heun3", "N"): lambda z: [[z / (e(z / 3) - 1) + z / 2, 0, 0],
                                   [z / (e(2 * z / 3) - 1) + z, z / (e(2 * z / 3) - 1) + z / 2, 0],
                                   [e(z) * (e(z / 3) * (z - 4) + 4) * z / ((e(z / 3) - 1) * (e(z) * (z - 4) + 4)),
                                    e(z) * (z - 4) * z / (e(z) * (z - 4) + 4),
                                    (e(z) * (z - 4) - 4) * z / (2 * e(z) * (z - 4) + 8)]],
    }


def minor_forms():
    return {
        ("Heun2", "T", 2): lambda z: ((2 * e(z) + 1) * z * z - 2 * z * (4 * e(z) + 1) + e(z) * (8 - e(z))) / 4,
        ("Heun2", "N", 2): lambda z: z * z / (4 * (e(z) - 1) ** 2) * (2 - z - 4 * e(z) + 2 * e(-z)) / (z - 2 + 2 * e(-z)),
        ("Ralston2", "T", 2): lambda z: (e(2 * z / 3) * (2 - 25 / 144 * e(2 * z / 3)) + (e(2 * z / 3) / 6 + 0.25) * z * z
                                        - (7 / 6 * e(2 * z / 3) + 0.75) * z),
        ("Heun3", "T", 2): lambda z: z * z / 4 - 3 * z / 4 * (e(z / 3) + 2) + 9 / 16 * e(z / 3) * (8 - e(z / 3)),
        ("Heun3", "T", 3): lambda z: (-z ** 3 / 72 * (6 * e(2 * z / 3) - e(4 * z / 3) + 9)
                                     + z * z / 72 * (27 * e(z / 3) + 60 * e(2 * z / 3) + 18 * e(z) - 14 * e(4 * z / 3) + 54)
                                     - z / 288 * e(z / 3) * (495 * e(z / 3) + 720 * e(2 * z / 3) - 314 * e(z) + 12 * e(4 * z / 3) + 648)
                                     + e(z) / 24 * (-50 * e(z / 3) + 3 * e(2 * z / 3) + 144)),
        ("Heun3", "N", 2): lambda z: z * z / (4 * (e(2 * z / 3) - 1) ** 2) * (2 * e(z / 3) + 2 * e(2 * z / 3) + 2 * e(z) + 1),
    }


@pytest.mark.parametrize("key", list(D_forms()))
def test_closed_form_differentiation_matrices(key, rng):
    name, kind = key
    t = registry_get(name)
    for z in -rng.uniform(0.01, 40, 20):
        want = np.array(D_forms()[key](z))
        np.testing.assert_allclose(diff_matrix(t, kind, z), want, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("key", list(minor_forms()))
def test_closed_form_minors(key, rng):
    name, kind, k = key
    t = registry_get(name)
    for z in -rng.uniform(0.01, 40, 20):
        got = sym_minors(diff_matrix(t, kind, z))[k - 1]
        assert got == pytest.approx(minor_forms()[key](z), rel=1e-10)


def test_if1_frozen_value():
    assert diff_matrix(registry_get("IF1"), "N", -2.0)[0, 0] == pytest.approx(1.3130352854993313036, rel=1e-14)


@pytest.mark.parametrize("name", list(REGISTRY))
@pytest.mark.parametrize("kind", ["T", "N"])
def test_matrix_identity(name, kind):
    # A_hat (D - z E + z/2 I) = E
    t = registry_get(name)
    s = t.s
    E = np.tril(np.ones((s, s)))
    for z in (-0.3, -7.0, -33.0):
        ahat, _ = coefficient_arrays(t, kind, z)
        D = diff_matrix(t, kind, z)
        np.testing.assert_allclose(ahat @ (D - z * E + z / 2 * np.eye(s)), E, atol=1e-12)


@pytest.mark.parametrize("name", list(REGISTRY))
def test_zero_limit_is_shared(name):
    t = registry_get(name)
    E = np.tril(np.ones((t.s, t.s)))
    want = np.linalg.solve(t.a0[1:, :-1], E)
    for kind in ("T", "N"):
        np.testing.assert_allclose(diff_matrix(t, kind, 0.0), want, atol=1e-12)


def test_minors_against_cofactor_expansion(rng):
    S = rng.standard_normal((30, 4, 4))
    got = sym_minors(S)
    sym = 0.5 * (S + np.swapaxes(S, 1, 2))
    for n in range(30):
        want = [det_cofactor(sym[n, :k, :k]) for k in range(1, 5)]
        np.testing.assert_allclose(got[n], want, rtol=1e-11, atol=1e-12)


def test_minors_of_singular_blocks():
    S = np.array([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(sym_minors(S), [0.0, -1.0])


def test_scan_grid():
    z = scan_grid()
    assert z[0] == -50.0 and z[-1] == 0.0 and np.all(np.diff(z) > 0)
    assert -1e-12 in z and z.size >= 10_000
    with pytest.raises(ValueError):
        scan_grid(z_min=1.0)


# analytic lower bounds, one per leading minor
BOUNDS = {
    ("IF1", "T"): [1], ("IF1", "N"): [1],
    ("Heun2", "T"): [1, 7 / 4], ("Heun2", "N"): [1, 0],
    ("Ralston2", "T"): [3 / 2, 263 / 144], ("Ralston2", "N"): [3 / 2, 0],
    ("Heun3", "T"): [3, 63 / 16, 47 / 12], ("Heun3", "N"): [3, 9 / 16, 0],
    ("Ralston3", "T"): [2, 20 / 9, 413 / 96], ("Ralston3", "N"): [2, 4 / 9, 0],
}


@pytest.mark.parametrize("key", list(BOUNDS))
def test_certified_bounds(key):
    name, kind = key
    rep = certify(registry_get(name), kind, n_points=2000)
    assert np.all(rep.minima >= np.array(BOUNDS[key]) - 1e-8), rep.summary()
    assert rep.verdict is Verdict.POSITIVE_DEFINITE


@pytest.mark.parametrize("kind", ["T", "N"])
def test_kutta4_is_indefinite_near_zero(kind):
    rep = certify(registry_get("Kutta4"), kind, n_points=5000)
    assert rep.verdict is Verdict.INDEFINITE
    neg = rep.negative_region(4)
    assert neg.size and neg.min() > -0.5 and np.any((neg < 0) & (neg > -0.5))
    assert rep.minima[3] == pytest.approx(-0.75, abs=1e-12) and rep.argmin[3] == 0.0
    assert rep.negative_region(1).size == 0


def test_report_outputs():
    rep = certify(registry_get("Heun2"), "N", z_min=-5, n_points=11)
    lines = rep.to_csv_text().splitlines()
    assert lines[0] == "z,minor_1,minor_2" and len(lines) == 1 + rep.z.size
    text = rep.summary()
    assert "verdict: PositiveDefinite" in text and "minor_2" in text


def test_raw_rejected():
    with pytest.raises(ValueError):
        certify(registry_get("Heun2"), "raw")
    with pytest.raises(ValueError):
        StageEnergyChecker(SchemeSpec.from_name("IF1", 1.0, 0.1), SpectralOperator(Grid(1, 4), 1.0), DoubleWell())


def test_singular_coefficient_detected():
    # non-finite coefficients must be caught before the triangular solve
    from gradflow.tableau import ButcherTableau
    t = ButcherTableau("odd", [0, 1, 1], [[0, 0, 0], [1, 0, 0], [0.5, 0.5, 0]])
    D = diff_matrices(t, "T", np.array([-1.0, 0.0]))
    assert np.all(np.isfinite(D))
    with pytest.raises(SingularCoefficientError):
        diff_matrices(t, "T", np.array([np.nan]))


@pytest.mark.parametrize("name", ["N2R", "N3H", "N3R"])
def test_auxiliary_functions_nonnegative(name):
    z = np.concatenate([np.linspace(-50, 0, 20001), -np.logspace(-8, 0, 200)])
    assert np.min(auxiliary_g(name, z)) >= -1e-10


def test_auxiliary_frozen_values():
    assert auxiliary_g("N2R", -1.0) == pytest.approx(9.0130372263593127022, rel=1e-13)
    assert auxiliary_g("n3h", -5.0) == pytest.approx(18.972626080887090772, rel=1e-13)
    with pytest.raises(KeyError):
        auxiliary_g("N4K", -1.0)


def _rand_state(rng, shape):
    return np.clip(0.9 * rng.standard_normal(shape), -1, 1)


@pytest.mark.parametrize("name", CORRECTED[:10])
def test_stage_energy_law_holds(name, rng):
    op = SpectralOperator(Grid(1, 64, length=2.0), 0.01)
    spec = SchemeSpec.from_name(name, 4.0, 0.5)
    st = Stepper(spec, op, DoubleWell())
    chk = StageEnergyChecker(spec, op, DoubleWell())
    u = _rand_state(rng, 64)
    for _ in range(5):
        out = st.step(u)
        assert np.all(chk.check(out).gap <= 1e-12)
        u = out.next


def test_stage_check_is_zero_at_steady_state():
    op = SpectralOperator(Grid(2, 8), 0.01)
    spec = SchemeSpec.from_name("NIF3-Heun", 4.0, 0.3)
    out = Stepper(spec, op, DoubleWell()).step(np.ones((8, 8)))
    rep = stage_energy_check(spec, op, DoubleWell(), out)
    np.testing.assert_allclose(rep.lhs, 0, atol=1e-14)
    np.testing.assert_allclose(rep.rhs, 0, atol=1e-14)


def test_stage_check_needs_stages():
    op = SpectralOperator(Grid(1, 8), 0.01)
    spec = SchemeSpec.from_name("NIF2-Heun", 4.0, 0.3)
    out = Stepper(spec, op, DoubleWell()).step(np.zeros(8), keep_stages=False)
    with pytest.raises(ValueError):
        stage_energy_check(spec, op, DoubleWell(), out)


def test_quadratic_form_against_dense(rng):
    # rhs of the last stage equals -(1/tau) dU^T (D(-tau L) ⊗ I) dU assembled densely
    from oracles import dense_laplacian
    M, tau, kappa = 8, 0.4, 2.0
    g = Grid(1, M, length=1.0)
    op = SpectralOperator(g, 0.02)
    spec = SchemeSpec.from_name("TIF2-Ralston", kappa, tau)
    out = Stepper(spec, op, DoubleWell()).step(_rand_state(rng, M))
    L = dense_laplacian(M, 0.02, g.h) + kappa * np.eye(M)
    w, V = np.linalg.eigh(L)
    Dz = diff_matrices(spec.tableau, spec.kind, -tau * w)
    dU = [out.stages[k + 1] - out.stages[k] for k in range(2)]
    quad = 0.0
    for k in range(2):
        for l in range(2):
            quad += g.h * dU[k] @ (V * Dz[:, k, l]) @ V.T @ dU[l]
    rep = stage_energy_check(spec, op, DoubleWell(), out)
    assert rep.rhs[-1] == pytest.approx(-quad / tau, rel=1e-11)
