import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wstar_metrics.algebra import AlgebraElement, AlgebraSignature, gns_inner, identity
from wstar_metrics.errors import SingularFunction, UnvalidatedFunction, WStarError
from wstar_metrics.funcalc import (
    CATALOG,
    CONSTANT_ONE,
    GEOMETRIC,
    IDENTITY_FN,
    KMB,
    SLD,
    SQUARE_PROBE,
    MonotoneFunction,
    admit,
    apply_F,
    apply_f_of_modular,
    apply_left,
    apply_modular,
    apply_modular_inverse,
    apply_right,
    catalog_listing,
    check_operator_monotone_sample,
    check_symmetry,
    get_function,
    resolve_functions,
)
from wstar_metrics.states import from_probability_vector, make_state, random_faithful_state

from conftest import SIGNATURES
from oracles import dense_modular

SX = np.array([[0, 1], [1, 0]], dtype=complex)
GRID = np.logspace(-3, 3, 61)


def random_element(sig, rng):
    sig = AlgebraSignature.parse(sig)
    return AlgebraElement(sig, [rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for n in sig.block_dims])


def test_catalog_contents():
    assert set(CATALOG) == {"sld", "rld", "kmb", "wy", "geometric"}
    assert all(f.validated for f in CATALOG.values())
    assert [e["name"] for e in catalog_listing()] == list(CATALOG)
    assert resolve_functions("all") == list(CATALOG.values())
    assert resolve_functions("sld, kmb") == [CATALOG["sld"], CATALOG["kmb"]]
    with pytest.raises(WStarError, match="unknown monotone function"):
        get_function("bogus")


@pytest.mark.parametrize("f", list(CATALOG.values()), ids=list(CATALOG))
def test_catalog_positive_and_symmetric(f):
    assert np.all(f(GRID) > 0)
    assert check_symmetry(f, GRID) <= 1e-12
    defects = np.abs(f(GRID) - GRID * f(1 / GRID))
    assert np.all(defects <= 1e-12 * np.maximum(1.0, f(GRID)))
    assert f(1.0) == f.value_at_one


def test_symmetry_examples():
    assert check_symmetry(SLD, [2.0]) == 0.0
    assert check_symmetry(SQUARE_PROBE, [2.0]) == pytest.approx(3.5)


def test_kmb_near_one_matches_series():
    # second-order series (t-1)/ln t = 1 + d/2 - d^2/12 + ...
    for d in [1e-13, -1e-13, 5e-10, -5e-10, 3e-7, 9e-7, 2e-6, -2e-6, 1e-4]:
        t = 1 + d
        series = 1 + d / 2 - d * d / 12 + d**3 / 24
        assert KMB(t) == pytest.approx(series, rel=1e-12, abs=0)
    assert KMB(np.e) == pytest.approx(np.e - 1, rel=1e-15)


def test_left_right():
    half = make_state("2", [np.eye(2) / 2])
    sx = AlgebraElement("2", [SX])
    assert apply_left(half, sx).allclose(0.5 * sx)
    assert apply_right(half, sx).allclose(0.5 * sx)
    rho = random_faithful_state("1,2", 1)
    assert apply_left(rho, identity("1,2")).allclose(AlgebraElement(rho.signature, rho.blocks))
    assert apply_right(rho, identity("1,2")).allclose(AlgebraElement(rho.signature, rho.blocks))
    b = random_element("1,2", np.random.default_rng(0))
    assert apply_left(rho, apply_right(rho, b)).allclose(apply_right(rho, apply_left(rho, b)), atol=1e-14)


def test_modular_examples():
    half = make_state("2", [np.eye(2) / 2])
    b = random_element("2", np.random.default_rng(1))
    assert apply_modular(half, b).allclose(b, atol=1e-15)
    rho = make_state("2", [np.diag([0.75, 0.25])])
    e12 = AlgebraElement("2", [[[0, 1], [0, 0]]])
    out = apply_modular(rho, e12).blocks[0]
    np.testing.assert_allclose(out, [[0, 3], [0, 0]], atol=1e-14)
    np.testing.assert_allclose(out, dense_modular(rho.blocks[0], e12.blocks[0]), atol=1e-14)


def test_modular_identity_on_commutative():
    rho = from_probability_vector([0.1, 0.2, 0.3, 0.4])
    b = random_element("1,1,1,1", np.random.default_rng(2))
    out = apply_modular(rho, b)
    for x, y in zip(out.blocks, b.blocks):
        assert np.array_equal(x, y)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(SIGNATURES), st.integers(0, 2**32 - 1))
def test_modular_matches_dense(sig, seed):
    rng = np.random.default_rng(seed)
    rho = random_faithful_state(sig, rng, floor=1e-2 / AlgebraSignature.parse(sig).matrix_size)
    b = random_element(sig, rng)
    out = apply_modular(rho, b)
    for r, x, y in zip(rho.blocks, b.blocks, out.blocks):
        ref = dense_modular(r, x)
        assert np.max(np.abs(ref - y)) <= 1e-9 * max(1.0, np.max(np.abs(ref)))
    back = apply_modular_inverse(rho, out)
    assert back.allclose(b, atol=1e-10 * max(1.0, max(np.max(np.abs(x)) for x in out.blocks)))


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(SIGNATURES), st.integers(0, 2**32 - 1))
def test_modular_positive_in_gns(sig, seed):
    rng = np.random.default_rng(seed)
    rho = random_faithful_state(sig, rng, floor=1e-3 / AlgebraSignature.parse(sig).matrix_size)
    x = random_element(sig, rng)
    val = gns_inner(rho, x, apply_modular(rho, x))
    assert abs(val.imag) <= 1e-12 * max(1.0, abs(val))
    assert val.real >= -1e-12


def test_f_of_modular_special_cases():
    rng = np.random.default_rng(3)
    rho = random_faithful_state("2,2", rng)
    b = random_element("2,2", rng)
    assert apply_f_of_modular(IDENTITY_FN, rho, b).allclose(apply_modular(rho, b), atol=1e-12)
    assert apply_f_of_modular(CONSTANT_ONE, rho, b).allclose(b, atol=1e-14)
    half = make_state("2", [np.eye(2) / 2])
    c = random_element("2", rng)
    assert apply_f_of_modular(SLD, half, c).allclose(c, atol=1e-15)


def test_f_of_modular_kmb_ratio_e():
    lam1 = np.e / (1 + np.e)
    rho = make_state("2", [np.diag([lam1, 1 - lam1])])
    e12 = AlgebraElement("2", [[[0, 1], [0, 0]]])
    out = apply_f_of_modular(KMB, rho, e12).blocks[0]
    assert out[0, 1].real == pytest.approx(np.e - 1, rel=1e-12)


def test_apply_F_examples():
    rng = np.random.default_rng(4)
    for sig in SIGNATURES:
        rho = random_faithful_state(sig, rng)
        w = random_element(sig, rng)
        assert apply_F(SLD, rho, w).allclose(2 * w, atol=1e-12)
    half = make_state("2", [np.eye(2) / 2])
    w = random_element("2", rng)
    for f in CATALOG.values():
        assert apply_F(f, half, w).allclose((2 / f.value_at_one) * w, atol=1e-14)
    rho = make_state("2", [np.diag([0.8, 0.2])])
    e12 = AlgebraElement("2", [[[0, 1], [0, 0]]])
    assert apply_F(GEOMETRIC, rho, e12).blocks[0][0, 1].real == pytest.approx(2.5, rel=1e-14)


def test_apply_F_singular():
    bad = MonotoneFunction("neg", lambda t: t - 2.0, -1.0)
    rho = make_state("2", [np.diag([0.8, 0.2])])
    with pytest.raises(SingularFunction):
        apply_F(bad, rho, identity("2"))


def test_operator_monotone_sampler():
    assert check_operator_monotone_sample(SLD, dim=4, trials=200, seed=0) >= -1e-12
    for f in CATALOG.values():
        assert check_operator_monotone_sample(f, dim=4, trials=200, seed=1) >= -1e-9
    assert check_operator_monotone_sample(SQUARE_PROBE, dim=2, trials=200, seed=0) < 0


def test_admit_gate():
    with pytest.raises(UnvalidatedFunction):
        admit(SQUARE_PROBE)
    user = MonotoneFunction("amean", lambda t: (1 + t) / 2, 1.0)
    assert not user.validated
    assert admit(user).validated
    # symmetric, but grows like t^1.5 so the sampler must reject it
    sym_not_monotone = MonotoneFunction("bad", lambda t: (1 + t**2) / (2 * np.sqrt(t)), 1.0)
    assert check_symmetry(sym_not_monotone) <= 1e-9
    with pytest.raises(UnvalidatedFunction):
        admit(sym_not_monotone)
