import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from kurograph import bifurcation as bf
from kurograph import graphon as gr
from kurograph.criticality import eigenvalue_branch
from kurograph.errors import DomainError, PreconditionError, UnsupportedOperation
from kurograph.spectral import nystrom_eigs

ER_COEFF = 0.4960715  # g0^2 pi^(3/2) / sqrt(-g''(0)) * 0.5^(3/2) for N(0, 1)


def decomp(kernel, n=256, k=6):
    return nystrom_eigs(gr.sample_weight_matrix(kernel, n), k)


def test_c_field_examples():
    assert np.allclose(bf.c_field(np.ones(7)), 1.0)
    assert np.allclose(bf.c_field(np.array([1.0, 2.0])), [3.4, 0.85])
    with pytest.raises(DomainError, match=r"\[1\]"):
        bf.c_field(np.array([1.0, 0.0, 2.0]))


@settings(max_examples=60, deadline=None)
@given(arrays(float, 12, elements=st.floats(0.1, 5.0)),
       st.floats(0.01, 100.0), st.floats(0, 2 * math.pi))
def test_c_field_scale_invariant(w, scale, angle):
    c = bf.c_field(w)
    scaled = bf.c_field(scale * np.exp(1j * angle) * w)
    assert np.max(np.abs(scaled - c)) <= 1e-12 * np.max(np.abs(c))


def test_er_coefficient(normal_model):
    pred = bf.predict_amplitude_1d(decomp(gr.constant(0.5)), normal_model)
    assert pred.case == "simple"
    assert np.allclose(pred.coefficient, ER_COEFF, atol=1e-6)
    assert pred.kc == pytest.approx(3.191538, abs=1e-6)
    assert pred.mean_amplitude(pred.kc + 0.2) == pytest.approx(ER_COEFF * math.sqrt(0.2), abs=1e-6)
    with pytest.raises(PreconditionError):
        pred.at(pred.kc - 0.1)


@pytest.mark.parametrize("kernel", [gr.constant(0.5), gr.constant(1.0), gr.small_world(0.1, 0.25),
                                    gr.custom(lambda x, y: (0.5 + 0.5 * x) * (0.5 + 0.5 * y))])
def test_two_amplitude_formulas_agree(normal_model, kernel):
    d = decomp(kernel)
    direct = bf.predict_amplitude_1d(d, normal_model).coefficient
    reduced = bf.amplitude_1d_reduced(d, normal_model)
    assert np.max(np.abs(direct - reduced)) <= 1e-10


def test_nonuniform_mode_gives_nonuniform_amplitude(normal_model):
    k = gr.custom(lambda x, y: (0.5 + 0.5 * x) * (0.5 + 0.5 * y))
    pred = bf.predict_amplitude_1d(decomp(k), normal_model)
    assert np.ptp(pred.coefficient) > 1e-3
    C = pred.constants["C"]
    assert np.allclose(pred.coefficient, pred.coefficient.max() * np.sqrt(C.min() / C), rtol=1e-12)


def test_p2_matches_closed_form(normal_model):
    g0, gpp = normal_model.g0, normal_model.gpp0
    assert bf.p2_constant(0.5, normal_model) == pytest.approx(-8 * gpp / (math.pi ** 3 * g0 ** 4), rel=1e-12)


def test_predict_2d(normal_model):
    d = decomp(gr.cosine())
    pred = bf.predict_amplitude(d, normal_model, K=4.0)
    assert pred.case == "double"
    assert np.allclose(pred.coefficient, ER_COEFF, atol=1e-6)
    assert pred.amplitude == pytest.approx(np.full(d.n, ER_COEFF * math.sqrt(4.0 - pred.kc)), abs=1e-6)
    assert "sqrt(eps/(3 p2))" in pred.notes
    with pytest.raises(UnsupportedOperation):
        bf.predict_amplitude_1d(d, normal_model)
    with pytest.raises(PreconditionError):
        bf.compute_C(d)
    with pytest.raises(UnsupportedOperation):
        bf.predict_amplitude_2d(decomp(gr.constant(0.5)), normal_model)


def test_p1_is_onset_slope(normal_model):
    pred = bf.predict_amplitude_1d(decomp(gr.constant(0.5)), normal_model)
    kc, p1 = pred.kc, pred.constants["p1"]
    for delta in (1e-4, 1e-3):
        lam = eigenvalue_branch(0.5, kc * (1 + delta), normal_model).lam.real
        assert lam == pytest.approx(p1 * kc * delta, rel=5 * delta)


def test_fit_recovers_exact_law():
    K = np.linspace(3.3, 3.6, 15)
    fit = bf.fit_sqrt_law(K, 0.7 * np.sqrt(K - 3.2))
    assert fit.exponent == pytest.approx(0.5, abs=1e-8)
    assert fit.A == pytest.approx(0.7, rel=1e-7)
    assert fit.kc == pytest.approx(3.2, abs=1e-8)
    fixed = bf.fit_sqrt_law(K, 0.7 * (K - 3.1) ** 0.4, kc=3.1)
    assert fixed.exponent == pytest.approx(0.4, abs=1e-12)


def test_fit_with_noise_stays_near_one_half():
    # 1% multiplicative noise on a grid reaching well above onset
    K = np.linspace(1.55, 3.5, 20)
    rng = np.random.default_rng(1)
    exps = [bf.fit_sqrt_law(K, np.sqrt(K - 1.5) * (1 + 0.01 * rng.standard_normal(K.size))).exponent
            for _ in range(30)]
    assert 0.47 <= min(exps) and max(exps) <= 0.53


def test_fit_preconditions():
    with pytest.raises(PreconditionError):
        bf.fit_sqrt_law([1, 2, 3, 4], [1, 1, 1, 1])
    K = np.linspace(1, 2, 10)
    with pytest.raises(PreconditionError):
        bf.fit_sqrt_law(K, np.sqrt(K), kc=1.5)
    with pytest.raises(PreconditionError):
        bf.fit_sqrt_law(K, np.sqrt(K), window=(1.0, 1.2))


def test_branch_data_validation():
    with pytest.raises(DomainError):
        bf.BranchData([1.0, 0.5], [0.1, 0.2], "galerkin")
    with pytest.raises(DomainError):
        bf.BranchData([1.0, 1.5], [0.1, -0.2], "galerkin")


def test_galerkin_sweep_across_threshold(normal_model):
    kc = 3.191538
    data = bf.sweep(gr.constant(0.5), normal_model, [kc - 0.5, kc + 0.3, kc + 0.6], n=4)
    assert data.summary[0] < 1e-9
    assert data.summary[1] == pytest.approx(0.248539, abs=1e-4)
    assert data.summary[2] > data.summary[1]
    assert data.converged.all()


def test_finite_n_sweep_is_deterministic(normal_model):
    args = (gr.constant(0.5), normal_model, [2.0, 5.0])
    kw = dict(engine="finite-n", n=128, T=20.0, dt=0.05, seed=3)
    a, b = bf.sweep(*args, **kw), bf.sweep(*args, **kw)
    assert np.array_equal(a.summary, b.summary)
    assert a.summary[1] > a.summary[0]
    with pytest.raises(DomainError):
        bf.sweep(*args, engine="spectral")
    with pytest.raises(DomainError):
        bf.sweep(gr.constant(0.5), normal_model, [2.0, 1.0])
