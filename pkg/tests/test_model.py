"""Parameter records, scalings, snow-line geometry, vector fields, nullclines."""

from __future__ import annotations

import math
from dataclasses import FrozenInstanceError

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import glacier_dyn as gd
from glacier_dyn.model import nullcline_f, nullcline_g


def test_physical_params_validation(table1_physical):
    good = table1_physical
    with pytest.raises(gd.ConfigError):
        gd.PhysicalParams(**{**_as_kwargs(good), "Q": -1.0})
    with pytest.raises(gd.ConfigError):
        gd.PhysicalParams(**{**_as_kwargs(good), "gamma": 1.5})
    with pytest.raises(gd.ConfigError):
        gd.PhysicalParams(**{**_as_kwargs(good), "A": 10.0})
    with pytest.raises(gd.ConfigError):
        gd.PhysicalParams(**{**_as_kwargs(good), "s": 0.0})
    with pytest.raises(gd.ConfigError):
        gd.PhysicalParams(**{**_as_kwargs(good), "alpha2": -4.0})


def _as_kwargs(p: gd.PhysicalParams) -> dict:
    from dataclasses import fields

    return {f.name: getattr(p, f.name) for f in fields(p)}


def test_physical_params_frozen(table1_physical):
    with pytest.raises(FrozenInstanceError):
        table1_physical.Q = 1000.0


def test_physical_from_dict_strict(table1_physical):
    data = {
        k: (v.to_dict() if isinstance(v, gd.SigmoidResponse) else v)
        for k, v in _as_kwargs(table1_physical).items()
        if v is not None
    }
    assert gd.PhysicalParams.from_dict(data) == table1_physical
    with pytest.raises(gd.ConfigError):
        gd.PhysicalParams.from_dict({**data, "bogus": 1.0})
    missing = {k: v for k, v in data.items() if k != "tau0"}
    with pytest.raises(gd.ConfigError):
        gd.PhysicalParams.from_dict(missing)
    # grav is optional and defaults to 9.81
    no_grav = {k: v for k, v in data.items() if k != "grav"}
    assert gd.PhysicalParams.from_dict(no_grav).grav == 9.81


def test_model_params_validation(hopf_model):
    with pytest.raises(gd.ConfigError):
        hopf_model.with_overrides(beta=0.0)
    with pytest.raises(gd.ConfigError):
        hopf_model.with_overrides(gamma=1.0)
    with pytest.raises(gd.ConfigError):
        hopf_model.with_overrides(
            albedo=gd.SigmoidResponse(
                limit_minus=1.2, limit_plus=0.2, center=1.4, steepness=0.02
            )
        )


def test_model_with_overrides_returns_new_instance(hopf_model):
    other = hopf_model.with_overrides(beta=0.9)
    assert other.beta == 0.9
    assert hopf_model.beta != 0.9
    assert other.albedo == hopf_model.albedo


def test_state_validation():
    with pytest.raises(gd.DomainError):
        gd.State(theta=0.0, lam=0.1)
    with pytest.raises(gd.DomainError):
        gd.State(theta=1.0, lam=0.0)
    with pytest.raises(gd.DomainError):
        gd.State(theta=1.0, lam=-0.1)
    # lambda above 1/4 is legal: the full model reaches it
    gd.State(theta=1.0, lam=0.3)


def test_sheet_height_scale_example():
    h = gd.sheet_height_scale(30000.0, 920.0, 9.81)
    assert h == pytest.approx(math.sqrt(4.0 * 30000.0 / (3.0 * 920.0 * 9.81)), rel=1e-15)
    assert h == pytest.approx(2.1052398312668363, rel=1e-12)


def test_scales_from_table1(table1_scales, table1_model):
    assert table1_scales.T_star == pytest.approx(195.54597701149424, rel=1e-12)
    assert table1_scales.L_star == pytest.approx(27700217.169702612, rel=1e-12)
    assert table1_scales.t_star == pytest.approx(33373.75562614772, rel=1e-12)
    assert table1_scales.mu == pytest.approx(183256.03971530317, rel=1e-12)
    assert table1_scales.t_star_unit == "yr"
    assert table1_model.epsilon == pytest.approx(0.1083024, rel=1e-6)
    assert table1_model.beta == pytest.approx(0.7875385745775165, rel=1e-12)


def test_scales_reject_nonpositive():
    with pytest.raises(gd.ScaleError) as err:
        gd.Scales(T_star=-1.0, L_star=1.0, t_star=1.0, mu=1.0)
    assert err.value.symbol == "T_star"


def test_mu_equals_tstar_times_relaxation_rate(table1_physical, table1_scales):
    # mu = t*(in seconds) * B/c: the ratio of ice to temperature time scales
    t_star_seconds = table1_scales.t_star * gd.model.SECONDS_PER_YEAR
    expected = t_star_seconds * table1_physical.B / table1_physical.c
    assert table1_scales.mu == pytest.approx(expected, rel=1e-12)


def test_continental_albedo(hopf_model):
    assert gd.continental_albedo(hopf_model, 0.0) == hopf_model.alpha1
    assert gd.continental_albedo(hopf_model, 0.1) == pytest.approx(
        hopf_model.alpha1 + 0.1 * hopf_model.alpha2, rel=1e-15
    )
    with pytest.raises(gd.DomainError):
        gd.continental_albedo(hopf_model, -0.01)


def test_ice_profile_height():
    H = 2.0
    assert gd.ice_profile_height(0.0, 1.0, H) == pytest.approx(2.0, rel=1e-15)
    assert gd.ice_profile_height(1.0, 1.0, H) == 0.0
    assert gd.ice_profile_height(-0.5, 1.0, H) == pytest.approx(
        H * math.sqrt(0.5), rel=1e-15
    )
    with pytest.raises(gd.OutOfProfile):
        gd.ice_profile_height(1.5, 1.0, H)
    with pytest.raises(gd.DomainError):
        gd.ice_profile_height(0.0, 0.0, H)


def test_lambda0_reference_values():
    # eps = 0: lambda0 = (1/lam) * (sqrt(2*lam + 1/4) - lam - 1/2)
    lam = 0.1
    expected = (math.sqrt(2 * lam + 0.25) - lam - 0.5) / lam
    assert gd.lambda0(lam, 0.0) == pytest.approx(expected, rel=1e-14)
    # boundary identity: at lam = -eps/2 the snow line sits exactly at 1
    assert gd.lambda0(0.05, -0.1) == pytest.approx(1.0, abs=1e-13)
    with pytest.raises(gd.DomainError):
        gd.lambda0(0.0, 0.0)
    with pytest.raises(gd.ComplexSnowline):
        gd.lambda0(0.01, -0.3)


@given(
    lam=st.floats(1e-6, 0.25),
    eps=st.floats(-0.04, 0.24),
)
@settings(max_examples=300, deadline=None)
def test_lambda0_bounded_above_by_one(lam, eps):
    if eps < 0 and lam < -eps / 2.0:
        lam = -eps / 2.0  # below nucleation threshold lambda0 exceeds 1
    assert gd.lambda0(lam, eps) <= 1.0 + 1e-12


def test_vector_field_signs(hopf_model):
    # cold, tiny sheet: temperature bracket positive, sheet shrinking
    F, G = gd.vector_field(hopf_model, 1.0, gd.State(1.1, 0.02))
    assert isinstance(F, float) and isinstance(G, float)
    # on the ice nullcline g(theta), G vanishes
    theta = 1.43
    lam_on_g = nullcline_g(hopf_model, theta, 0)
    _, G0 = gd.vector_field(hopf_model, 1.0, gd.State(theta, lam_on_g))
    assert abs(G0) < 1e-14
    # on the temperature nullcline f(theta), F vanishes
    lam_on_f = nullcline_f(hopf_model, theta, 0)
    F0, _ = gd.vector_field(hopf_model, 2.0, gd.State(theta, lam_on_f))
    assert abs(F0) < 1e-12


def test_vector_field_scales_linearly_in_mu(hopf_model):
    s = gd.State(1.3, 0.05)
    F1, G1 = gd.vector_field(hopf_model, 1.0, s)
    F2, G2 = gd.vector_field(hopf_model, 7.5, s)
    assert F2 == pytest.approx(7.5 * F1, rel=1e-14)
    assert G2 == G1


def test_full_regime_selection(hopf_model):
    # positive eps: no nucleation. The snow line sits on the sheet for
    # moderate extents; once lambda grows past (1 - 2 eps + sqrt(1-4 eps))/2
    # the ablation zone covers the sheet and the regime turns stagnant.
    params = hopf_model.with_overrides(epsilon=0.1)
    _, _, regime = gd.vector_field_full(params, 1.0, gd.State(1.3, 0.05))
    assert regime is gd.Regime.ACCUMULATING
    assert gd.lambda0(0.9, 0.1) < 0
    _, G, regime = gd.vector_field_full(params, 1.0, gd.State(1.3, 0.9))
    assert regime is gd.Regime.STAGNANT
    assert G == pytest.approx(-math.sqrt(0.9), rel=1e-15)


def test_full_regime_nucleation_checked_first(hopf_model):
    # eps < 0 and lambda < -eps/2: nucleation wins even though lambda0 > 0
    params = hopf_model.with_overrides(epsilon=-0.1)
    lam = 0.04  # below -eps/2 = 0.05
    assert gd.lambda0(lam, params.epsilon) > 0
    _, G, regime = gd.vector_field_full(params, 1.0, gd.State(1.3, lam))
    assert regime is gd.Regime.NUCLEATION
    xi = gd.response_eval(params.accum, 1.3, 0)
    assert G == pytest.approx(-(xi / (2.0 * math.sqrt(lam))) * params.epsilon, rel=1e-14)
    assert G > 0  # nucleation grows the sheet


def test_full_approaches_simplified_at_eps_zero(hopf_model):
    # The simplified ice equation truncates lambda0(lam, 0) = 1 - 4*lam
    # + 16*lam^2 - ... after two terms; the alternating tail gives
    # 0 <= lambda0 - (1 - 4*lam) <= 16*lam^2, hence the gap bound below.
    params = hopf_model.with_overrides(epsilon=0.0)
    xi_sup = hopf_model.accum.limit_plus
    for lam in np.linspace(1e-4, 0.05, 60):
        for theta in (1.0, 1.3, 1.45, 1.8):
            F_s, G_s = gd.vector_field(hopf_model, 1.4, gd.State(theta, float(lam)))
            F_f, G_f, regime = gd.vector_field_full(params, 1.4, gd.State(theta, float(lam)))
            assert regime is gd.Regime.ACCUMULATING
            assert F_f == pytest.approx(F_s, rel=1e-14)
            assert 0.0 <= G_f - G_s <= 16.0 * (1.0 + xi_sup) * lam**2.5 + 1e-15


def test_full_near_simplified_small_lambda(hopf_model):
    # tiny eps and small sheets: the two right-hand sides agree to 1e-4
    params = hopf_model.with_overrides(epsilon=1e-6)
    for lam in np.linspace(1e-4, 0.005, 40):
        for theta in (0.9, 1.2, 1.5, 1.9):
            _, G_s = gd.vector_field(hopf_model, 1.0, gd.State(theta, float(lam)))
            _, G_f, _ = gd.vector_field_full(params, 1.0, gd.State(theta, float(lam)))
            assert abs(G_f - G_s) <= 1e-4


@pytest.mark.parametrize("order", [1, 2, 3])
def test_nullcline_f_derivatives_match_fd(hopf_model, order):
    h = 1e-5
    for theta in (1.36, 1.40, 1.44):
        fd = (
            nullcline_f(hopf_model, theta + h, order - 1)
            - nullcline_f(hopf_model, theta - h, order - 1)
        ) / (2.0 * h)
        assert nullcline_f(hopf_model, theta, order) == pytest.approx(
            fd, rel=5e-5, abs=1e-6
        )


@pytest.mark.parametrize("order", [1, 2, 3])
def test_nullcline_g_derivatives_match_fd(hopf_model, order):
    h = 1e-6
    for theta in (1.41, 1.43, 1.45):
        fd = (
            nullcline_g(hopf_model, theta + h, order - 1)
            - nullcline_g(hopf_model, theta - h, order - 1)
        ) / (2.0 * h)
        assert nullcline_g(hopf_model, theta, order) == pytest.approx(
            fd, rel=5e-4, abs=1e-6
        )


def test_nullcline_g_range(hopf_model):
    # g = xi/(4(1+xi)) with xi in [0.1, 0.5]: range inside (0, 1/4)
    thetas = np.linspace(0.5, 2.5, 201)
    g = nullcline_g(hopf_model, thetas, 0)
    assert np.all(g > 0.0)
    assert np.all(g < 0.25)
    assert np.all(np.diff(g) >= 0.0)  # increasing accumulation: g increases


def test_nullcline_vectorized_matches_scalar(hopf_model):
    thetas = np.array([1.1, 1.4, 1.7])
    f_vec = nullcline_f(hopf_model, thetas, 0)
    g_vec = nullcline_g(hopf_model, thetas, 1)
    for i, theta in enumerate(thetas):
        assert f_vec[i] == pytest.approx(nullcline_f(hopf_model, float(theta), 0))
        assert g_vec[i] == pytest.approx(nullcline_g(hopf_model, float(theta), 1))


def test_dimensional_round_trip(table1_scales):
    s = gd.State(theta=1.4349, lam=0.0822)
    d = gd.to_dimensional(s, table1_scales)
    assert d.T_kelvin == pytest.approx(1.4349 * table1_scales.T_star, rel=1e-15)
    back = gd.from_dimensional(d, table1_scales)
    assert back.theta == pytest.approx(s.theta, rel=1e-14)
    assert back.lam == pytest.approx(s.lam, rel=1e-14)
