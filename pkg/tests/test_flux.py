import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radonlaw import flux as fluxlib
from radonlaw.errors import DomainError, UnsupportedFluxError

CATALOG = [
    fluxlib.power(-1.0),
    fluxlib.power(-0.5),
    fluxlib.power(-2.0),
    fluxlib.power(0.5),
    fluxlib.exponential(1.0),
    fluxlib.logarithmic(),
    fluxlib.loglog(),
]


def test_power_values(burgers_like):
    # phi(1) = 1 - 1/2, phi'(1) = 1/4, phi''(1) = -2/8
    assert burgers_like(1.0) == pytest.approx(0.5, abs=1e-15)
    assert burgers_like.deriv(1.0) == pytest.approx(0.25, abs=1e-15)
    assert burgers_like.deriv2(1.0) == pytest.approx(-0.25, abs=1e-15)
    sqrt_flux = fluxlib.power(0.5)
    assert sqrt_flux(3.0) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("f", CATALOG, ids=repr)
def test_catalog_starts_at_zero_and_is_increasing(f):
    u = fluxlib.hypothesis_grid()
    assert f(0.0) == 0.0
    assert np.all(f.deriv(u) >= 0) and f.deriv(1.0) > 0
    assert np.all(np.diff(f(u)) >= 0)


def test_constants():
    f = fluxlib.power(-1.0)
    assert (f.cphi, f.lipschitz, f.gamma) == (0.0, 1.0, 1.0)
    assert f.h2_params == (-0.5, 0.5)
    assert fluxlib.power(0.5).gamma == math.inf
    assert not fluxlib.power(0.5).bounded
    assert fluxlib.exponential(2.0).lipschitz == 2.0
    assert fluxlib.linear(0.3).cphi == 0.3
    g = fluxlib.power(-1.0, drift=0.3)
    assert g.cphi == 0.3 and g.lipschitz == pytest.approx(1.3)


def test_negative_arguments_are_clamped_and_nonfinite_rejected(burgers_like):
    assert burgers_like(-1e-14) == 0.0
    with pytest.raises(DomainError):
        burgers_like(np.nan)


@pytest.mark.parametrize("p", [1.0, 0.0, 2.0])
def test_power_domain(p):
    with pytest.raises(DomainError):
        fluxlib.power(p)


@pytest.mark.parametrize(
    "f",
    [fluxlib.power(-1.0), fluxlib.power(-0.25), fluxlib.power(-3.0), fluxlib.power(0.5), fluxlib.power(0.9),
     fluxlib.exponential(1.0), fluxlib.exponential(3.0), fluxlib.logarithmic()],
    ids=repr,
)
def test_h2_is_saturated_for_catalog(f):
    rep = fluxlib.check_hypotheses(f)
    h2 = rep["H2"]
    assert h2.holds
    assert h2.equality <= 1e-9


def test_loglog_fails_h2_but_satisfies_shifted_h2():
    rep = fluxlib.check_hypotheses(fluxlib.loglog(), shifts=(1.0, 3.0))
    assert rep["H2k[1]"].holds
    assert rep["H2k[3]"].holds


def test_shifted_pair_for_power():
    # (1 + k)^p |H| for the p = -1 flux at k = 1: 2^-1 * 1/2
    fk = fluxlib.power(-1.0).shifted(1.0)
    assert fk.h2_params == pytest.approx((-0.5, 0.25))
    assert fk(0.0) == 0.0
    assert fk(1.0) == pytest.approx(2 / 3 - 1 / 2)


def test_h2prime_for_drifting_flux():
    f = fluxlib.power(-1.0, drift=0.3)
    rep = fluxlib.check_hypotheses(f, samples=fluxlib.hypothesis_grid(n=129))
    assert not rep["H2"].holds  # C_phi != 0
    assert rep["H2prime"].holds


def test_blowup_profile_closed_form_matches_quadrature():
    for f in (fluxlib.power(-1.0), fluxlib.power(-0.5), fluxlib.exponential(1.0)):
        prof = fluxlib.blowup_profile(f)
        for y in (0.1, 1.0, 10.0, 1e3):
            assert prof.psi(y) == pytest.approx(prof.psi_numeric(y), rel=1e-10)
        assert prof.psi_inf == pytest.approx(prof.psi_numeric(math.inf), rel=1e-10)
        s = 0.7 * prof.psi_inf
        assert prof.psi(prof.psi_inv(s)) == pytest.approx(s, rel=1e-12)


def test_blowup_profile_p_minus_one():
    # Psi(y) = 1 - (1 + y)^-2 for phi = u / (1 + u)
    prof = fluxlib.blowup_profile(fluxlib.power(-1.0))
    assert prof.psi(1.0) == pytest.approx(0.75)
    assert prof.psi_inv(0.75) == pytest.approx(1.0)
    assert prof.psi_inv(prof.psi_inf) == math.inf


def test_blowup_profile_loglog_is_numeric():
    prof = fluxlib.blowup_profile(fluxlib.loglog())
    assert prof.closed is None and math.isfinite(prof.psi_inf)
    s = 0.5 * prof.psi_inf
    assert prof.psi(prof.psi_inv(s)) == pytest.approx(s, rel=1e-8)


def test_linear_flux_has_no_profile():
    with pytest.raises(UnsupportedFluxError):
        fluxlib.blowup_profile(fluxlib.linear(1.0))


def test_parse_and_config_roundtrip():
    assert fluxlib.parse_flux("power:-1").params["p"] == -1.0
    assert fluxlib.parse_flux("exponential").params["alpha"] == 1.0
    f = fluxlib.from_config({"kind": "power", "p": 0.5, "drift": 0.2})
    g = fluxlib.from_config(f.to_config())
    u = np.linspace(0, 5, 11)
    assert np.array_equal(f(u), g(u))
    with pytest.raises(DomainError):
        fluxlib.parse_flux("cubic:3")


def test_tabulated_flux_tracks_samples():
    u = np.linspace(0, 20, 401)
    f = fluxlib.tabulated(u, u / (1 + u), H=-0.5, K=0.5)
    ref = fluxlib.power(-1.0)
    x = np.linspace(0, 20, 97)
    assert np.max(np.abs(f(x) - ref(x))) < 1e-5
    assert f.h2_params == (-0.5, 0.5)


@settings(max_examples=50, deadline=None)
@given(p=st.floats(-4.0, 0.95).filter(lambda p: abs(p) > 1e-3), u=st.floats(0, 1e4))
def test_power_flux_is_concave_and_bounded_by_lipschitz(p, u):
    f = fluxlib.power(p)
    assert f.deriv2(u) <= 0
    assert 0 <= f.deriv(u) <= f.lipschitz * (1 + 1e-12)
    if p < 0:
        assert f(u) <= f.gamma
