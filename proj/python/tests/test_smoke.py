import math

import numpy as np
import pytest

import spectrum_lab as sl


def test_fee_arithmetic():
    assert sl.total_cost_horizon(198882, 900, 5) == 203382
    assert sl.fee_per_subscriber(1000, 100) == 10
    pay = sl.annuitize(1000, 0.05, 5)
    assert pay == pytest.approx(230.975, rel=1e-5)
    assert sum(pay / 1.05 ** t for t in range(1, 6)) == pytest.approx(1000, abs=1e-9)
    assert sl.hhi([0.4, 0.3, 0.3]) == pytest.approx(3400)


def test_errors_carry_their_kind():
    with pytest.raises(sl.SpectrumError, match="domain"):
        sl.fee_per_subscriber(10, 0)
    with pytest.raises(ValueError):
        sl.hhi([0.5, 0.4])


def test_equilibrium_and_statics():
    params = sl.reference_parameters()
    x = sl.reference_means()
    eq = sl.solve_equilibrium(params, x)
    assert 0.02 <= eq.q <= 0.45
    b = params.beta
    supply = params.alpha0 + b[0] * eq.p + b[1] * x.CL + b[2] * x.COMP + b[3] * x.POPD + b[4] * x.W
    demand = params.alpha1 + b[5] * eq.p + b[6] * x.INC + b[7] * x.pF + b[8] * x.TDF
    assert abs(supply - demand) < 1e-10
    dp, dq = sl.comparative_statics(params)
    assert dp == pytest.approx(0.2393, abs=1e-4)
    assert dq == pytest.approx(-4.06e-4, abs=1e-6)
    rf = sl.reduced_form(params)
    assert rf["coefficients"]["CL"] == dp


def test_toy_market_and_degenerate_slopes():
    p = sl.StructuralParameters()
    p.alpha1 = 10.0
    beta = [0.0] * 9
    beta[0], beta[5] = 1.0, -1.0
    p.beta = beta
    eq = sl.solve_equilibrium(p, sl.ExogenousProfile())
    assert (eq.p, eq.q) == (5.0, 5.0)
    assert not eq.in_domain
    beta[5] = 1.0
    p.beta = beta
    with pytest.raises(sl.SpectrumError, match="degenerate_model"):
        sl.solve_equilibrium(p, sl.ExogenousProfile())


def test_auction():
    out = sl.run_auction({"licenses": ["L"], "increment": 1}, [
        {"id": "A", "valuations": {"L": 10}},
        {"id": "B", "valuations": {"L": 7}},
    ], seed=1)
    lic = out["licenses"][0]
    assert lic["winner"] == "A"
    assert 7 <= lic["price"] <= 8


def test_ols_matches_numpy():
    rng = np.random.default_rng(0)
    x = np.column_stack([np.ones(60), rng.normal(size=(60, 2))])
    y = x @ np.array([1.0, -2.0, 0.5]) + rng.normal(size=60)
    fit = sl.ols(y, x, ["const", "a", "b"])
    want = np.linalg.lstsq(x, y, rcond=None)[0]
    got = np.array([c["coefficient"] for c in fit["coefficients"]])
    assert np.allclose(got, want, rtol=1e-10, atol=0)


def test_generate_and_estimate():
    a = sl.gen_data(18, seed=11)
    b = sl.gen_data(18, seed=11)
    assert set(a) == {"qS", "pW", "CL", "COMP", "POPD", "W", "pF", "INC", "TDF"}
    assert all(np.array_equal(a[k], b[k]) for k in a)
    fit = sl.estimate(a, "3sls", lenient=True)
    assert fit["method"] == "3SLS"
    assert [len(e["coefficients"]) for e in fit["equations"]] == [6, 5]
    assert fit["hypothesis"]["verdict"] in {"satisfied", "violated", "degenerate"}


def test_recovery_experiment():
    rep = sl.recovery_experiment(500, 5, seed=3)
    assert rep["replications"] == 5
    cl = next(c for c in rep["coefficients"] if c["equation"] == "supply" and c["regressor"] == "CL")
    assert math.isfinite(cl["mean_estimate"])
    assert rep == sl.recovery_experiment(500, 5, seed=3, threads=2)
