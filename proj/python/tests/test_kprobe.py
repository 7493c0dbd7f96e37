import math

import numpy as np
import pytest

import kprobe


def test_catalog_round_trip():
    names = kprobe.catalog_names()
    assert "coupled-saddle" in names and "degenerate-center" in names
    m = kprobe.model("saddle-corank2")
    assert (m.n, m.k) == (3, 2)
    again = kprobe.model(__import__("json").loads(m.to_json()))
    assert again.to_json() == m.to_json()


def test_det_hessian_closed_form():
    r = kprobe.det_hessian("decoupled-corank1", [0.0, math.exp(-2.0)])
    assert r["detHess"] == pytest.approx(math.exp(2.0) / 8.0, rel=1e-10)


def test_jacobian_and_frequency_are_arrays():
    m = kprobe.model("saddle-corank1")
    J = kprobe.jacobian(m, [0.0, 1e-3])
    g = kprobe.frequency(m, [0.0, 1e-3])
    assert isinstance(J, np.ndarray) and J.shape == (2, 2)
    # saddle chart: dI/dF = -ln F
    assert J[1, 1] == pytest.approx(-math.log(1e-3), rel=1e-10)
    assert g.shape == (2,)


def test_fit_action_saddle():
    fit = kprobe.fit_action("saddle-corank1", 1)
    assert fit["psi0"] == pytest.approx(-1.0, abs=1e-4)


def test_scaling_and_box():
    s = kprobe.scaling("coupled-saddle", tmin=1e-6)
    assert s["verdict"] == "kolmogorov-holds"
    assert s["g_estimate"] == pytest.approx(-1.0, rel=1e-3)
    box = kprobe.verify_box("degenerate-center", [-0.1, 1e-6], [0.1, 1e-2], samples=200)
    assert box["verdict"] == "hypothesis-violated"


def test_validate_reports_witness():
    v = kprobe.validate("degenerate-hyperbolic")
    assert not v["all_pass"]
    assert v["cond3"][0]["witness"] == "dH/dF_2(0) = 0"


def test_errors_map_to_python_exceptions():
    with pytest.raises(kprobe.ConfigError):
        kprobe.model("no-such-model")
    with pytest.raises(kprobe.DomainError):
        kprobe.det_hessian("saddle-corank1", [0.0, -1e-3])


def test_run_cli_models_list():
    code, out, _ = kprobe.run_cli(["models", "list"])
    assert code == 0 and "pendulum-rotation" in out
