import math

import numpy as np
import pytest

from geosoliton import Grid2D
from geosoliton.checks import CheckResult, fit_kp_line, kp_line_ansatz, nls_soliton, run_check


def test_check_result_semantics():
    r = CheckResult("x", {"a": 1e-9, "b": 2.0}, {"a": 1e-8, "b": 1.0}, {}, {})
    assert not r.passed
    assert list(r.failures()) == ["b"]
    js = r.to_json()
    assert js["status"] == "fail" and js["passed"] is False and "elapsed" not in js
    assert r.summary().startswith("FAIL x")


def test_run_check_unknown():
    with pytest.raises(KeyError):
        run_check("nope")


def test_tol_override_applies_to_all():
    r = run_check("curve2d", tol=0.0, n_fields=1)
    assert r.tolerances == {"residual": 0.0}
    assert not r.passed


def test_seed_changes_data_but_not_verdict():
    a, b = run_check("mx_kp", seed=0, n_fields=2), run_check("mx_kp", seed=5, n_fields=2)
    assert a.passed and b.passed
    assert a.residuals != b.residuals


def test_nls_soliton_closed_form():
    x = np.linspace(0, 40, 256, endpoint=False)
    q = nls_soliton(x, 0.0, 1.0, 0.0, 40.0)
    assert np.max(np.abs(q)) == pytest.approx(1.0)
    assert abs(q[128]) == pytest.approx(1.0)


def test_kp_line_fit_recovers_amplitude():
    # the fitted amplitude is 2 kappa^2, as for the KdV soliton
    g = Grid2D(128, 128, 40.0, 40.0)
    A, c, q, r = fit_kp_line(g, 0.5, 1.0, 1.0)
    assert A == pytest.approx(0.5, rel=1e-4)
    assert np.linalg.norm(r) / np.linalg.norm(g.deriv_xx(q)) < 1e-6
    assert np.allclose(q, kp_line_ansatz(g, A, 0.5, 1.0, c))
    assert math.isfinite(c)
