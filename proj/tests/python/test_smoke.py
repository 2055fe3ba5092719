import math
import os
from pathlib import Path

import pytest

import ephs

MODELS = Path(os.environ.get("EPHS_MODELS_DIR", Path(__file__).resolve().parents[2] / "models"))


def test_oscillator_rhs():
    model = ephs.load(str(MODELS / "oscillator_isothermal.ephs"))
    assert "oscillator" in model.systems
    sys = ephs.flatten(model, "oscillator")
    assert sys.states == ["mass.p", "spring.q", "s_e"]
    deriv, _ = sys.rhs([1.0, 0.0, 0.0])
    assert deriv[0] == -0.5
    assert deriv[1] == 1.0
    assert math.isclose(deriv[2], 1 / 600, rel_tol=1e-14)


def test_simulation_conserves_energy():
    sys = ephs.flatten(ephs.load(str(MODELS / "oscillator_isothermal.ephs")), "oscillator")
    traj = ephs.simulate(sys, t_end=2.0, dt=1e-3)
    assert traj.states.shape == (2001, 3)
    assert traj.times[-1] == 2.0
    energy = traj.monitors[:, traj.monitor_names.index("energy")]
    assert abs(energy - energy[0]).max() <= 1e-9 * energy[0]
    ok, text = traj.report()
    assert ok, text


def test_errors_carry_kind():
    with pytest.raises(ephs.EphsError) as info:
        ephs.parse("interface X { port a b }")
    assert info.value.kind == "SyntaxError"


def test_expressions():
    assert ephs.differentiate("x^3", "x") == "3*x^2"
    assert ephs.evaluate("a*b + 1", {"a": 2, "b": 3}) == 7


def test_render_and_compose():
    model = ephs.load(str(MODELS / "damper_nonisothermal.ephs"))
    assert model.render("oscillator_nested").startswith("graph")
    assert "diagram oscillator_nested_flat" in model.compose("oscillator_nested")
