import json
import math
import os
import pathlib

import numpy as np
import pytest

import mwi

SCENARIOS = pathlib.Path(os.environ.get("MWI_SCENARIO_DIR", pathlib.Path(__file__).resolve().parents[2] / "scenarios"))


def test_arrival_time():
    assert mwi.arrival_time(100.0, 10.0, 50.0) == pytest.approx(500.0)
    with pytest.raises(mwi.ValidationError):
        mwi.arrival_time(-1.0, 10.0, 50.0)


def test_final_packet_is_normalized_and_mass_free():
    ini = mwi.InitialState.double_slit(0.5, -0.5, 0.02, k0=200.0, points=32768, extent=200.0)
    fin = mwi.final_packet(ini, 100.0)
    dz = fin["z"][1] - fin["z"][0]
    assert np.sum(np.abs(fin["psi"]) ** 2) * dz == pytest.approx(1.0, abs=1e-9)
    a = mwi.evolve(ini, 2e4, mwi.arrival_time(2e4, 200.0, 100.0))["psi"]
    b = mwi.evolve(ini, 4e4, mwi.arrival_time(4e4, 200.0, 100.0))["psi"]
    assert np.max(np.abs(a - b)) <= 1e-8 * np.max(np.abs(a))


def test_rest_screen_pattern_has_full_visibility():
    ini = mwi.InitialState.double_slit(0.5, -0.5, 0.02, k0=200.0, points=32768, extent=200.0)
    spectrum = mwi.MassSpectrum.discrete([mwi.Species(2e4, 0.5), mwi.Species(2.1e4, 0.5)])
    p = mwi.simulate_pattern(ini, spectrum, mwi.ScreenWorldline.rest(100.0))
    alpha = mwi.fringe_wavenumber(200.0, 0.5, -0.5, 100.0)
    assert alpha == pytest.approx(2.0)
    r = mwi.fit_visibility(p.Z, p.total, alpha)
    assert r.visibility == pytest.approx(1.0, abs=1e-3)


def test_phasor_and_decoherence_time():
    s = mwi.MassSpectrum.thermal(1.99e6, 2.0, 5000.0)
    tau = mwi.thermal_decoherence_time(2.0, 5000.0, 4e-6, 0.05)
    assert tau == pytest.approx(1000.0)
    phases = mwi.double_slit_dephasing(s, 4e-6, tau, 0.025, -0.025)
    assert mwi.phasor_visibility(s, phases).visibility == pytest.approx(math.exp(-1.0), abs=1e-10)


def test_revival_pair():
    s = mwi.MassSpectrum.discrete([mwi.Species(999.0, 0.5), mwi.Species(1001.0, 0.5)])
    t = mwi.find_revival(s, k0=10.0, z1=0.5, z2=-0.5, g=1e-3, L=50.0)
    assert t == pytest.approx(math.pi / 1e-3, rel=1e-9)


def test_worldline_kinematics():
    w = mwi.ScreenWorldline.uniform_velocity(10.0, 0.6)
    assert mwi.beta_gamma(w, 1.0) == pytest.approx((0.6, 1.25))
    a = mwi.ScreenWorldline.uniform_acceleration(10.0, 1e-3)
    assert a.z_of_t(100.0) == pytest.approx(5.0)


def test_weights_must_sum_to_one():
    with pytest.raises(mwi.ValidationError, match="weights must sum to 1"):
        mwi.MassSpectrum.discrete([mwi.Species(1.0, 0.5), mwi.Species(2.0, 0.48)])


def test_run_scenario(tmp_path):
    summary, files = mwi.run_scenario(str(SCENARIOS / "double_slit_rest.yaml"), str(tmp_path))
    assert "pattern" in summary
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["V_fit"] == pytest.approx(1.0, abs=1e-3)
    assert len(files) == 3
