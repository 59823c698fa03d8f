"""Matter-wave interferometry of particles with internal mass spectra."""

from ._core import (
    InitialState,
    MassSpectrum,
    NumericalError,
    Pattern,
    ScreenWorldline,
    Species,
    ValidationError,
    VisibilityReport,
    arrival_time,
    beta_gamma,
    double_slit_dephasing,
    double_slit_short_time,
    evolve,
    final_packet,
    find_revival,
    fit_visibility,
    frame_equivalence_check,
    fringe_wavenumber,
    lab_pattern,
    phasor_visibility,
    proper_acceleration,
    proper_time_visibility,
    proper_to_minkowski,
    run_scenario,
    simulate_pattern,
    thermal_decoherence_time,
)

__all__ = [name for name in dir() if not name.startswith("_")]
