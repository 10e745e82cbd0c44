"""Python bindings for the mmlink multimode ion-photon link toolkit."""

from ._core import (  # noqa: F401
    bell_state,
    budget_chain,
    calibrate_rabi,
    concurrence,
    detection_probability_with_error,
    effective_rate,
    enhancement_factor,
    equilibrium_positions,
    fidelity,
    gaussian_coupling,
    integrate_wavepacket,
    mle_reconstruct,
    multiplicity_distribution,
    noisy_fidelity,
    optimize_local_rotation,
    run_link_simulation,
    simulate_counts,
    split_drive,
    stark_shift,
    string_angle_from_projection,
    success_probability,
    werner,
)

__all__ = [name for name in dir() if not name.startswith("_")]
