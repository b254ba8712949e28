import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import dbnoise as dbn

settings.register_profile(
    "deterministic",
    derandomize=True,
    deadline=None,
    max_examples=200,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deterministic")


#: first transfer-matrix resonance of the default geometry, frozen from
#: the analytic oracle (tests recompute it where that is the point)
E_R0_DEFAULT = 0.08372755348299912


@pytest.fixture(scope="session")
def default_cfg():
    return dbn.default_config()


@pytest.fixture(scope="session")
def fast_cfg():
    """Cheap but physically equivalent setup for harness-level tests.

    Same barrier structure as the default (so the resonance physics is
    identical) on a smaller, coarser grid with a narrower packet; one
    propagation takes a fraction of a second.
    """
    return dbn.build_experiment(
        {
            "grid.x_min": -500.0,
            "grid.x_max": 500.0,
            "grid.dx": 0.1,
            "packet.x0": -140.0,
            "packet.sigma": 35.0,
            "sweep.e_min": 0.07,
            "sweep.e_max": 0.10,
            "sweep.n_energies": 3,
            "sweep.w_min": -4e-4,
            "sweep.w_max": 4e-4,
            "sweep.n_frequencies": 3,
        }
    )


@pytest.fixture(scope="session")
def resonant_pair(default_cfg):
    """One settled pair at the static resonance on the default setup."""
    return dbn.run_single(default_cfg, energy=E_R0_DEFAULT)


def single_packet_transmission(cfg, energy, frequency=None):
    """Propagate only the left-injected packet and return its T."""
    from dataclasses import replace

    packet = replace(cfg.packet, energy=energy)
    potential = cfg.potential
    if frequency is not None and potential is not None:
        potential = replace(potential, osc_angular_frequency=frequency)
    field0 = dbn.init_gaussian(packet, cfg.grid, cfg.model)
    res = dbn.propagate_until_settled(field0, potential, cfg.propagation, cfg.model)
    window = dbn.propagation.structure_window(
        potential, cfg.propagation.barrier_margin
    ) if potential is not None else None
    t, r = dbn.coefficients(
        res.final_field,
        packet.direction,
        check_window=window,
        settle_threshold=cfg.propagation.settle_threshold,
    )
    return t, r, res


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)
