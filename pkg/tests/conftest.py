"""Session-scoped fixtures shared by the acceptance gate.

The two coefficient bundles and the weight pipeline are the expensive
objects (seconds each); everything else builds locally in the tests.
"""

import numpy as np
import pytest

from discosc import (GrowthScale, SharpnessParams, WeightPair,
                     build_coefficient, generate_radial_geometric,
                     generate_rho_lattice, generate_sharpness, weight_to_psi)


@pytest.fixture(scope="session")
def log_scale():
    return GrowthScale.log_power(1.0)


@pytest.fixture(scope="session")
def geo100():
    # ratio 0.8: the deepest gap 0.8^100 ~ 2e-10 stays well above the
    # binary64 resolution of 1-|z|, which a ratio-1/2 run of this length
    # would not
    return generate_radial_geometric(0.8, 100)


@pytest.fixture(scope="session")
def geo50_bundle(log_scale):
    return build_coefficient(generate_radial_geometric(0.8, 50), log_scale)


@pytest.fixture(scope="session")
def sharp6():
    return generate_sharpness(SharpnessParams(1.0, 1.0, 6))


@pytest.fixture(scope="session")
def sharp6_bundle(sharp6):
    # natural target scale for the clustered fixture: log^{1+eta1+eta2}
    return build_coefficient(sharp6, GrowthScale.log_power(3.0))


@pytest.fixture(scope="session")
def weight_pipeline():
    wt = WeightPair.log_power_weight(2.0)
    scale = weight_to_psi(wt)
    lattice = generate_rho_lattice(wt.rho, 0.8, 0.9)
    bundle = build_coefficient(lattice, scale)
    return wt, scale, lattice, bundle
