import numpy as np
import pytest

import twotier as tt

DBM = tt.dbm_to_mw


def single_type_config(lam=0.5, mu=0.5, nu=20.0, power_dbm=-70.0,
                       q_dbm=None, radius=0.2, profile=None, **kw):
    prof = profile or tt.IntensityProfile.constant(nu, radius)
    return tt.NetworkConfig(
        hex_radius=1.0,
        channel=tt.ChannelParams(1.0, 4.0, 4.0),
        tier1=(tt.Tier1UEType(lam, DBM(power_dbm)),),
        tier2=(tt.Tier2BSType(mu, radius, (
            tt.Tier2UEClass(DBM(q_dbm if q_dbm is not None else power_dbm), prof),)),),
        **kw,
    )


@pytest.fixture(scope="session")
def row1():
    """Single-type validation baseline."""
    return single_type_config()


@pytest.fixture(scope="session")
def tradeoff_config():
    """Two small-cell types, one class each; the linear-tradeoff scenario."""
    return tt.NetworkConfig(
        hex_radius=1.0,
        channel=tt.ChannelParams(1.0, 4.0, 4.0),
        tier1=(tt.Tier1UEType(0.1, DBM(-67)), tt.Tier1UEType(0.1, DBM(-66))),
        tier2=(
            tt.Tier2BSType(1.0, 0.2, (
                tt.Tier2UEClass(DBM(-60), tt.IntensityProfile.constant(10.0, 0.2)),)),
            tt.Tier2BSType(1.0, 0.2, (
                tt.Tier2UEClass(DBM(-59.2), tt.IntensityProfile.constant(8.0, 0.2)),)),
        ),
    )


@pytest.fixture(scope="session")
def planning_config():
    """Two-type planning scenario with two UE classes per cell type."""
    return tt.NetworkConfig(
        hex_radius=1.0,
        channel=tt.ChannelParams(1.0, 4.0, 4.0),
        tier1=(tt.Tier1UEType(0.2, DBM(-67)), tt.Tier1UEType(0.1, DBM(-66))),
        tier2=(
            tt.Tier2BSType(1.0, 0.2, (
                tt.Tier2UEClass(DBM(-67), tt.IntensityProfile.constant(10.0, 0.2)),
                tt.Tier2UEClass(DBM(-67), tt.IntensityProfile.constant(5.0, 0.2)))),
            tt.Tier2BSType(1.0, 0.2, (
                tt.Tier2UEClass(DBM(-70), tt.IntensityProfile.constant(5.0, 0.2)),
                tt.Tier2UEClass(DBM(-64), tt.IntensityProfile.constant(5.0, 0.2)))),
        ),
    )


@pytest.fixture(scope="session")
def orthogonal_config():
    """Dense network with 16 orthogonal resource blocks per BS."""
    return tt.NetworkConfig(
        hex_radius=1.0,
        channel=tt.ChannelParams(1.0, 4.0, 4.0),
        tier1=(tt.Tier1UEType(1.6, DBM(-67)), tt.Tier1UEType(1.6, DBM(-65.2))),
        tier2=(
            tt.Tier2BSType(1.0, 0.1, (
                tt.Tier2UEClass(DBM(-70), tt.IntensityProfile.constant(16.0, 0.1)),
                tt.Tier2UEClass(DBM(-64), tt.IntensityProfile.constant(48.0, 0.1)))),
            tt.Tier2BSType(1.0, 0.2, (
                tt.Tier2UEClass(DBM(-67), tt.IntensityProfile.constant(32.0, 0.2)),
                tt.Tier2UEClass(DBM(-67), tt.IntensityProfile.constant(32.0, 0.2)))),
        ),
        access=tt.AccessMode.orthogonal(16),
    )


@pytest.fixture(scope="session")
def planning_utilities():
    return [tt.UtilitySpec.scaled_log(1.5, 10.0), tt.UtilitySpec.scaled_log(1.0, 10.0)]


def make_rng(seed=0):
    return np.random.default_rng(seed)
