import numpy as np
import pytest

from fran_idnc import channel
from fran_idnc.model import ScenarioConfig, generate_scenario
from fran_idnc.scenario import bundled, load_fixed


@pytest.mark.parametrize("d, db", [(1.0, 148.0), (0.1, 108.0), (0.9, 146.1697)])
def test_path_loss(d, db):
    assert channel.path_loss_db(d) == pytest.approx(db, abs=1e-4)


def test_two_errh_sinr():
    gains = np.array([[1e-9, 1e-10]])
    sinr = channel.errh_sinr_matrix([1.0, 1.0], gains, 1e-12)
    assert sinr[0, 0] == pytest.approx(1e-9 / (1e-12 + 1e-10))
    assert channel.errh_rate([1.0, 1.0], gains, 0, 0, 1e-12, 1.0) == pytest.approx(np.log2(1 + 1e-9 / 1.01e-10))
    assert round(channel.errh_rate([1.0, 1.0], gains, 0, 0, 1e-12, 1.0), 3) in (3.446, 3.447)


def test_single_active_errh_is_interference_free():
    gains = np.array([[2e-10, 5e-10]])
    assert channel.errh_sinr_matrix([0.5, 0.0], gains, 1e-12)[0, 0] == pytest.approx(0.5 * 2e-10 / 1e-12)
    assert channel.errh_rate([0.0, 1.0], gains, 0, 0, 1e-12) == 0.0


def test_d2d_rate_zone_and_symmetry():
    g = np.array([[0, 1e-9, 1e-11], [1e-9, 0, 1e-11], [1e-11, 1e-11, 0]])
    zones = [{1}, {0}, set()]
    assert channel.d2d_rate([0], g, 0, 2, 1.0, 1e-12, zones) == 0.0
    a = channel.d2d_rate([0, 1], g, 0, 1, 1.0, 1e-12, zones)
    b = channel.d2d_rate([0, 1], g, 1, 0, 1.0, 1e-12, zones)
    assert a == b and a > 0


def test_csm_from_fixed_scenario():
    sc = load_fixed(bundled("example1.yaml"))
    csm = channel.build_csm(sc.instance)
    assert csm[0, 4] == 5.0 and csm[2, 1] == 1.5 and csm[4, 0] == 0.0


def test_csm_outside_zones_is_zero():
    cfg = ScenarioConfig(num_users=5, coverage_radius_m=1e-3)
    inst, _ = generate_scenario(cfg, 0)
    assert not channel.build_csm(inst).any()


def test_csm_interference_lowers_rates():
    inst, _ = generate_scenario(ScenarioConfig(coverage_radius_m=400.0), 1)
    free = channel.build_csm(inst)
    loaded = channel.build_csm(inst, active_transmitters=range(inst.num_users))
    assert np.all(loaded <= free + 1e-9)


def test_fading_draw_is_seeded():
    inst, _ = generate_scenario(ScenarioConfig(), 2)
    a = channel.draw_gains(inst, np.random.default_rng(5))
    b = channel.draw_gains(inst, np.random.default_rng(5))
    assert np.array_equal(a.errh_gains, b.errh_gains)
    assert not np.array_equal(a.errh_gains, inst.errh_pathgain)
