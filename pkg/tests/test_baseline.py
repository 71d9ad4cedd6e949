import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swiptsec import SafConfig, harvested_power, relay_tx_power, saf_gain, saf_search, secrecy_rate
from swiptsec.baseline import saf_beamformer, saf_rates

from conftest import params, random_channels, single_relay


def test_config_grid():
    g = SafConfig(grid_step=0.01).grid()
    assert len(g) == 99
    assert g[0] == pytest.approx(0.01) and g[-1] == pytest.approx(0.99)
    assert len(SafConfig(grid_step=0.1).grid()) == 9


@pytest.mark.parametrize("kwargs", [dict(grid_step=0.0), dict(grid_step=0.5), dict(search_mode="random"),
                                    dict(max_cycles=0)])
def test_config_rejects(kwargs):
    with pytest.raises(ValueError):
        SafConfig(**kwargs)


class TestGain:
    def test_zero_split(self):
        assert saf_gain(params(), single_relay(), 0, 0.0) == 0.0

    def test_direct_value(self):
        assert saf_gain(params(), single_relay(), 0, 0.5) == pytest.approx(np.sqrt(0.5), rel=1e-14)

    def test_rejects_bad_ratio(self):
        with pytest.raises(ValueError):
            saf_gain(params(), single_relay(), 0, 1.5)

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), rho=st.floats(0.0, 1.0, allow_subnormal=False))
    def test_power_balance(self, seed, rho):
        rng = np.random.default_rng(seed)
        p, ch = params(ps=rng.uniform(0.1, 5), pd=rng.uniform(0.1, 5), s2=rng.uniform(1e-3, 1)), random_channels(rng, 1)
        theta = saf_gain(p, ch, 0, rho)
        eh = harvested_power(p, ch, 0, rho)
        tx = relay_tx_power(p, ch, 0, theta, rho)
        assert tx == pytest.approx(eh, rel=1e-12, abs=0.0)


def test_rates_match_model(rng):
    p, ch = params(ps=2.0, pd=0.5, s2=0.05, n=3), random_channels(rng, 3)
    rho = np.array([0.2, 0.5, 0.9])
    theta = saf_beamformer(p, ch, rho)
    assert saf_rates(p, ch, rho) == pytest.approx(secrecy_rate(p, ch, theta, rho), rel=1e-12)


def test_rates_independent_of_batch_shape(rng):
    p, ch = params(s2=0.05, n=2), random_channels(rng, 2)
    pts = rng.uniform(0, 0.99, (7, 2))
    batch = saf_rates(p, ch, pts)
    assert all(batch[k] == saf_rates(p, ch, pts[k]) for k in range(7))


class TestSearch:
    def test_single_relay_matches_grid(self, rng):
        p, ch = params(ps=10.0, pd=10.0, s2=1e-4), random_channels(rng, 1, scale=0.3)
        cfg = SafConfig()
        rho, rate = saf_search(p, ch, cfg)
        vals = [secrecy_rate(p, ch, saf_beamformer(p, ch, [r]), [r]) for r in cfg.grid()]
        assert rate == pytest.approx(max(vals), rel=1e-12)
        assert rho[0] == pytest.approx(cfg.grid()[int(np.argmax(vals))])

    @pytest.mark.parametrize("mode", ["full-grid", "cyclic-coordinate"])
    def test_no_source_power_ties_to_smallest(self, rng, mode):
        p, ch = params(ps=0.0, s2=0.1, n=2), random_channels(rng, 2)
        cfg = SafConfig(search_mode=mode)
        rho, rate = saf_search(p, ch, cfg)
        assert rate == 0.0
        assert np.array_equal(rho, np.full(2, cfg.grid()[0]))

    def test_cyclic_never_beats_full_grid(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            p, ch = params(ps=5.0, pd=5.0, s2=1e-3, n=2), random_channels(rng, 2, scale=0.5)
            _, full = saf_search(p, ch, SafConfig(0.1, "full-grid"))
            _, cyc = saf_search(p, ch, SafConfig(0.1, "cyclic-coordinate"))
            assert cyc <= full

    def test_full_grid_is_exhaustive(self, rng):
        p, ch = params(ps=5.0, pd=5.0, s2=1e-3, n=2), random_channels(rng, 2, scale=0.5)
        cfg = SafConfig(0.1, "full-grid")
        _, rate = saf_search(p, ch, cfg)
        best = max(float(saf_rates(p, ch, np.array(r))) for r in itertools.product(cfg.grid(), repeat=2))
        assert rate == best
