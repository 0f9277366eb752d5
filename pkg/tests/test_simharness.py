import numpy as np
import pytest

from lstreg.core import Dataset
from lstreg.errors import ConfigurationError
from lstreg.lst import LstConfig
from lstreg.lts import LtsConfig
from lstreg.simharness import (MethodConfigs, SimulationScenario, StudyAborted,
                               contaminate, contamination_count, emse,
                               generate_sample, metrics_table, outlier_point,
                               repeat_fits, replicate_dataset, run_study, svar)

FAST = MethodConfigs(lts=LtsConfig(starts=20, csteps=4))


class TestGenerate:
    def test_rho_zero_is_independent(self):
        s0 = SimulationScenario(n=50, p=4, rho=0.0, seed=3)
        d = generate_sample(s0, 0)
        rng = np.random.default_rng(np.random.SeedSequence(3, spawn_key=(0, 0)))
        z = rng.standard_normal((50, 4))
        np.testing.assert_allclose(d.X, z[:, :3], atol=1e-15)
        np.testing.assert_allclose(d.y, z[:, 3], atol=1e-15)

    def test_equicorrelated_covariance(self):
        s = SimulationScenario(n=100_000, p=5, rho=0.9, seed=1)
        d = generate_sample(s, 0)
        cov = np.cov(np.column_stack([d.X, d.y]), rowvar=False)
        target = np.full((5, 5), 0.9) + 0.1 * np.eye(5)
        assert np.abs(cov - target).max() < 0.02

    def test_fixed_beta0(self):
        beta0 = (2.0, 1.0, -1.0)
        s = SimulationScenario(n=20_000, p=3, design="iid", beta0=beta0, seed=4)
        d = generate_sample(s, 0)
        e = d.y - d.design @ np.array(beta0)
        assert abs(e.mean()) < 0.03 and abs(e.std() - 1) < 0.03
        assert abs(np.corrcoef(d.X, rowvar=False)[0, 1]) < 0.03

    def test_deterministic_and_fresh_per_replication(self):
        s = SimulationScenario(n=30, p=3, rate=0.1, seed=9)
        assert replicate_dataset(s, 4) == replicate_dataset(s, 4)
        digests = {replicate_dataset(s, r).digest() for r in range(50)}
        assert len(digests) == 50

    def test_not_positive_definite(self):
        with pytest.raises(ConfigurationError):
            SimulationScenario(n=10, p=4, rho=-0.6)

    @pytest.mark.parametrize("kw", [dict(rate=0.5), dict(p=1), dict(beta0=(1, 2)),
                                    dict(point=(1.0,)), dict(design="t3"),
                                    dict(replications=0)])
    def test_invalid_scenarios(self, kw):
        with pytest.raises(ConfigurationError):
            SimulationScenario(**{"n": 10, "p": 3, **kw})


class TestContaminate:
    def test_zero_rate_identity(self, rng):
        d = generate_sample(SimulationScenario(n=20, p=3), 0)
        assert contaminate(d, 0.0, [1, 2, 3], rng) is d

    def test_count(self, rng):
        assert contamination_count(50, 0.05) == 3
        assert contamination_count(100, 0.1) == 10
        assert contamination_count(30, 0.1) == 3
        d = generate_sample(SimulationScenario(n=50, p=5), 0)
        point = outlier_point(5, 7)
        c = contaminate(d, 0.05, point, rng)
        hit = np.all(np.column_stack([c.X, c.y]) == point, axis=1)
        assert hit.sum() == 3
        untouched = ~hit
        np.testing.assert_array_equal(c.y[untouched], d.y[untouched])

    def test_rate_one_rejected(self, rng):
        d = generate_sample(SimulationScenario(n=20, p=3), 0)
        with pytest.raises(ConfigurationError):
            contaminate(d, 1.0, [1, 2, 3], rng)


class TestMetrics:
    def test_ls_only_self_ratio(self):
        res = run_study(SimulationScenario(n=30, p=3, replications=10), ["LS"])
        assert res.table.row("LS").re == 1.0

    def test_constant_estimator_zero_svar(self):
        est = np.tile([1.0, 2.0, 3.0], (7, 1))
        assert svar(est) == 0.0
        assert emse(est, np.zeros(3)) == pytest.approx(14.0)

    def test_zero_over_zero_is_one(self):
        est = {"LS": np.zeros((5, 2)), "LST": np.zeros((5, 2))}
        t = metrics_table(est, None, "emse", {})
        assert t.row("LST").re == 1.0

    def test_single_replication_has_no_svar(self):
        res = run_study(SimulationScenario(n=30, p=3, replications=1), ["LS", "LST"])
        assert np.isnan(res.table.row("LST").svar)
        assert "NA" in res.table.to_text()

    def test_bias_variance_identity(self):
        s = SimulationScenario(n=40, p=3, rate=0.1, replications=25, seed=5)
        res = run_study(s, ["LS", "LST", "LTS"], FAST)
        for row in res.table:
            est = res.estimates[row.method]
            R = est.shape[0]
            bias = est.mean(axis=0) - s.reference
            assert row.emse == pytest.approx(row.svar * (R - 1) / R + bias @ bias, rel=1e-9)

    def test_re_modes(self):
        s = SimulationScenario(n=40, p=3, replications=10, seed=1)
        res = run_study(s, ["LS", "LST"])
        ls, lst = res.table.row("LS"), res.table.row("LST")
        assert lst.re == pytest.approx(ls.svar / lst.svar)
        s2 = SimulationScenario(n=40, p=3, beta0=(1, 1, 1), replications=10, seed=1)
        res2 = run_study(s2, ["LS", "LST"])
        ls, lst = res2.table.row("LS"), res2.table.row("LST")
        assert lst.re == pytest.approx(ls.emse / lst.emse)


def test_study_is_reproducible():
    s = SimulationScenario(n=40, p=3, rate=0.05, replications=8, seed=11)
    a = run_study(s, ["LS", "LST", "LTS"], FAST)
    b = run_study(s, ["LS", "LST", "LTS"], FAST)
    for m in ("LS", "LST", "LTS"):
        np.testing.assert_array_equal(a.estimates[m], b.estimates[m])
    assert a.table.to_csv(include_time=False) == b.table.to_csv(include_time=False)


def test_parallel_matches_serial():
    s = SimulationScenario(n=40, p=3, replications=6, seed=2)
    a = run_study(s, ["LS", "LST"], workers=1)
    b = run_study(s, ["LS", "LST"], workers=2)
    for m in ("LS", "LST"):
        np.testing.assert_array_equal(a.estimates[m], b.estimates[m])


def test_too_many_failures_abort(monkeypatch):
    import lstreg.simharness as sh
    from lstreg.errors import AllCandidatesSkippedError

    def broken(d, cfg, rng):
        raise AllCandidatesSkippedError("forced")
    monkeypatch.setattr(sh, "lst_fit", broken)
    with pytest.raises(StudyAborted):
        run_study(SimulationScenario(n=20, p=2, replications=5), ["LS", "LST"])


def test_isolated_failure_is_recorded(monkeypatch):
    import lstreg.simharness as sh
    from lstreg.errors import AllCandidatesSkippedError
    real = sh.lst_fit
    calls = {"k": 0}

    def flaky(d, cfg, rng):
        calls["k"] += 1
        if calls["k"] == 3:
            raise AllCandidatesSkippedError("forced")
        return real(d, cfg, rng)
    monkeypatch.setattr(sh, "lst_fit", flaky)
    res = run_study(SimulationScenario(n=20, p=2, replications=150), ["LS", "LST"])
    assert res.table.row("LST").failures == 1
    assert res.estimates["LST"].shape[0] == 149
    assert res.errors[0][:2] == (2, "LST")


def test_repeat_fits_deterministic_methods():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((80, 2))
    d = Dataset(x, 1 + x @ [1, -1] + rng.standard_normal(80))
    res = repeat_fits(d, ["LS", "LST"], replications=5, seed=1)
    assert res.table.row("LS").emse == 0.0
    assert res.table.row("LS").re == 1.0


def test_unknown_method():
    with pytest.raises(ConfigurationError):
        run_study(SimulationScenario(n=20, p=2, replications=2), ["LS", "MM"])
