import math
import os
import subprocess

import pytest

import tpg

GOLDEN = [10.0, 40.0, 100.0]


def golden(V=3.5):
    return tpg.Params(3, 1.2005, V, 0.05)


def test_primitives():
    assert tpg.floor_contribution(10.0, 0.05) == pytest.approx(0.005)
    assert tpg.gamma_star(10.0, 0.05, 0.96) == pytest.approx(4.560, abs=1e-3)
    d = tpg.max_fill(10.0, 3.5, 0.05)
    assert tpg.gamma_star(10.0, 0.05, d) == pytest.approx(3.5)
    e = tpg.water_fill([10.0, 40.0], [0.005, 0.00125], [1.0, 1.0], 1.2)
    assert e == pytest.approx([0.96, 0.24])


def test_golden_protocols():
    s = tpg.s_outcome(GOLDEN, golden())
    assert not s.success
    assert s.e == [0.0, 0.0, 0.0]
    m = tpg.m_outcome(GOLDEN, golden())
    assert m.success
    assert m.e[0] == pytest.approx(0.84166, abs=1e-5)
    assert m.e[1] == pytest.approx(0.35834, abs=1e-5)
    assert math.fsum(m.e) == pytest.approx(1.2005, abs=1e-9)
    assert tpg.l_outcome(GOLDEN, golden()).success


def test_pool():
    plan = tpg.build_pool(GOLDEN, golden())
    assert plan.kind == tpg.PlanKind.backstop
    assert plan.pool == [0, 1]
    assert plan.residual == pytest.approx(1.2, abs=1e-12)


def test_cutoff_and_play():
    params = tpg.Params(50, 10.5, 5.0, 0.05)
    dist = tpg.CostDistribution.uniform(1.0, 5.0)
    assert tpg.select_cutoff(params, dist, 0.0) is None
    cut = tpg.select_cutoff(params, dist, 0.3)
    assert cut is not None
    assert 0.0 < cut.q_star <= 0.3
    costs = dist.sample(50, seed=5)
    out = tpg.play_c(costs, cut, params)
    assert len(out.e) == 50
    assert out.subsidy_paid == pytest.approx(0.05 * math.fsum(out.e))


def test_sweep():
    cfg = tpg.SweepConfig()
    cfg.v_grid = [1.0, 4.0]
    cfg.p_grid = [0.05, 0.3]
    cfg.n_mc = 50
    cfg.master_seed = 9
    cells = tpg.sweep(cfg)
    assert len(cells) == 4
    assert [c.v for c in cells] == [1.0, 1.0, 4.0, 4.0]
    for c in cells:
        s = c.at(tpg.Protocol.S)
        assert c.at(tpg.Protocol.M).successes >= s.successes
        assert s.se == math.sqrt(s.success_prob * (1 - s.success_prob) / s.n_mc)
    again = tpg.run_cell(1, 1, cfg)
    assert again.at(tpg.Protocol.C).welfare_mean == cells[3].at(tpg.Protocol.C).welfare_mean


def test_config_errors():
    with pytest.raises(tpg.ConfigError, match="X"):
        tpg.Params(3, 2.0, 1.0, 0.1)
    with pytest.raises(ValueError, match="dist"):
        tpg.CostDistribution.parse("gamma:1,2")
    cfg = tpg.SweepConfig()
    cfg.v_grid = [2.0, 1.0]
    cfg.p_grid = [0.1]
    with pytest.raises(tpg.ConfigError, match="grid-v"):
        cfg.validate()


def test_golden_report_and_cli(tmp_path):
    assert "M retentions: 0.84166 0.35834" in tpg.golden_report()
    code, _, err = tpg.run_cli(["--grid-v", "0:5"])
    assert code == 2
    assert "grid-v" in err
    out = tmp_path / "run"
    code, _, _ = tpg.run_cli(["--grid-v", "1:4:2", "--grid-p", "0:0.3:2", "--draws", "20", "--mech", "S,M",
                              "--out", str(out), "--quiet"])
    assert code == 0
    lines = (out / "S.csv").read_text().splitlines()
    assert lines[0].startswith("v,p,mechanism,success_prob,se")
    assert len(lines) == 5


@pytest.mark.skipif(not os.environ.get("TPG_SIM"), reason="tpg_sim path not provided")
def test_executable():
    res = subprocess.run([os.environ["TPG_SIM"], "--preset", "appc-example"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "S null" in res.stdout
