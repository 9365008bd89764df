import os
from pathlib import Path

import pytest

import twotier as tt
from twotier import cli
from twotier.config_io import ConfigError, canonical_text, config_hash

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


class TestConfigIO:
    def test_load_and_validate_shipped_configs(self):
        for name in ("single_type", "two_type", "planning", "tradeoff",
                     "orthogonal", "ue_exclusion"):
            cfg = tt.load_config(CONFIG_DIR / f"{name}.toml")
            assert tt.validate(cfg) == [], name

    def test_powers_converted_to_linear(self):
        cfg = tt.load_config(CONFIG_DIR / "single_type.toml")
        assert cfg.tier1[0].target_power == pytest.approx(1e-7, rel=1e-12)

    def test_missing_key_reports_config_error(self, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text("[network]\n")
        with pytest.raises(ConfigError):
            tt.load_config(bad)

    def test_hash_stable_and_sensitive(self):
        cfg = tt.load_config(CONFIG_DIR / "single_type.toml")
        assert config_hash(cfg) == config_hash(cfg)
        other = cfg.with_(hex_radius=2.0)
        assert config_hash(cfg) != config_hash(other)
        assert "hex_radius" in canonical_text(cfg)


class TestCampaign:
    def base(self):
        return tt.load_config(CONFIG_DIR / "single_type.toml")

    def test_invariants(self):
        cfg = self.base()
        q = (tt.TypicalQuery.tier1(0, 0.1),)
        with pytest.raises(ValueError):
            cli.Campaign(cfg, "lambda:0", (0.5, 0.25), q)     # unsorted
        with pytest.raises(ValueError):
            cli.Campaign(cfg, "lambda:0", (float("nan"),), q)
        with pytest.raises(ValueError):
            cli.Campaign(cfg, "lambda:0", (0.5,), q, engines=("sim",), trials=50)
        with pytest.raises(ValueError):
            cli.Campaign(cfg, "bandwidth", (0.5,), q)

    def test_empty_axis_empty_table(self):
        campaign = cli.Campaign(self.base(), "lambda:0", (),
                                (tt.TypicalQuery.tier1(0, 0.1),))
        assert cli.run(campaign) == []

    def test_cross_engine_rows_agree(self):
        campaign = cli.Campaign(
            self.base(), "lambda:0", (0.25, 0.5),
            (tt.TypicalQuery.tier1(0, 0.1),),
            engines=("analytic", "sim"), trials=600, seed=3)
        rows = cli.run(campaign)
        assert len(rows) == 4 and all(r.error is None for r in rows)
        by = {(r.value, r.engine): r for r in rows}
        for v in (0.25, 0.5):
            ana = by[(v, "analytic")].outage
            sim = by[(v, "sim")]
            assert abs(ana - sim.outage) <= sim.ci95

    def test_row_errors_recorded_and_campaign_continues(self):
        campaign = cli.Campaign(
            self.base(), "exclusion_radius", (0.1, 0.2),
            (tt.TypicalQuery.tier1(0, 0.1),))   # base config has no exclusion mode
        rows = cli.run(campaign)
        assert len(rows) == 2
        assert all(r.error is not None and r.outage is None for r in rows)

    def test_orthogonal_axis(self):
        cfg = tt.load_config(CONFIG_DIR / "single_type.toml")
        campaign = cli.Campaign(cfg, "n", (4.0,),
                                (tt.TypicalQuery.tier1(0, 1.0),),
                                engines=("sim",), trials=150, seed=2)
        rows = cli.run(campaign)
        assert rows[0].error is None and 0.0 <= rows[0].outage <= 1.0


class TestEmitPlots:
    def make_rows(self):
        campaign = cli.Campaign(
            self.base_cfg(), "mu:0", (0.25, 0.5),
            (tt.TypicalQuery.tier1(0, 0.1),),
            engines=("analytic", "sim"), trials=400, seed=11)
        return cli.run(campaign)

    def base_cfg(self):
        return tt.load_config(CONFIG_DIR / "single_type.toml")

    def test_outputs_reference_emitted_columns(self, tmp_path):
        rows = self.make_rows()
        written = cli.emit_plots(rows, tmp_path)
        names = {p.name for p in written}
        assert "sweep_data.csv" in names
        data = (tmp_path / "sweep_data.csv").read_text().splitlines()
        header = data[1].split(",")
        script = (tmp_path / "plot_outage_vs_mu_0.gp").read_text()
        for col in ("value", "outage", "ci95"):
            assert col in header and col in script
        desc = (tmp_path / "plot_outage_vs_mu_0.txt").read_text()
        assert "sim" in desc and "analytic" in desc   # two series per query

    def test_golden_determinism(self, tmp_path):
        a = cli.table_to_csv(self.make_rows(), include_timing=False)
        b = cli.table_to_csv(self.make_rows(), include_timing=False)
        assert a == b                      # byte-identical for fixed seed/config


class TestMainEntry:
    def test_validate_ok(self, capsys):
        code = cli.main(["validate", "--config",
                         str(CONFIG_DIR / "single_type.toml")])
        assert code == 0
        assert "ok" in capsys.readouterr().out

    def test_validate_failure_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text((CONFIG_DIR / "single_type.toml").read_text().replace(
            "pathloss_exponent = 4.0", "pathloss_exponent = 1.5"))
        assert cli.main(["validate", "--config", str(bad)]) == 1

    def test_analyze_prints_outage(self, capsys):
        code = cli.main(["analyze", "--config",
                         str(CONFIG_DIR / "single_type.toml"),
                         "--query", "t1:0", "-T", "0.1"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("query,T,outage")
        assert "t1:0,0.1,0.2" in out

    def test_sweep_writes_outputs_and_exit_code(self, tmp_path):
        code = cli.main([
            "sweep", "--config", str(CONFIG_DIR / "single_type.toml"),
            "--axis", "lambda:0", "--values", "0.5", "--engine", "analytic",
            "--query", "t1:0", "-T", "0.1", "--out", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "results.csv").exists()
        assert (tmp_path / "sweep_data.csv").exists()
        text = (tmp_path / "results.csv").read_text()
        assert text.startswith(cli.CSV_SCHEMA)

    def test_quadrature_env_override(self, monkeypatch):
        monkeypatch.setenv("TWOTIER_QUADRATURE", "hermite_nodes=16,xb_order=4")
        spec = cli.quadrature_from_env()
        assert spec.hermite_nodes == 16 and spec.xb_order == 4
        monkeypatch.setenv("TWOTIER_QUADRATURE", "bogus_field=1")
        with pytest.raises(SystemExit):
            cli.quadrature_from_env()

    def test_compare_reports_agreement(self, capsys):
        code = cli.main(["compare", "--config",
                         str(CONFIG_DIR / "single_type.toml"),
                         "--query", "t1:0", "-T", "0.1",
                         "--trials", "600", "--seed", "3"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("query,T,analytic,simulated,ci95,agree")
        assert ",True" in out

    def test_gap_subcommand(self, capsys):
        code = cli.main(["gap", "--config", str(CONFIG_DIR / "planning.toml"),
                         "-T", "0.05", "--target1", "0.1", "0.1",
                         "--utility", "log:1.5,10", "--utility", "log:1,10",
                         "--alphas", "100000", "--trials", "400", "--seed", "2"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("alpha,eta,utility,relaxed_targets")
        assert "100000" in out

    def test_plan_with_tier2_caps(self, capsys, tmp_path):
        code = cli.main(["plan", "--config", str(CONFIG_DIR / "tradeoff.toml"),
                         "-T", "0.05", "--target1", "0.2", "0.2",
                         "--target2", "0,0=0.2", "--target2", "1,0=0.2",
                         "--utility", "log:1,10", "--utility", "log:1,10",
                         "--out", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "tradeoff.csv").exists()
        assert "tier2[0,0]" in (tmp_path / "tradeoff.csv").read_text()
        assert "intensity plan" in capsys.readouterr().out
