import csv
import json

import numpy as np
import pytest

from cfmmwave import harness
from cfmmwave.config import SimConfig, preset, to_dict
from cfmmwave.link import RateRecord


def desk(**overrides):
    return preset("desk", **overrides)


class TestRunTrial:
    def test_deterministic_records(self):
        cfg = desk(trials=1)
        a = harness.run_trial(cfg, 0, power_grid_dbw=[0.0])
        b = harness.run_trial(cfg, 0, power_grid_dbw=[0.0])
        assert len(a.records) == len(b.records) == 16
        for ra, rb in zip(a.records, b.records):
            assert (ra.scheme, ra.csi, ra.bf, ra.direction) == (rb.scheme, rb.csi, rb.bf, rb.direction)
            assert np.array_equal(ra.rates_mbps, rb.rates_mbps)

    def test_rates_finite_nonnegative(self):
        tr = harness.run_trial(desk(), 1, power_grid_dbw=[-10.0, 10.0])
        assert tr.failures == []
        for rec in tr.records:
            assert np.all(np.isfinite(rec.rates_mbps))
            assert np.all(rec.rates_mbps >= 0)

    def test_full_association_collapses_uc_to_cf(self):
        cfg = desk(N_uc=4)  # N_uc = K
        tr = harness.run_trial(cfg, 0, power_grid_dbw=[0.0])
        by_key = {(r.scheme, r.csi, r.bf, r.direction): r.rates_mbps for r in tr.records}
        for csi in harness.CSI_MODES:
            for bf in harness.BF_MODES:
                for d in harness.DIRECTIONS:
                    cf_rates = by_key[("CF", csi, bf, d)]
                    uc_rates = by_key[("UC", csi, bf, d)]
                    assert np.max(np.abs(cf_rates - uc_rates)) < 1e-9

    def test_mode_filters(self):
        tr = harness.run_trial(desk(), 0, power_grid_dbw=[0.0],
                               csi_modes=("ICSI",), bf_modes=("HY",), directions=("DL",))
        assert len(tr.records) == 2
        assert {r.csi for r in tr.records} == {"ICSI"}


class TestAggregate:
    def synth_records(self, rates_by_trial):
        results = []
        for t, rates in enumerate(rates_by_trial):
            rec = RateRecord(scheme="CF", csi="ICSI", bf="HY", direction="DL",
                             power_dbw=0.0, rates_mbps=np.asarray(rates, float), trial=t)
            results.append(harness.TrialResult(trial=t, records=[rec]))
        return results

    def test_mean_of_constant_is_constant(self):
        res = harness.aggregate(SimConfig(), self.synth_records([[7.0, 7.0]] * 5))
        assert res.rows[0]["mean_rate_mbps"] == 7.0
        assert res.rows[0]["std_rate_mbps"] == 0.0
        assert res.rows[0]["trials"] == 5

    def test_mean_and_std_match_numpy(self):
        gen = np.random.default_rng(0)
        data = gen.uniform(0, 100, (8, 3))
        res = harness.aggregate(SimConfig(), self.synth_records(data))
        assert res.rows[0]["mean_rate_mbps"] == pytest.approx(data.mean())
        assert res.rows[0]["std_rate_mbps"] == pytest.approx(data.std(ddof=1))

    def test_standard_error_halves_with_quadrupled_trials(self):
        # Bootstrap-style check on the aggregation outputs: the standard
        # error std/sqrt(n) of i.i.d. rates drops by half when the trial
        # count quadruples.
        gen = np.random.default_rng(1)
        small = self.synth_records(gen.normal(100, 20, (100, 1)))
        big = self.synth_records(gen.normal(100, 20, (400, 1)))
        r_small = harness.aggregate(SimConfig(), small).rows[0]
        r_big = harness.aggregate(SimConfig(), big).rows[0]
        sem_small = r_small["std_rate_mbps"] / np.sqrt(r_small["trials"])
        sem_big = r_big["std_rate_mbps"] / np.sqrt(r_big["trials"])
        assert sem_big / sem_small == pytest.approx(0.5, rel=0.25)

    def test_row_ordering_lexicographic(self):
        cfg = desk(trials=1)
        res = harness.sweep(cfg, power_grid_dbw=[0.0, 10.0])
        keys = [(r["scheme"], r["csi"], r["bf"], r["direction"], r["power_dbw"])
                for r in res.rows]
        assert keys == sorted(keys)


class TestSweep:
    def test_row_cardinality(self):
        cfg = desk(trials=2)
        res = harness.sweep(cfg, power_grid_dbw=[-10.0, 0.0])
        # 2 schemes x 2 csi x 2 bf x 2 directions x 2 powers
        assert len(res.rows) == 32
        assert all(r["trials"] == 2 for r in res.rows)

    def test_parallel_equals_serial(self):
        cfg = desk(trials=2)
        serial = harness.sweep(cfg, jobs=1, power_grid_dbw=[0.0])
        parallel = harness.sweep(cfg, jobs=2, power_grid_dbw=[0.0])
        assert serial.rows == parallel.rows


class TestEmit:
    def test_empty_results_header_only(self, tmp_path):
        res = harness.SweepResult(rows=[], config=SimConfig())
        paths = harness.emit(res, tmp_path)
        lines = paths["csv"].read_text().strip().splitlines()
        assert lines == [",".join(harness.CSV_HEADER)]

    def test_csv_row_count_and_header(self, tmp_path):
        cfg = desk(trials=1)
        res = harness.sweep(cfg, power_grid_dbw=[0.0, 5.0, 10.0])
        paths = harness.emit(res, tmp_path)
        with open(paths["csv"]) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == harness.CSV_HEADER
        assert len(rows) - 1 == 3 * 16

    def test_json_round_trip(self, tmp_path):
        cfg = desk(trials=1)
        res = harness.sweep(cfg, power_grid_dbw=[0.0])
        paths = harness.emit(res, tmp_path)
        back = harness.load_results(paths["json"])
        assert back.rows == res.rows
        assert to_dict(back.config) == to_dict(res.config)
        assert back.failures == res.failures


class TestFailureHandling:
    def test_failed_combination_recorded_not_fabricated(self, monkeypatch):
        from cfmmwave import beamform

        def broken_uc_select(effective, n_uc):
            raise RuntimeError("association blew up")

        monkeypatch.setattr(beamform, "uc_select", broken_uc_select)
        tr = harness.run_trial(desk(), 0, power_grid_dbw=[0.0])
        assert len(tr.failures) == 2  # one per CSI mode
        assert all(f["scheme"] == "UC" for f in tr.failures)
        # CF combinations are unaffected and present.
        assert {r.scheme for r in tr.records} == {"CF"}
        assert len(tr.records) == 8

    def test_sweep_summary_carries_failures(self, monkeypatch):
        from cfmmwave import beamform

        monkeypatch.setattr(beamform, "uc_select",
                            lambda eff, n: (_ for _ in ()).throw(RuntimeError("boom")))
        res = harness.sweep(desk(trials=2), power_grid_dbw=[0.0])
        assert len(res.failures) == 4
        assert {f["trial"] for f in res.failures} == {0, 1}

    def test_emit_unwritable_path_fails_loudly(self, tmp_path):
        blocker = tmp_path / "results"
        blocker.write_text("not a directory")
        res = harness.SweepResult(rows=[], config=SimConfig())
        with pytest.raises(OSError):
            harness.emit(res, blocker)

    def test_cli_nonzero_on_failures(self, monkeypatch, tmp_path):
        from cfmmwave import cli

        def fake_sweep(cfg, jobs=1, trial_callback=None, **kwargs):
            return harness.SweepResult(rows=[], config=cfg,
                                       failures=[{"csi": "ICSI", "scheme": "UC",
                                                  "bf": "*", "error": "boom", "trial": 0}])

        monkeypatch.setattr(cli.harness, "sweep", fake_sweep)
        code = cli.main(["--preset", "desk", "--out", str(tmp_path / "o")])
        assert code == 1


class TestCli:
    def test_end_to_end(self, tmp_path):
        from cfmmwave import cli
        config = {"area_side_m": 60.0, "M": 6, "K": 2, "trials": 2,
                  "dl_power_grid_dbw": [0.0], "master_seed": 3}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(config))
        out = tmp_path / "out"
        code = cli.main(["--config", str(cfg_path), "--out", str(out),
                         "--dump-scenarios", "--dump-channels"])
        assert code == 0
        assert (out / "results.csv").exists()
        assert (out / "results.json").exists()
        assert (out / "scenarios" / "trial_0001.json").exists()
        assert (out / "channels" / "trial_0001.bin").exists()

    def test_preset_with_overrides(self, tmp_path):
        from cfmmwave import cli
        args = cli.build_parser().parse_args(
            ["--preset", "desk", "--seed", "9", "--trials", "2", "--out", str(tmp_path)])
        cfg = cli.load_config(args)
        assert cfg.M == 20 and cfg.master_seed == 9 and cfg.trials == 2

    def test_bad_config_exit_code(self, tmp_path):
        from cfmmwave import cli
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"K": 0}))
        code = cli.main(["--config", str(cfg_path), "--out", str(tmp_path / "o")])
        assert code == 2

    def test_unknown_key_rejected(self, tmp_path):
        from cfmmwave import cli
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"n_aps": 4}))
        code = cli.main(["--config", str(cfg_path), "--out", str(tmp_path / "o")])
        assert code == 2
