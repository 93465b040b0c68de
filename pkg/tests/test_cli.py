"""Experiment harness: config round-trips, reports, determinism, exit codes."""

import dataclasses
import json
import os
from fractions import Fraction

import pytest

from sapprox.approx import ApproxCollection, FiniteApproxFunction, PowerLaw, psi_one
from sapprox.cli import (
    ConfigError,
    ExperimentConfig,
    Schedule,
    csv_to_rows,
    default_config,
    emit_report,
    main,
    records_to_csv,
    records_to_json,
    records_to_svg,
    result_from_json,
    run,
)
from sapprox.sring import PlaceSet


def small_asymptotic(seed=20260810, samples=3, steps=4):
    cfg = default_config("asymptotic", seed)
    return dataclasses.replace(
        cfg,
        sample_count=samples,
        schedule=dataclasses.replace(cfg.schedule, steps=steps),
    )


class TestSchedule:
    def test_profiles_grow(self):
        sch = Schedule(Fraction(4), Fraction(2), 5, ((2, 1),), ((2, 1),))
        profs = sch.profiles(1)
        assert len(profs) == 5
        for a, b in zip(profs, profs[1:]):
            assert b.dominates(a) and b.product() > a.product()

    def test_finite_every(self):
        sch = Schedule(Fraction(2), Fraction(2), 6, ((2, 0),), ((2, 1),), ((2, 3),))
        exps = [p.exponent(2) for p in sch.profiles(1)]
        assert exps == [0, 0, 0, 1, 1, 1]

    def test_max_product_truncation(self):
        sch = Schedule(Fraction(4), Fraction(2), 8, ((2, 1),), ((2, 1),))
        profs = sch.profiles(1, max_product=Fraction(1000))
        assert profs[-1].product() <= 1000
        assert len(profs) < 8

    def test_validation(self):
        with pytest.raises(ConfigError):
            Schedule(Fraction(1, 2), Fraction(2), 3, (), ())
        with pytest.raises(ConfigError):
            Schedule(Fraction(2), Fraction(1), 3, (), ())
        with pytest.raises(ConfigError):
            Schedule(Fraction(2), Fraction(2), 3, ((2, 0),), ((2, 0),))


class TestConfig:
    def test_json_round_trip(self):
        cfg = default_config("asymptotic")
        again = ExperimentConfig.from_json(json.loads(json.dumps(cfg.to_json())))
        assert again == cfg

    def test_congruence_round_trip(self):
        cfg = dataclasses.replace(
            default_config("asymptotic"),
            modulus=3,
            shift=(Fraction(1), Fraction(2), Fraction(0)),
        )
        assert ExperimentConfig.from_json(cfg.to_json()) == cfg

    def test_asymptotic_requires_divergent_integral(self):
        S = PlaceSet((2,))
        convergent = ApproxCollection.of(
            PowerLaw(Fraction(1), Fraction(2)),
            {2: FiniteApproxFunction(2, 1, 1, (), ("linear", 2, 0))},
            1,
            1,
        )
        cfg = dataclasses.replace(
            default_config("asymptotic"), dims=(1, 1), psi=convergent
        )
        with pytest.raises(ConfigError, match="dichotomy"):
            run(cfg)


class TestRunAndReports:
    def test_volume_mode_contains_exact_16(self):
        cfg = default_config("volume")
        cfg = dataclasses.replace(
            cfg,
            dims=(1, 1),
            psi=psi_one(cfg.places, 1, 1),
            schedule=Schedule(Fraction(2), Fraction(2), 1, ((2, 1),), ((2, 1),)),
            mc_samples=20_000,
        )
        res = run(cfg)
        assert res.summary["exact"] == "16"
        assert res.summary["agrees_within_4se"]

    def test_asymptotic_summary_and_reports(self, tmp_path):
        cfg = dataclasses.replace(small_asymptotic(), out=str(tmp_path))
        res = run(cfg)
        assert len(res.records) == 3 * 4
        assert res.summary["final_median_ratio"] == pytest.approx(1.0, abs=0.25)
        files = emit_report(res, str(tmp_path), ("csv", "json", "svg"))
        assert all(os.path.exists(f) for f in files)

    def test_csv_round_trip(self):
        cfg = small_asymptotic()
        res = run(cfg)
        text = records_to_csv(cfg, res.records)
        rows = csv_to_rows(text)
        assert len(rows) == len(res.records)
        for row, rec in zip(rows, res.records):
            assert int(row["seed"]) == rec.seed
            assert int(row["step"]) == rec.step
            assert row["T_inf"] == rec.t_inf
            assert row["V"] == rec.volume
            assert int(row["N"]) == rec.count
            assert float(row["ratio"]) == rec.ratio

    def test_csv_empty_errors(self):
        cfg = small_asymptotic()
        with pytest.raises(ValueError):
            records_to_csv(cfg, [])

    def test_csv_is_rfc4180_style(self):
        cfg = small_asymptotic()
        res = run(cfg)
        text = records_to_csv(cfg, res.records)
        assert text.startswith("seed,step,T_inf,T_2,V,N,ratio\r\n")
        assert text.endswith("\r\n")

    def test_json_round_trip_and_rerun_identical(self):
        cfg = small_asymptotic()
        res = run(cfg)
        blob = records_to_json(res)
        loaded = result_from_json(blob)
        assert loaded.config == cfg
        rerun = run(loaded.config)
        assert records_to_csv(cfg, rerun.records) == records_to_csv(cfg, res.records)

    def test_svg_structure(self):
        cfg = small_asymptotic(samples=4)
        res = run(cfg)
        svg = records_to_svg(cfg, res.records)
        assert svg.count('<polyline class="sample"') == 4
        assert "stroke-dasharray" in svg  # the reference line at ratio 1

    def test_jobs_parallel_identical(self):
        cfg = small_asymptotic()
        seq = run(cfg, jobs=1)
        par = run(cfg, jobs=2)
        assert records_to_csv(cfg, seq.records) == records_to_csv(cfg, par.records)

    def test_dirichlet_mode(self):
        cfg = dataclasses.replace(default_config("dirichlet"), sample_count=5)
        res = run(cfg)
        assert res.summary["solved_and_verified"] == 5
        assert res.exit_code == 0


class TestMainEntry:
    def test_main_asymptotic_writes_reports(self, tmp_path, capsys):
        code = main(
            [
                "asymptotic",
                "--samples",
                "2",
                "--max-T",
                "600",
                "--out",
                str(tmp_path),
                "--format",
                "all",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "final_median_ratio" in out
        assert (tmp_path / "records.csv").exists()
        assert (tmp_path / "records.json").exists()
        assert (tmp_path / "ratio.svg").exists()

    def test_report_regenerates_identical_csv(self, tmp_path):
        code = main(
            ["asymptotic", "--samples", "2", "--max-T", "600", "--out", str(tmp_path)]
        )
        assert code == 0
        csv_first = (tmp_path / "records.csv").read_bytes()
        (tmp_path / "records.csv").unlink()
        code = main(
            ["report", "--records", str(tmp_path / "records.json"), "--out", str(tmp_path), "--format", "csv"]
        )
        assert code == 0
        assert (tmp_path / "records.csv").read_bytes() == csv_first

    def test_config_file_round_trip(self, tmp_path):
        cfg = small_asymptotic(samples=2, steps=3)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg.to_json()))
        code = main(["asymptotic", "--config", str(path), "--out", str(tmp_path)])
        assert code == 0
        blob = json.loads((tmp_path / "records.json").read_text())
        assert ExperimentConfig.from_json(blob["config"]) == dataclasses.replace(
            cfg, out=str(tmp_path)
        )

    def test_verify_exit_code_zero(self):
        # a tiny seeded verify pass; the full suite runs in acceptance
        from sapprox import checks

        name, fn = checks.ALL_CHECKS[0]
        import random

        ok, _ = fn(random.Random(0))
        assert ok

    def test_verify_exit_code_nonzero_on_failure(self, monkeypatch, capsys):
        from sapprox import checks

        monkeypatch.setattr(
            checks,
            "ALL_CHECKS",
            [("always-fails", lambda rng: (False, "injected failure"))],
        )
        res = run(default_config("verify"))
        assert res.exit_code == 1
        assert "FAIL" in capsys.readouterr().out
