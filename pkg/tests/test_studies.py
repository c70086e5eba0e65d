import numpy as np
import pytest

from fracidx import ValidationError
from fracidx.studies import StudySpec, run_study


def rows_as_dicts(writer):
    return {key: dict(zip(writer.columns, row)) for key, row in writer.rows.items()}


class TestSpecValidation:
    def test_unknown_study(self):
        with pytest.raises(ValidationError):
            StudySpec(study="nope")

    def test_empty_grid(self):
        with pytest.raises(ValidationError):
            StudySpec(study="robust-kappa", alphas=())


class TestSizePowerClt:
    def test_size_cell_roughly_nominal(self, tmp_path):
        spec = StudySpec(
            study="size-power-clt", B=400, master_seed=5, out=str(tmp_path / "r.csv"),
            alphas=(0.0,), ns=(2000,), ps=(2.0,), ms=(5,),
            mc_n_inner=2000, mc_B=2000,
        )
        rows = rows_as_dicts(run_study(spec))
        size = float(rows["alpha=0.0|p=2|n=2000|panel=size"]["rejection_rate"])
        assert 0.01 < size < 0.12
        power = float(rows["alpha=0.0|p=2|n=2000|panel=power"]["rejection_rate"])
        assert power > size

    def test_null_outside_regime_skipped(self, tmp_path):
        spec = StudySpec(
            study="size-power-clt", B=50, master_seed=5, out=None,
            alphas=(0.2,), ns=(10,), ps=(2.0,), ms=(5,),
            mc_n_inner=500, mc_B=500,
        )
        rows = rows_as_dicts(run_study(spec))
        row = rows["alpha=0.2|p=2|n=10|panel=power"]
        assert row["skipped"] == "null outside CLT regime"
        assert row["rejection_rate"] == ""

    def test_deterministic_given_seed(self):
        kwargs = dict(
            study="size-power-clt", B=100, master_seed=9, out=None,
            alphas=(-0.2,), ns=(1000,), ps=(1.0,), ms=(2,),
            mc_n_inner=1000, mc_B=500,
        )
        a = rows_as_dicts(run_study(StudySpec(**kwargs)))
        b = rows_as_dicts(run_study(StudySpec(**kwargs)))
        assert a == b


class TestResume:
    def test_resume_skips_done_cells_and_reproduces(self, tmp_path):
        out = tmp_path / "report.csv"
        kwargs = dict(
            study="robust-kappa", B=60, master_seed=3, out=str(out),
            alphas=(-0.2,), ns=(400,), ps=(2.0,), ms=(5,), kappas=(2, 4),
            noise_vars=(0.01,),
        )
        run_study(StudySpec(**kwargs))
        full = out.read_text()
        data_lines = [l for l in full.splitlines() if l and not l.startswith("#")]
        # drop the final row and rerun: only the missing cell is recomputed
        out.write_text("\n".join(
            l for l in full.splitlines() if l != data_lines[-1]
        ) + "\n")
        run_study(StudySpec(**kwargs))
        resumed = out.read_text()
        resumed_rows = [l for l in resumed.splitlines() if l and not l.startswith("#")]
        assert sorted(resumed_rows) == sorted(data_lines)

    def test_header_echoes_parameters(self, tmp_path):
        out = tmp_path / "report.csv"
        spec = StudySpec(
            study="robust-kappa", B=20, master_seed=12, out=str(out),
            alphas=(-0.2,), ns=(300,), kappas=(2,), noise_vars=(0.0,),
        )
        run_study(spec)
        text = out.read_text()
        assert "# master_seed: 12" in text
        assert "# study: robust-kappa" in text
        assert "# schema_version: 1" in text


class TestRobustKappa:
    def test_plain_estimator_biased_down_under_noise(self):
        spec = StudySpec(
            study="robust-kappa", B=200, master_seed=21, out=None,
            alphas=(-0.2,), ns=(2500,), ms=(5,), kappas=(10,), noise_vars=(0.05,),
        )
        rows = rows_as_dicts(run_study(spec))
        plain = rows["alpha=-0.2|p=2|n=2500|m=5|sigma_u2=0.05|kappa=0"]
        robust = rows["alpha=-0.2|p=2|n=2500|m=5|sigma_u2=0.05|kappa=10"]
        assert float(plain["bias"]) < -0.2  # dragged toward -1/2
        assert abs(float(robust["bias"])) < 0.05
        assert float(robust["rmse"]) < float(plain["rmse"])


class TestBandwidthVariance:
    def test_rough_case_prefers_wider_bandwidth(self, tmp_path):
        spec = StudySpec(
            study="bandwidth-variance", B=3000, master_seed=31, out=None,
            alphas=(-0.2,), ns=(1000,), ps=(2.0,), ms=(2, 5),
        )
        rows = rows_as_dicts(run_study(spec))
        v2 = float(rows["alpha=-0.2|p=2|n=1000|m=2"]["sigma2_finite"])
        v5 = float(rows["alpha=-0.2|p=2|n=1000|m=5"]["sigma2_finite"])
        assert v5 < v2
