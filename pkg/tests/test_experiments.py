import numpy as np
import pytest

from lpentropy import ExperimentConfig, parse_config, render_csv, run_convergence, run_rate_check

pytestmark = pytest.mark.filterwarnings("ignore::lpentropy.ThresholdOrderWarning")

SMALL = dict(sizes=(120, 480), replicates=4, seed=9)


# --- configuration --------------------------------------------------------


def test_minimal_config_applies_defaults(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("sizes=1000\n")
    config = parse_config(path)
    assert config.sizes == (1000,)
    assert config.bandwidth_c == 1.0
    assert config.gamma_c == 1.0
    assert config.gamma_kappa == 0.8
    assert config.kernel == "epanechnikov"


def test_config_file_parsing_with_comments_and_overrides(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(
        "# benchmark\n"
        "sizes=1000,4000   # two sizes\n"
        "replicates=3\n"
        "gamma_c=0.01\n"
    )
    config = parse_config(path, overrides={"replicates": "5", "seed": 7})
    assert config.sizes == (1000, 4000)
    assert config.replicates == 5
    assert config.seed == 7
    assert config.gamma_c == 0.01


def test_config_rejects_kappa_outside_unit_interval(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("sizes=1000\ngamma_kappa=1.2\n")
    with pytest.raises(ValueError, match=r"\(0, 1\)"):
        parse_config(path)


def test_config_rejects_duplicate_key(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("sizes=1000\nsizes=2000\n")
    with pytest.raises(ValueError, match="duplicate"):
        parse_config(path)


def test_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("sizes=1000\nbandwith_c=1\n")
    with pytest.raises(ValueError, match="unknown config key"):
        parse_config(path)


def test_config_requires_sizes():
    with pytest.raises(ValueError, match="sizes"):
        parse_config(None, {})


def test_config_invariants():
    with pytest.raises(ValueError, match="at least 100"):
        ExperimentConfig(sizes=(50,))
    with pytest.raises(ValueError, match="strictly increasing"):
        ExperimentConfig(sizes=(1000, 1000))
    with pytest.raises(ValueError, match="replicates"):
        ExperimentConfig(sizes=(100,), replicates=0)
    with pytest.raises(ValueError, match="gaussian oracle"):
        ExperimentConfig(sizes=(100,), family="logistic", oracle="gaussian")


# --- determinism ----------------------------------------------------------


def test_report_is_deterministic():
    a = render_csv(run_rate_check(ExperimentConfig(**SMALL)))
    b = render_csv(run_rate_check(ExperimentConfig(**SMALL)))
    assert a == b


def test_report_identical_across_worker_counts():
    a = render_csv(run_rate_check(ExperimentConfig(**SMALL, workers=1)))
    b = render_csv(run_rate_check(ExperimentConfig(**SMALL, workers=3)))
    assert a == b


def test_extending_replicates_keeps_existing_rows():
    base = run_convergence(ExperimentConfig(sizes=(120,), replicates=5, seed=9))
    more = run_convergence(ExperimentConfig(sizes=(120,), replicates=10, seed=9))
    assert more.rows[:5] == base.rows


def test_adding_sizes_keeps_existing_rows():
    base = run_convergence(ExperimentConfig(sizes=(120,), replicates=3, seed=9))
    more = run_convergence(ExperimentConfig(sizes=(120, 600), replicates=3, seed=9))
    assert more.rows[:3] == base.rows


def test_summary_recomputable_from_rows():
    report = run_convergence(ExperimentConfig(**SMALL))
    for summary in report.summaries:
        errors = np.array([r.abs_error for r in report.rows if r.n == summary.n])
        assert summary.median_abs_error == float(np.median(errors))
        assert summary.mse == float(np.mean(errors**2))


# --- harness behavior -----------------------------------------------------


def test_single_cell_smoke():
    report = run_convergence(ExperimentConfig(sizes=(120,), replicates=1, seed=3))
    assert len(report.rows) == 1
    row = report.rows[0]
    assert np.isfinite(row.entropy_estimate)
    assert np.isfinite(row.scaled_level_set_gap)
    assert np.isfinite(row.sup_density_error)


def test_rate_check_needs_spread():
    with pytest.raises(ValueError, match="factor of at least 4"):
        run_rate_check(ExperimentConfig(sizes=(100, 150), replicates=1))


def test_rate_check_produces_verdicts():
    report = run_rate_check(ExperimentConfig(**SMALL))
    assert report.verdicts is not None
    names = {v.name for v in report.verdicts}
    assert names == {
        "level_set_gap_median_rate",
        "level_set_gap_rms_rate",
        "sup_density_error_median_rate",
    }
    assert report.truncation_bias_vanishing is not None


def test_constant_threshold_override_flags_truncation_bias():
    # a threshold frozen at 0.3 keeps a large part of the density out of the
    # level set forever, so the oracle-vs-level-set gap cannot vanish
    config = ExperimentConfig(
        sizes=(1000, 4000), replicates=5, seed=42, gamma_override=0.3
    )
    report = run_rate_check(config)
    assert report.truncation_bias_vanishing is False
    assert all(s.truncation_gap > 1.0 for s in report.summaries)


def test_shrinking_threshold_has_vanishing_truncation_bias():
    config = ExperimentConfig(
        sizes=(1000, 4000), replicates=5, seed=42, gamma_c=0.005
    )
    report = run_rate_check(config)
    assert report.truncation_bias_vanishing is True


def test_long_memory_process_rejected():
    config = ExperimentConfig(
        sizes=(100,), replicates=1, scheme="finite", coefficients=(1.0, -1.0)
    )
    with pytest.raises(ValueError, match="short-memory"):
        run_convergence(config)


def test_convolution_oracle_runs():
    config = ExperimentConfig(
        sizes=(100,), replicates=1, family="logistic", oracle="convolution", seed=5
    )
    report = run_convergence(config)
    assert np.isfinite(report.rows[0].abs_error)
    assert report.rows[0].oracle_entropy > 2.0  # heavier than a single logistic


# --- rendering ------------------------------------------------------------


def test_csv_structure():
    report = run_rate_check(ExperimentConfig(**SMALL))
    text = render_csv(report)
    lines = text.splitlines()
    assert lines[0] == "# convergence-report"
    assert any(l.startswith("# sizes=120,480") for l in lines)
    assert not any(l.startswith("# workers=") for l in lines)
    header_idx = next(i for i, l in enumerate(lines) if l.startswith("n,replicate"))
    data = [l for l in lines[header_idx + 1 :] if not l.startswith("#")]
    # 8 replicate rows, 2 summary rows, 3 verdict rows (headers excluded)
    assert len([l for l in data if "," in l]) == 8 + 1 + 2 + 1 + 3
    assert "# summary" in lines
    assert "# verdicts" in lines
    assert lines[-1].startswith("# truncation_bias_vanishing=")
    assert text.endswith("\n")


def test_float_formatting_is_17_significant_digits():
    report = run_convergence(ExperimentConfig(sizes=(120,), replicates=1, seed=3))
    text = render_csv(report)
    row_line = next(
        l for l in text.splitlines() if l and not l.startswith("#") and not l.startswith("n,")
    )
    value = row_line.split(",")[2]
    assert float(value) == report.rows[0].entropy_estimate
