import csv

import numpy as np
import pytest

from afista.benchcli import (CSV_HEADER, BenchConfig, ConfigError,
                             build_problem, emit_plot_data, load_config, main,
                             parse_config, run_benchmark, solver_config)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_empty_config_defaults():
    cfg = parse_config("")
    assert cfg.problem == "simple_net"
    assert cfg.solvers == ("fbs", "ipiano", "mfista", "afista", "zerosr1")
    sc = solver_config(cfg, "afista", 0)
    assert sc.step_alpha == 5e-5
    assert sc.beta_samples == (2.0, 1.0, 0.0)
    assert sc.max_iters == 2000
    assert solver_config(cfg, "ipiano", 0).inertia == 0.95
    p = build_problem(cfg, 0)
    assert p.f.dim == 141
    assert p.g.weight == 1.0
    assert p.f.spec.eps == 0.1
    assert p.f.data.n_samples == 80


def test_comment_only_config_is_empty():
    assert parse_config("# nothing here\n\n").problem == "simple_net"


def test_single_solver_and_overrides():
    cfg = parse_config("problem = lasso\nsolver = afista\nalpha = 0.01\n"
                       "afista.beta_samples = 1, 0\nseeds = 1, 2\n"
                       "lambda = 0.2\n")
    assert cfg.solvers == ("afista",)
    assert cfg.seeds == (1, 2)
    sc = solver_config(cfg, "afista", 2)
    assert sc.step_alpha == 0.01
    assert sc.beta_samples == (1.0, 0.0)
    assert sc.seed == 2
    assert build_problem(cfg, 1).g.weight == 0.2


@pytest.mark.parametrize("text, line", [
    ("problem = simple_net\nalpha = -1\n", 2),
    ("problem = simple_net\nbogus = 3\n", 2),
    ("alpha = 1e-4\n", 1),
    ("problem = simple_net\nalpha = 1\nalpha = 2\n", 3),
    ("problem = simple_net\nmax_iters = many\n", 2),
    ("problem = simple_net\nnewton.alpha = 1\n", 2),
    ("problem = simple_net\nafista.bogus = 1\n", 2),
    ("problem = cnn\n", 1),
    ("problem = simple_net\nsolvers = fbs, newton\n", 2),
    ("problem = simple_net\nrho = 1.5\n", 2),
    ("problem = simple_net\nalpha\n", 2),
    ("problem = simple_net\nalpha =\n", 2),
])
def test_config_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}:")


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.conf")


def lasso_cfg(**kw):
    cfg = parse_config("problem = lasso\nlasso_n = 30\nlasso_m = 40\n"
                       "max_iters = 150\n")
    for k, v in kw.items():
        setattr(cfg, k, v)
    return cfg


def test_run_writes_csv_and_summary(tmp_path):
    cfg = lasso_cfg(solvers=("fbs", "afista"))
    runs = run_benchmark(cfg, tmp_path)
    assert len(runs) == 2
    for run in runs:
        rows = read_csv(tmp_path / f"{run.solver_id}_0.csv")
        assert tuple(rows[0]) == CSV_HEADER
        assert float(rows[1][3]) == 1.0
        assert len(rows) == 1 + len(run.trace) <= 1 + 151
    summary = read_csv(tmp_path / "summary.csv")
    assert [r[0] for r in summary[1:]] == ["fbs", "afista"]
    fbs, afista = runs
    assert afista.objectives[-1] <= fbs.objectives[-1]


def test_plot_data_single_iteration(tmp_path):
    cfg = lasso_cfg(solvers=("fbs",))
    cfg.solver_options["max_iters"] = 1
    run_benchmark(cfg, tmp_path)
    lines = (tmp_path / "fbs_0_iter.dat").read_text().splitlines()
    assert len(lines) == 2
    assert lines[0].split()[0] == "0"
    assert (tmp_path / "fbs_0_time.dat").exists()


def test_plot_data_monotone_columns(tmp_path):
    runs = run_benchmark(lasso_cfg(solvers=("afista", "mfista")), tmp_path)
    for r in runs:
        data = np.loadtxt(tmp_path / f"{r.solver_id}_0_iter.dat")
        F = data[:, 1]
        assert np.all(F[1:] <= F[:-1] + 1e-12 * (1 + np.abs(F[:-1])))


def test_figure_naming(tmp_path):
    cfg = parse_config("problem = simple_net\nsolvers = afista, zerosr1\n"
                       "max_iters = 3\nfigure_names = true\n")
    runs = run_benchmark(cfg, tmp_path)
    assert (tmp_path / "SimpleSparseNet_conv_aFISTA_iter.dat").exists()
    assert (tmp_path / "SimpleSparseNet_conv_zeroSR1_PG_time.dat").exists()
    for r in runs:
        r.info["seed"] = 0
    runs[1].info["seed"] = 1
    written = emit_plot_data(runs, tmp_path, figure_names=True)
    assert any(p.name == "SimpleSparseNet_conv_zeroSR1_PG_seed1_iter.dat"
               for p in written)


def test_emit_plot_data_requires_runs(tmp_path):
    with pytest.raises(ValueError):
        emit_plot_data([], tmp_path)


def masked(path):
    rows = read_csv(path)
    return [r[:1] + r[2:] for r in rows]


def test_cli_run_is_deterministic(tmp_path):
    conf = tmp_path / "bench.conf"
    conf.write_text("problem = simple_net\nsolvers = afista, ipiano\n"
                    "max_iters = 30\n")
    for out in ("a", "b"):
        assert main(["run", "--config", str(conf), "--out",
                     str(tmp_path / out), "--seed", "4"]) == 0
    for name in ("afista_4.csv", "ipiano_4.csv"):
        assert masked(tmp_path / "a" / name) == masked(tmp_path / "b" / name)
    assert read_csv(tmp_path / "a" / "summary.csv") == \
        read_csv(tmp_path / "b" / "summary.csv")


def test_cli_run_bad_config_exit_code(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("problem = simple_net\nalpha = -1\n")
    assert main(["run", "--config", str(conf), "--out",
                 str(tmp_path / "o")]) == 2
    assert "line 2" in capsys.readouterr().err


def test_cli_overrides(tmp_path):
    conf = tmp_path / "c.conf"
    conf.write_text("")
    assert main(["run", "--config", str(conf), "--out", str(tmp_path / "o"),
                 "--solvers", "fbs", "--max-iters", "4"]) == 0
    rows = read_csv(tmp_path / "o" / "fbs_0.csv")
    assert len(rows) == 1 + 5


def test_cli_gradcheck(capsys):
    assert main(["gradcheck", "--seed", "2", "--coords", "10"]) == 0
    assert capsys.readouterr().out.startswith("[PASS]")


def test_cli_oracle_suite(capsys):
    assert main(["oracle", "--suite", "descent"]) == 0
    assert "[PASS] descent lemma" in capsys.readouterr().out


def test_bench_config_defaults_dataclass():
    cfg = BenchConfig()
    assert cfg.options_for("afista")["alpha"] == 5e-5
    cfg = BenchConfig(problem="lasso")
    assert "alpha" not in cfg.options_for("afista")
