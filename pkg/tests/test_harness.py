import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from flexea.benchmarks import WeightedGraph
from flexea.core import RandomSource
from flexea.harness import cli, experiment
from flexea.harness.config import (
    ConfigError,
    ExperimentConfig,
    build_fitness,
    build_optimizer,
    config_schema,
    default_budget,
    load_config,
)
from flexea.harness.experiment import (
    compare,
    emit_plot_data,
    fit_scaling_exponent,
    run_experiment,
    split_seed,
    summarize,
    sweep,
)

ROOT = Path(__file__).resolve().parents[1]


def cfg(algo="flex-ea", problem="onemax", n=32, runs=20, **top):
    data = {"algorithm": {"name": algo}, "benchmark": {"name": problem, "n": n}, "runs": runs}
    data.update(top)
    return ExperimentConfig.from_dict(data)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestConfig:
    def test_defaults(self):
        c = cfg()
        assert c.algorithm.beta == 1.5 and c.algorithm.r_exponent == 4.0
        assert c.base_seed == 0 and c.trace is False

    @pytest.mark.parametrize("patch", [
        {"runs": 0},
        {"budget": 0},
        {"algorithm": {"name": "nope"}},
        {"algorithm": {"name": "flex-ea", "beta": 2.5}},
        {"benchmark": {"name": "onemax", "n": 0}},
        {"extra": 1},
    ])
    def test_schema_rejects(self, patch):
        data = {"algorithm": {"name": "flex-ea"}, "benchmark": {"name": "onemax", "n": 8}}
        data.update(patch)
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(data)

    def test_overrides(self):
        c = cfg().with_overrides(n=64, algo="fast-ea", seed=9, runs=None)
        assert (c.benchmark.n, c.algorithm.name, c.base_seed, c.runs) == (64, "fast-ea", 9, 20)
        with pytest.raises(ConfigError):
            cfg().with_overrides(colour="red")

    def test_r_exponent_resolves(self):
        c = cfg(n=20).with_overrides(r_exponent=3.0)
        opt = build_optimizer(c, build_fitness(c.benchmark))
        assert opt.count_bounds[0] == pytest.approx(20 * math.log(20**3))

    def test_bad_json(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{nope")
        with pytest.raises(ConfigError):
            load_config(p)

    def test_docs_schema_matches_package(self):
        assert json.loads((ROOT / "docs" / "config.schema.json").read_text()) == config_schema()

    @pytest.mark.parametrize("path", sorted((ROOT / "docs" / "examples").glob("*.json")), ids=str)
    def test_example_configs_validate(self, path):
        load_config(path)

    def test_relative_paths_follow_config_file(self):
        c = load_config(ROOT / "docs" / "examples" / "mst_graybox.json")
        assert Path(c.benchmark.graph_path) == ROOT / "docs" / "examples" / "graphs" / "example.txt"
        assert run_experiment(c.with_overrides(runs=2)).summary.success_rate == 1.0

    def test_default_budgets(self):
        c = cfg(problem="jump", n=20)
        c.benchmark.k = 2
        assert default_budget(build_fitness(c.benchmark), c.benchmark) == 100 * 190
        c = cfg(n=64)
        assert default_budget(build_fitness(c.benchmark), c.benchmark) == math.ceil(1000 * 64 * math.log(64))

    def test_custom_vectors(self, tmp_path):
        lam = tmp_path / "lam.txt"
        T = tmp_path / "T.txt"
        lam.write_text("\n".join(["0.1"] * 8))
        T.write_text("\n".join(["5"] * 8))
        c = ExperimentConfig.from_dict({
            "algorithm": {"name": "flex-ea", "lambda_scheme": "custom", "lambda_path": str(lam),
                          "t_scheme": "custom", "t_path": str(T)},
            "benchmark": {"name": "onemax", "n": 8}, "runs": 3,
        })
        opt = build_optimizer(c, build_fitness(c.benchmark))
        assert list(opt.lower_bounds) == [0.1] * 8
        lam.write_text("\n".join(["0.2"] * 8))
        with pytest.raises(ConfigError):
            build_optimizer(c, build_fitness(c.benchmark))

    def test_mst_graph_file(self, tmp_path):
        g = tmp_path / "g.txt"
        WeightedGraph.random_connected(6, 9, 5, RandomSource(0)).to_file(g)
        c = ExperimentConfig.from_dict({
            "algorithm": {"name": "flex-ea", "lambda_scheme": "mst-graybox", "t_scheme": "mst-graybox"},
            "benchmark": {"name": "mst", "graph_path": str(g)}, "runs": 5,
        })
        res = run_experiment(c)
        assert res.summary.success_rate == 1.0
        missing = c.with_overrides(graph=str(tmp_path / "none.txt"))
        with pytest.raises(ConfigError):
            run_experiment(missing)


class TestSeeds:
    def test_deterministic_and_distinct(self):
        seeds = [split_seed(42, i) for i in range(2000)]
        assert seeds == [split_seed(42, i) for i in range(2000)]
        assert len(set(seeds)) == len(seeds)
        assert split_seed(42, 0) != split_seed(43, 0)

    def test_first_outputs_independent(self):
        first = np.array([RandomSource(split_seed(0, i)).random() for i in range(5000)])
        assert stats.kstest(first, "uniform").pvalue > 1e-3
        r = np.corrcoef(first[:-1], first[1:])[0, 1]
        assert abs(r) < 4 / math.sqrt(first.size)


class TestSummary:
    def test_basic(self):
        s = summarize([5, 1, 3, 100], [True, True, True, False])
        assert s.success_rate == 0.75 and s.successes == 3
        assert s.mean == 3 and s.median == 3 and s.min == 1 and s.max == 5
        assert s.ci_low <= s.mean <= s.ci_high
        assert s.std == pytest.approx(2.0)

    def test_all_failed(self):
        s = summarize([10, 10], [False, False])
        assert s.success_rate == 0 and math.isnan(s.mean)

    def test_empty(self):
        with pytest.raises(Exception):
            summarize([], [])


class TestRunExperiment:
    def test_rerun_identical_csv(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_experiment(cfg(runs=30, output=str(a)))
        run_experiment(cfg(runs=30, output=str(b)))
        strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_time_s"} for r in rows]
        ra, rb = read_csv(a), read_csv(b)
        assert len(ra) == 30 and strip(ra) == strip(rb)
        assert list(ra[0]) == experiment.RECORD_FIELDS
        side = json.loads((tmp_path / "a.csv.summary.json").read_text())
        assert side["summary"]["runs"] == 30

    def test_parallel_matches_serial(self, tmp_path):
        serial = run_experiment(cfg(runs=12, jobs=1))
        parallel = run_experiment(cfg(runs=12, jobs=2))
        assert serial.evaluations == parallel.evaluations

    def test_tiny_budget(self):
        c = cfg(problem="jump", n=30, runs=20, budget=1)
        c.benchmark.k = 10
        res = run_experiment(c.validate())
        assert res.summary.success_rate == 0
        assert all(r.evaluations == 1 for r in res.records)

    def test_onemax_success_at_hundred_n_log_n(self):
        n = 64
        res = run_experiment(cfg(n=n, runs=200, budget=math.ceil(100 * n * math.log(n))))
        assert res.summary.success_rate == 1.0

    def test_records_respect_budget_and_optimum(self):
        res = run_experiment(cfg(problem="leading-ones", n=20, runs=30, budget=300))
        for r in res.records:
            assert r.evaluations <= 300
            if r.success:
                assert r.final_fitness == 20

    def test_partial_output_parseable(self, tmp_path):
        out = tmp_path / "p.csv"

        def crash(record):
            if record.run_index == 2:
                raise RuntimeError("boom")

        with pytest.raises(RuntimeError):
            run_experiment(cfg(runs=10, output=str(out), jobs=1), on_record=crash)
        rows = read_csv(out)
        assert [int(r["run_index"]) for r in rows] == [0, 1, 2]

    def test_traces(self, tmp_path):
        out = tmp_path / "t.csv"
        run_experiment(cfg(n=10, runs=2, output=str(out), trace=True))
        for i in range(2):
            lines = (tmp_path / f"t.run{i}.trace.jsonl").read_text().splitlines()
            assert lines and set(json.loads(lines[0])) == {"t", "rate", "event", "archive", "u", "fitness"}

    def test_trace_needs_output(self):
        with pytest.raises(ConfigError):
            run_experiment(cfg(runs=1, trace=True))

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OSError):
            run_experiment(cfg(runs=1, output=str(blocker / "x.csv")))

    def test_invalid_config_rejected_before_runs(self, tmp_path):
        out = tmp_path / "never.csv"
        c = cfg(problem="jump", n=10, output=str(out))
        c.benchmark.k = 50
        with pytest.raises(ConfigError):
            run_experiment(c)
        assert not out.exists()


class TestSweep:
    def test_onemax_n(self, tmp_path):
        rows = sweep(cfg(runs=60), "n", [64, 128, 256], out=tmp_path / "s.csv")
        assert len(rows) == 3 and len(read_csv(tmp_path / "s.csv")) == 3
        for a, b in zip(rows, rows[1:]):
            # nondecreasing, tolerating overlap of the confidence intervals
            assert b["mean"] >= a["mean"] or b["ci_high"] >= a["ci_low"]

    def test_empty(self):
        with pytest.raises(ConfigError):
            sweep(cfg(), "n", [])

    def test_unknown_parameter(self):
        with pytest.raises(ConfigError):
            sweep(cfg(), "colour", [1])

    def test_jump_k_tracks_binomial_ratio(self):
        n = 16
        base = cfg(problem="jump", n=n, runs=100)
        base.benchmark.k = 2
        rows = sweep(base.validate(), "k", [2, 3])
        ratio = rows[1]["mean"] / rows[0]["mean"]
        want = math.comb(n, 3) / math.comb(n, 2)
        assert want / 2 <= ratio <= want * 2, f"mean ratio {ratio:.2f} vs binomial ratio {want:.2f}"


class TestScalingFit:
    def test_quadratic(self):
        assert fit_scaling_exponent([(n, n**2) for n in (8, 16, 32, 64)]) == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.parametrize("c", [0.01, 1.0, 123.0])
    def test_scale_invariance(self, c):
        assert fit_scaling_exponent([(n, c * n) for n in (3, 7, 20)]) == pytest.approx(1.0, abs=1e-9)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_scaling_exponent([(1, 1), (2, 4)])

    def test_duplicate_sizes(self):
        with pytest.raises(ValueError):
            fit_scaling_exponent([(2, 1), (2, 4), (3, 9)])


class TestCompare:
    def test_self_comparison_identical(self):
        rows = compare([cfg(runs=25), cfg(runs=25)])
        strip = lambda r: {k: v for k, v in r.items()}
        assert strip(rows[0]) == strip(rows[1])

    def test_benchmark_mismatch(self):
        with pytest.raises(ConfigError):
            compare([cfg(n=10), cfg(n=12)])

    def test_paired_seeds(self, tmp_path):
        out = tmp_path / "c.csv"
        compare([cfg(runs=5, output=str(out)), cfg(algo="fast-ea", runs=5)])
        a = read_csv(tmp_path / "c.0-flex-ea.csv")
        b = read_csv(tmp_path / "c.1-fast-ea.csv")
        assert [r["seed"] for r in a] == [r["seed"] for r in b]

    def test_mst_flex_beats_rls12(self, tmp_path):
        G = WeightedGraph.random_connected(21, 40, 100, RandomSource(12))
        g = tmp_path / "g.txt"
        G.to_file(g)
        bench = {"name": "mst", "graph_path": str(g)}
        flex = ExperimentConfig.from_dict({
            "algorithm": {"name": "flex-ea", "lambda_scheme": "mst-graybox", "t_scheme": "mst-graybox"},
            "benchmark": bench, "runs": 100})
        rls = ExperimentConfig.from_dict({"algorithm": {"name": "rls12"}, "benchmark": bench, "runs": 100})
        rows = compare([flex, rls])
        assert rows[0]["success_rate"] == rows[1]["success_rate"] == 1.0
        assert rows[0]["mean"] <= rows[1]["mean"]

    @pytest.mark.slow
    def test_hurdles_flex_beats_sd_rls(self):
        bench = {"name": "hurdles", "n": 64, "s": 40, "g": 3}
        runs, budget = 3, 10**9
        flex = ExperimentConfig.from_dict({"algorithm": {"name": "flex-ea"}, "benchmark": bench,
                                           "runs": runs, "budget": budget})
        sd = ExperimentConfig.from_dict({"algorithm": {"name": "sd-rls-r"}, "benchmark": bench,
                                         "runs": runs, "budget": budget})
        rows = compare([flex, sd])
        assert rows[0]["success_rate"] == rows[1]["success_rate"] == 1.0
        assert rows[0]["mean"] < rows[1]["mean"]


class TestPlotData:
    def test_rows_and_columns(self, tmp_path):
        src = tmp_path / "s.csv"
        rows = sweep(cfg(runs=10), "n", [8, 16, 32], out=src)
        plot = emit_plot_data(src, tmp_path / "plot.csv")
        written = read_csv(tmp_path / "plot.csv")
        assert len(plot) == len(written) == 3
        assert list(written[0]) == experiment.PLOT_FIELDS
        for row, w in zip(rows, written):
            assert float(w["mean"]) == pytest.approx(row["mean"])
            assert float(w["ci_low"]) <= float(w["mean"]) <= float(w["ci_high"])
            assert w["x"] == str(row["value"])

    def test_empty(self, tmp_path):
        src = tmp_path / "e.csv"
        src.write_text(",".join(experiment.SUMMARY_FIELDS) + "\n")
        with pytest.raises(ValueError):
            emit_plot_data(src)


class TestCli:
    def test_run(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        rc = cli.main(["run", "--problem", "onemax", "--n", "16", "--runs", "5", "--out", str(out)])
        assert rc == 0 and len(read_csv(out)) == 5
        assert json.loads(capsys.readouterr().out)["runs"] == 5

    def test_config_file_and_overrides(self, tmp_path):
        c = tmp_path / "c.json"
        c.write_text(json.dumps({"algorithm": {"name": "rls12"}, "benchmark": {"name": "onemax", "n": 8},
                                 "runs": 4}))
        out = tmp_path / "r.csv"
        assert cli.main(["run", "--config", str(c), "--runs", "2", "--out", str(out)]) == 0
        assert len(read_csv(out)) == 2

    def test_sweep_compare_plot(self, tmp_path, capsys):
        s = tmp_path / "s.csv"
        assert cli.main(["sweep", "--problem", "onemax", "--n", "8", "--runs", "4",
                         "--param", "n", "--values", "8,16", "--out", str(s)]) == 0
        assert cli.main(["plot-data", str(s), "--out", str(tmp_path / "p.csv")]) == 0
        assert len(read_csv(tmp_path / "p.csv")) == 2
        assert cli.main(["compare", "--problem", "onemax", "--n", "8", "--runs", "3",
                         "--algos", "flex-ea,opo-ea"]) == 0

    @pytest.mark.parametrize("argv", [
        ["run", "--problem", "onemax"],
        ["run", "--problem", "nope", "--n", "4"],
        ["run", "--n", "4", "--beta", "3"],
        ["sweep", "--n", "4", "--param", "n", "--values", ""],
        ["sweep", "--n", "4", "--param", "zz", "--values", "1"],
    ])
    def test_config_errors_exit_1(self, argv, capsys):
        assert cli.main(argv) == 1
        assert "configuration error" in capsys.readouterr().err

    def test_io_errors_exit_2(self, tmp_path):
        assert cli.main(["run", "--config", str(tmp_path / "missing.json")]) == 2
        blocker = tmp_path / "f"
        blocker.write_text("")
        assert cli.main(["run", "--n", "4", "--runs", "1", "--out", str(blocker / "x.csv")]) == 2
        assert cli.main(["plot-data", str(tmp_path / "missing.csv")]) == 2

    def test_validate_quick(self, capsys):
        assert cli.main(["validate", "--quick"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 4 and all(l.startswith("PASS") for l in lines)
