"""Command-line behavior: pipelines, option validation, exit codes."""

import json

import numpy as np
import pytest

from metaemb.cli import main
from metaemb.core import EmbeddingView
from metaemb.evaluation import StsDataset, StsSubset, predict_similarities
from metaemb.fileio import read_embeddings, write_embeddings, write_sts


@pytest.fixture
def workdir(tmp_path):
    """Two correlated views plus a matching pair file."""
    rng = np.random.default_rng(110)
    z = rng.normal(size=(40, 3))
    a = z @ rng.normal(size=(3, 5)) + 0.1 * rng.normal(size=(40, 5))
    b = z @ rng.normal(size=(3, 4)) + 0.1 * rng.normal(size=(40, 4))
    write_embeddings(EmbeddingView("enc-a", a), tmp_path / "a.emb")
    write_embeddings(EmbeddingView("enc-b", b), tmp_path / "b.emb")
    lines = ["# pairs"]
    gold = rng.uniform(0, 5, size=20)
    for i in range(20):
        lines.append(f"dev\t{2 * i}\t{2 * i + 1}\t{float(gold[i])!r}")
    (tmp_path / "pairs.tsv").write_text("\n".join(lines) + "\n")
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


class TestFitTransformEval:
    def test_gcca_pipeline_produces_valid_report(self, workdir, capsys):
        model = workdir / "g.mdl"
        meta = workdir / "meta.emb"
        report = workdir / "report.json"
        assert run("fit", "--method", "gcca", "--views", workdir / "a.emb",
                   "--views", workdir / "b.emb", "--d", "3", "--tau", "1",
                   "--out", model) == 0
        assert run("transform", "--model", model, "--views", workdir / "a.emb",
                   "--views", workdir / "b.emb", "--out", meta) == 0
        assert run("eval", "--embedding", meta, "--sts", workdir / "pairs.tsv",
                   "--report", report) == 0
        data = json.loads(report.read_text())
        for block in (data["aggregate_mean"], data["aggregate_pooled"]):
            assert -1.0 <= block["pearson"] <= 1.0
            assert -1.0 <= block["spearman"] <= 1.0
        out = capsys.readouterr().out
        assert "eigenvalues" in out
        assert "pooled(all)" in out

    def test_fit_each_method(self, workdir, capsys):
        for method, extra in [
            ("conc", []),
            ("avg", []),
            ("svd", ["--d", "4"]),
            ("gcca", ["--d", "4", "--tau", "1"]),
            ("ae", ["--d", "4", "--epochs", "2", "--batch-size", "16",
                    "--loss", "mse", "--hidden", "0"]),
        ]:
            out = workdir / f"{method}.mdl"
            assert run("fit", "--method", method, "--views", workdir / "a.emb",
                       "--views", workdir / "b.emb", "--out", out, *extra) == 0
            assert out.exists()
        capsys.readouterr()

    def test_stateless_transform_without_model(self, workdir, capsys):
        meta = workdir / "conc.emb"
        assert run("transform", "--method", "conc", "--views", workdir / "a.emb",
                   "--views", workdir / "b.emb", "--out", meta) == 0
        v = read_embeddings(meta)
        assert v.encoder_id == "meta:conc"
        assert v.dim == 9
        capsys.readouterr()

    def test_transform_needs_model_xor_method(self, workdir, capsys):
        assert run("transform", "--views", workdir / "a.emb",
                   "--out", workdir / "x.emb") == 1
        assert "error:" in capsys.readouterr().err

    def test_eval_of_perfect_predictions_scores_one(self, workdir, capsys):
        rng = np.random.default_rng(111)
        emb = EmbeddingView("e", rng.normal(size=(12, 4)))
        ds = StsDataset({"s": StsSubset(np.arange(0, 12, 2), np.arange(1, 12, 2),
                                        np.ones(6))})
        yhat = predict_similarities(emb, ds)
        write_embeddings(emb, workdir / "p.emb")
        write_sts(StsDataset({"s": StsSubset(np.arange(0, 12, 2),
                                             np.arange(1, 12, 2), yhat)}),
                  workdir / "gold.tsv")
        report = workdir / "perfect.json"
        assert run("eval", "--embedding", workdir / "p.emb", "--sts",
                   workdir / "gold.tsv", "--report", report) == 0
        data = json.loads(report.read_text())
        assert abs(data["aggregate_pooled"]["pearson"] - 1.0) < 1e-12
        assert abs(data["aggregate_pooled"]["spearman"] - 1.0) < 1e-12
        capsys.readouterr()


class TestOptionValidation:
    def test_method_specific_flags_rejected(self, workdir, capsys):
        cases = [
            (["fit", "--method", "conc", "--d", "4"], "--d"),
            (["fit", "--method", "avg", "--seed", "1"], "--seed"),
            (["fit", "--method", "svd", "--d", "3", "--tau", "1"], "--tau"),
            (["fit", "--method", "gcca", "--d", "3", "--epochs", "5"], "--epochs"),
        ]
        for argv, flag in cases:
            code = run(*argv, "--views", workdir / "a.emb",
                       "--out", workdir / "m.bin")
            err = capsys.readouterr().err
            assert code == 1
            assert flag in err

    def test_ae_accepts_its_whole_option_set(self, workdir, capsys):
        assert run("fit", "--method", "ae", "--views", workdir / "a.emb",
                   "--d", "3", "--loss", "mae", "--hidden", "1", "--epochs", "2",
                   "--batch-size", "8", "--lr", "0.01", "--seed", "5",
                   "--out", workdir / "ae.mdl") == 0
        capsys.readouterr()


class TestErrorExits:
    def test_missing_view_file(self, workdir, capsys):
        assert run("fit", "--method", "conc", "--views", workdir / "nope.emb",
                   "--out", workdir / "m.bin") == 1
        assert "error:" in capsys.readouterr().err

    def test_gcca_single_view_rejected(self, workdir, capsys):
        assert run("fit", "--method", "gcca", "--views", workdir / "a.emb",
                   "--out", workdir / "m.bin") == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert err.strip().count("\n") == 0  # one-line diagnostic

    def test_dim_mismatch_on_transform(self, workdir, capsys):
        model = workdir / "svd.mdl"
        assert run("fit", "--method", "svd", "--views", workdir / "a.emb",
                   "--views", workdir / "b.emb", "--d", "3", "--out", model) == 0
        assert run("transform", "--model", model, "--views", workdir / "b.emb",
                   "--views", workdir / "a.emb", "--out", workdir / "x.emb") == 1
        assert "error:" in capsys.readouterr().err


class TestAblate:
    def test_gcca_leave_one_out_cells_fail_loudly(self, workdir, capsys):
        assert run("ablate", "--method", "gcca", "--views", workdir / "a.emb",
                   "--views", workdir / "b.emb", "--sts", workdir / "pairs.tsv",
                   "--d", "3") == 0
        out = capsys.readouterr().out
        assert "full ensemble" in out
        assert "without enc-a" in out and "without enc-b" in out
        # J=1 refits are rejected per cell, other cells still fill in
        assert out.count("InvalidInput") == 2

    def test_default_runs_all_methods(self, workdir, capsys):
        assert run("ablate", "--views", workdir / "a.emb", "--views",
                   workdir / "b.emb", "--sts", workdir / "pairs.tsv",
                   "--d", "3", "--epochs", "2", "--batch-size", "16") == 0
        out = capsys.readouterr().out
        for method in ("conc", "avg", "svd", "gcca", "ae"):
            assert method in out


class TestUpproject:
    def test_writes_one_file_per_seed(self, workdir, capsys):
        prefix = workdir / "up"
        assert run("upproject", "--embedding", workdir / "a.emb", "--d", "16",
                   "--seeds", "0", "--seeds", "3", "--out-prefix", prefix) == 0
        for seed in (0, 3):
            v = read_embeddings(f"{prefix}.seed{seed}.emb")
            assert v.dim == 16
            assert v.encoder_id == f"enc-a-up16-seed{seed}"
        capsys.readouterr()

    def test_same_seed_byte_identical(self, workdir, capsys):
        p1 = workdir / "u1"
        p2 = workdir / "u2"
        run("upproject", "--embedding", workdir / "a.emb", "--d", "8",
            "--seeds", "4", "--out-prefix", p1)
        run("upproject", "--embedding", workdir / "a.emb", "--d", "8",
            "--seeds", "4", "--out-prefix", p2)
        b1 = (workdir / "u1.seed4.emb").read_bytes()
        b2 = (workdir / "u2.seed4.emb").read_bytes()
        assert b1 == b2
        capsys.readouterr()
