"""Catalog construction, CLI exit contract, and report serialization."""

import numpy as np
import pytest

from curvlab.catalog import CATALOG_IDS, ManifoldSpec, build_manifold, rng_from_seed
from curvlab.cli import main, make_config, run
from curvlab.errors import NotPositiveDefinite, UnknownId
from curvlab.report import CheckRecord, Report, emit_report, parse_records


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def test_all_catalog_ids_build():
    for mid in CATALOG_IDS:
        spec = ManifoldSpec(mid, resolution=6 if mid.startswith("torus") else None)
        entry = build_manifold(spec)
        assert entry.metric.n >= 1
        rng = rng_from_seed(1)
        pts = entry.random_points(rng, 8)
        H = entry.metric.value(pts)
        assert np.min(np.linalg.eigvalsh(H)) > 0


def test_unknown_id():
    with pytest.raises(UnknownId):
        ManifoldSpec("klein-bottle")


def test_positive_definiteness_screen():
    with pytest.raises(NotPositiveDefinite):
        build_manifold(
            ManifoldSpec("torus-hermitian-perturbed", resolution=6, perturbation_amplitude=40.0)
        )


def test_samplers_respect_domains():
    rng = rng_from_seed(5)
    hopf = build_manifold(ManifoldSpec("hopf-standard"))
    pts = hopf.random_points(rng, 200)
    r = np.linalg.norm(pts, axis=1)
    assert np.all((r >= 1.0 - 1e-12) & (r < 2.0 + 1e-12))
    inoue = build_manifold(ManifoldSpec("inoue-chart"))
    pts = inoue.random_points(rng, 200)
    assert np.all(np.imag(pts[:, 0]) > 0)


def test_counter_based_seeding_deterministic():
    a = rng_from_seed(123).normal(size=6)
    b = rng_from_seed(123).normal(size=6)
    assert np.array_equal(a, b)


def test_one_dimensional_torus():
    from curvlab import tensors
    from curvlab.geometry import integrate

    entry = build_manifold(ManifoldSpec("torus-flat", dim=1))
    assert len(entry.grid.nodes) == 32 * 32  # default 32 per real dimension
    assert integrate(entry.grid, np.ones(len(entry.grid.nodes))) == pytest.approx(2.0)
    pts = entry.random_points(rng_from_seed(2), 20)
    rep = tensors.scalar_identity_residual(entry.metric, pts)
    assert np.max(np.abs(rep.identity_residual)) < 1e-12


def test_wirtinger_on_metric_field():
    from curvlab.geometry import wirtinger

    entry = build_manifold(ManifoldSpec("hopf-standard"))
    pts = entry.random_points(rng_from_seed(3), 4)
    out = wirtinger(entry.metric, pts, order=2)
    # d_ibar h_{k lbar} = -delta_kl z_i / |z|^4 for the standard Hopf metric
    r2 = np.sum(np.abs(pts) ** 2, axis=-1)
    expected = -pts[:, 0] / r2**2
    assert np.allclose(out["anti"][:, 0, 0, 0], expected)
    assert out["second"].shape == (4, 4, 4, 2, 2)


# ---------------------------------------------------------------------------
# report serialization
# ---------------------------------------------------------------------------


def test_records_round_trip_bit_exact():
    rep = Report(command="demo")
    rep.add("alpha", "m", 1.0 / 3.0, 2.2250738585072014e-308, 1e-6, True)
    rep.add("beta", "m", -np.pi * 1e17, None, None, False)
    text = emit_report(rep, "records")
    parsed = [r for r in parse_records(text) if isinstance(r, CheckRecord)]
    assert parsed[0].value == 1.0 / 3.0
    assert parsed[0].residual == 2.2250738585072014e-308
    assert parsed[1].value == -np.pi * 1e17
    assert parsed[1].residual is None
    assert parsed[1].passed is False


def test_empty_report_header_only():
    rep = Report(command="demo")
    text = emit_report(rep, "text")
    assert "demo" in text
    assert "PASS" in text  # overall line still present
    assert emit_report(rep, "records") == ""
    assert rep.overall_pass


def test_failing_record_propagates():
    rep = Report(command="demo")
    rep.add("x", "m", 1.0, 1.0, 0.5, False)
    assert not rep.overall_pass


def test_unknown_format_rejected():
    from curvlab.errors import IoFailure

    with pytest.raises(IoFailure):
        emit_report(Report(command="demo"), "yaml")


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def test_cli_ahat_k3(capsys):
    code = main(["ahat", "--chern", "c1^2=0,c2=24", "--dim", "4", "--spin"])
    out = capsys.readouterr().out
    assert code == 0
    assert "A-hat = 2" in out


def test_cli_ahat_non_integer_spin_fails(capsys):
    code = main(["ahat", "--pontryagin", "p1=-47", "--dim", "4", "--spin"])
    assert code == 1  # spin integrality record fails


def test_cli_lebrun(capsys):
    assert main(["lebrun-table"]) == 0


def test_cli_config_error(capsys):
    code = main(["ahat", "--dim", "4"])  # no numbers supplied
    assert code == 2


def test_cli_quadrature_unsupported(capsys):
    code = main(["theorem-t", "--manifold", "inoue-chart"])
    assert code == 2


def test_cli_classify_flat_torus(capsys):
    code = main(["classify", "--manifold", "torus-flat", "--grid", "6"])
    out = capsys.readouterr().out
    assert code == 0
    assert "KahlerCalabiYau_RicciFlat" in out


def test_cli_gauduchon_pointwise_chart(capsys):
    code = main(["gauduchon", "--manifold", "inoue-chart", "--points", "40"])
    out = capsys.readouterr().out
    assert code == 0
    assert "pointwise" in out


def test_cli_finite_difference_mode(capsys):
    code = main([
        "check-identities", "--manifold", "hopf-standard",
        "--points", "20", "--derivative-mode", "fd",
    ])
    assert code == 0


def test_exit_code_on_non_convergence(monkeypatch):
    from curvlab import cli as climod
    from curvlab.errors import NonConvergence

    def blow_up(cfg, report):
        raise NonConvergence("forced for the exit-code contract")

    monkeypatch.setitem(climod.COMMANDS, "theorem-t", blow_up)
    code, report = run(make_config(["theorem-t", "--manifold", "hopf-standard"]))
    assert code == 3
    assert any("non-convergence" in v for v in report.verdicts)


def test_cli_check_identities_records(tmp_path, capsys):
    out = tmp_path / "r.txt"
    code = main([
        "check-identities", "--manifold", "torus-flat", "--grid", "6",
        "--points", "50", "--format", "records", "--out", str(out),
    ])
    assert code == 0
    recs = [r for r in parse_records(out.read_text()) if isinstance(r, CheckRecord)]
    assert any(r.check == "scalar_identity_rel_residual" for r in recs)
    assert all(r.passed for r in recs)


def test_cli_determinism_byte_identical(tmp_path):
    args = ["adjoints", "--manifold", "torus-flat", "--grid", "6", "--triples", "3",
            "--seed", "42", "--sequential", "--format", "records"]
    out1, out2 = tmp_path / "a.txt", tmp_path / "b.txt"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_cli_config_file(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(
        "# demo config\nmanifold = torus-flat\ngrid = 6\npoints = 30\nseed = 9\n"
    )
    cfg = make_config(["check-identities", "--config", str(cfgfile)])
    assert cfg.manifold == "torus-flat" and cfg.points == 30 and cfg.seed == 9
    # command line wins over the file
    cfg2 = make_config(["check-identities", "--config", str(cfgfile), "--points", "11"])
    assert cfg2.points == 11
    code, report = run(cfg)
    assert code == 0 and report.overall_pass


def test_cli_unknown_config_key(tmp_path):
    cfgfile = tmp_path / "bad.cfg"
    cfgfile.write_text("nonsense = 1\n")
    assert main(["lebrun-table", "--config", str(cfgfile)]) == 2


def test_run_config_tolerance_override(tmp_path):
    cfgfile = tmp_path / "t.cfg"
    cfgfile.write_text("tol_identity_analytic = 1e-12\n")
    cfg = make_config(["check-identities", "--config", str(cfgfile)])
    assert cfg.tolerances["identity_analytic"] == 1e-12
