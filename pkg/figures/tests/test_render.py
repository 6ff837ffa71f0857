"""Rendering behavior for each figure kind, using synthetic CSV inputs."""

import itertools
import math

import numpy as np
import pytest

from figure_kit.render import FigureSpec, main, render

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def write_resolvent(path, exponent=1.0, count=40, decades=(0, 3)):
    lines = ["lambda,norm"]
    for lam in np.logspace(decades[0], decades[1], count):
        lines.append(f"{lam:.17g},{lam ** -exponent:.17g}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def write_spectrum(path):
    lines = ["re,im"]
    for k in range(1, 9):
        lines.append(f"{-0.5 * k},{2.0 * k}")
        lines.append(f"{-0.5 * k},{-2.0 * k}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def write_energy(path, rate=1.0):
    lines = ["t,energy"]
    for t in np.linspace(0.0, 10.0, 51):
        lines.append(f"{t:.17g},{math.exp(-rate * t):.17g}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def write_regionmap(path, values=(0.25, 0.5, 0.75, 1.0)):
    lines = ["tau,sigma,region,phi_theory,phi_hat,r2,pass"]
    for tau, sigma in itertools.product(values, values):
        region = "R_A" if tau >= 0.5 and sigma >= 0.5 else "R_CG"
        phi = 2.0 * min(tau, sigma) / (min(tau, sigma) + 1.0)
        lines.append(f"{tau},{sigma},{region},{phi:.17g},{phi + 0.01:.17g},0.999,true")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


class TestKinds:
    def test_spectrum_png(self, tmp_path, capsys):
        src = write_spectrum(tmp_path / "s.csv")
        out = tmp_path / "s.png"
        assert main(["--kind", "spectrum", "--in", src, "--out", str(out)]) == 0
        assert out.read_bytes().startswith(PNG_MAGIC)
        printed = capsys.readouterr().out
        assert "points=16" in printed and "sector_half_angle=" in printed

    def test_resolvent_unit_slope_label(self, tmp_path, capsys):
        src = write_resolvent(tmp_path / "r.csv", exponent=1.0)
        out = tmp_path / "r.png"
        assert main(["--kind", "resolvent", "--in", src, "--out", str(out)]) == 0
        assert "slope=-1.00" in capsys.readouterr().out
        assert out.stat().st_size > 0

    def test_resolvent_fractional_slope_label(self, tmp_path, capsys):
        src = write_resolvent(tmp_path / "r.csv", exponent=0.4)
        assert main(["--kind", "resolvent", "--in", src, "--out", str(tmp_path / "r.png")]) == 0
        assert "slope=-0.40" in capsys.readouterr().out

    def test_resolvent_fit_uses_top_two_decades(self, tmp_path, capsys):
        # slope 0 below lambda = 10, slope -1 above; window [10, 1000] sees only -1
        lines = ["lambda,norm"]
        for lam in np.logspace(0, 3, 40):
            norm = 0.1 if lam < 10.0 else 1.0 / lam
            lines.append(f"{lam:.17g},{norm:.17g}")
        src = tmp_path / "piece.csv"
        src.write_text("\n".join(lines) + "\n", encoding="utf-8")
        assert main(["--kind", "resolvent", "--in", str(src), "--out", str(tmp_path / "p.png")]) == 0
        printed = capsys.readouterr().out
        assert "window=[10,1000]" in printed
        assert "slope=-1.00" in printed

    def test_resolvent_reference_line_flag(self, tmp_path, capsys):
        src = write_resolvent(tmp_path / "r.csv")
        rc = main(["--kind", "resolvent", "--in", src, "--out", str(tmp_path / "r.png"), "--phi", "1.0"])
        assert rc == 0
        assert "slope=-1.00" in capsys.readouterr().out

    def test_energy_png(self, tmp_path, capsys):
        src = write_energy(tmp_path / "e.csv")
        out = tmp_path / "e.png"
        assert main(["--kind", "energy", "--in", src, "--out", str(out)]) == 0
        printed = capsys.readouterr().out
        assert "points=51" in printed
        assert out.read_bytes().startswith(PNG_MAGIC)

    def test_regionmap_full_grid(self, tmp_path, capsys):
        src = write_regionmap(tmp_path / "m.csv")
        out = tmp_path / "m.png"
        assert main(["--kind", "regionmap", "--in", src, "--out", str(out)]) == 0
        assert "cells=16 failed=0" in capsys.readouterr().out
        assert out.read_bytes().startswith(PNG_MAGIC)


class TestDeterminism:
    @pytest.mark.parametrize("suffix", ["png", "svg"])
    def test_identical_inputs_identical_bytes(self, tmp_path, capsys, suffix):
        src = write_resolvent(tmp_path / "r.csv")
        a, b = tmp_path / f"a.{suffix}", tmp_path / f"b.{suffix}"
        assert main(["--kind", "resolvent", "--in", src, "--out", str(a)]) == 0
        assert main(["--kind", "resolvent", "--in", src, "--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()

    def test_all_kinds_stable_across_rerenders(self, tmp_path, capsys):
        sources = {
            "spectrum": write_spectrum(tmp_path / "s.csv"),
            "resolvent": write_resolvent(tmp_path / "r.csv"),
            "energy": write_energy(tmp_path / "e.csv"),
            "regionmap": write_regionmap(tmp_path / "m.csv"),
        }
        for kind, src in sources.items():
            a, b = tmp_path / f"{kind}_a.png", tmp_path / f"{kind}_b.png"
            assert main(["--kind", kind, "--in", src, "--out", str(a)]) == 0
            assert main(["--kind", kind, "--in", src, "--out", str(b)]) == 0
            assert a.read_bytes() == b.read_bytes(), kind
        capsys.readouterr()


class TestOverlays:
    def test_second_series_accepted_for_curves(self, tmp_path, capsys):
        first = write_resolvent(tmp_path / "one.csv", exponent=1.0)
        second = write_resolvent(tmp_path / "two.csv", exponent=0.5)
        rc = main(["--kind", "resolvent", "--in", first, "--in2", second, "--out", str(tmp_path / "o.png")])
        capsys.readouterr()
        assert rc == 0

    def test_spectrum_comparison_overlay(self, tmp_path, capsys):
        first = write_spectrum(tmp_path / "one.csv")
        second = write_spectrum(tmp_path / "two.csv")
        rc = main(["--kind", "spectrum", "--in", first, "--in2", second, "--out", str(tmp_path / "o.png")])
        capsys.readouterr()
        assert rc == 0

    def test_regionmap_rejects_second_input(self, tmp_path, capsys):
        src = write_regionmap(tmp_path / "m.csv")
        rc = main(["--kind", "regionmap", "--in", src, "--in2", src, "--out", str(tmp_path / "m.png")])
        assert rc == 2
        assert "single input" in capsys.readouterr().err


class TestErrorPaths:
    def test_header_only_writes_annotated_figure_and_fails(self, tmp_path, capsys):
        src = tmp_path / "empty.csv"
        src.write_text("lambda,norm\n", encoding="utf-8")
        out = tmp_path / "empty.png"
        assert main(["--kind", "resolvent", "--in", str(src), "--out", str(out)]) == 1
        assert "no samples" in capsys.readouterr().err
        assert out.read_bytes().startswith(PNG_MAGIC)

    def test_schema_mismatch_exit_code_and_column_name(self, tmp_path, capsys):
        src = tmp_path / "bad.csv"
        src.write_text("frequency,norm\n1,1\n", encoding="utf-8")
        assert main(["--kind", "resolvent", "--in", str(src), "--out", str(tmp_path / "x.png")]) == 2
        assert "'frequency'" in capsys.readouterr().err

    def test_missing_input_file(self, tmp_path, capsys):
        rc = main(["--kind", "resolvent", "--in", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "x.png")])
        assert rc == 2
        assert "render error" in capsys.readouterr().err

    def test_incomplete_grid_rejected(self, tmp_path, capsys):
        src = tmp_path / "sparse.csv"
        src.write_text(
            "tau,sigma,region,phi_theory,phi_hat,r2,pass\n"
            "0.25,0.25,R_CG,0.4,0.41,0.99,true\n"
            "0.25,0.5,R_CG,0.4,0.41,0.99,true\n"
            "0.5,0.25,R_CG,0.4,0.41,0.99,true\n",
            encoding="utf-8",
        )
        assert main(["--kind", "regionmap", "--in", str(src), "--out", str(tmp_path / "m.png")]) == 2
        assert "incomplete grid" in capsys.readouterr().err

    def test_duplicate_cell_rejected(self, tmp_path, capsys):
        # row count matches the 2x2 grid, but one cell repeats and one is missing
        src = tmp_path / "dup.csv"
        src.write_text(
            "tau,sigma,region,phi_theory,phi_hat,r2,pass\n"
            "0.25,0.25,R_CG,0.4,0.41,0.99,true\n"
            "0.25,0.25,R_CG,0.4,0.42,0.99,true\n"
            "0.25,0.5,R_CG,0.4,0.41,0.99,true\n"
            "0.5,0.5,R_A,1,0.99,0.999,true\n",
            encoding="utf-8",
        )
        assert main(["--kind", "regionmap", "--in", str(src), "--out", str(tmp_path / "m.png")]) == 2
        assert "duplicate grid cell" in capsys.readouterr().err

    def test_unsupported_image_format(self, tmp_path, capsys):
        src = write_resolvent(tmp_path / "r.csv")
        assert main(["--kind", "resolvent", "--in", src, "--out", str(tmp_path / "r.bmp")]) == 2
        assert "unsupported image format" in capsys.readouterr().err

    def test_unknown_kind_rejected_by_parser(self, tmp_path, capsys):
        with pytest.raises(SystemExit):
            main(["--kind", "histogram", "--in", "x.csv", "--out", "x.png"])
        capsys.readouterr()

    def test_library_entry_rejects_unknown_kind(self, tmp_path):
        with pytest.raises(ValueError, match="unknown figure kind"):
            render(FigureSpec(kind="histogram", in_path="x.csv", out_path="x.png"))


class TestFewSamples:
    def test_two_point_resolvent_renders_without_fit(self, tmp_path, capsys):
        src = tmp_path / "two.csv"
        src.write_text("lambda,norm\n1,1\n10,0.1\n", encoding="utf-8")
        out = tmp_path / "two.png"
        assert main(["--kind", "resolvent", "--in", str(src), "--out", str(out)]) == 0
        assert "slope=nan" in capsys.readouterr().out
        assert out.stat().st_size > 0

    def test_single_cell_regionmap(self, tmp_path, capsys):
        src = tmp_path / "one.csv"
        src.write_text(
            "tau,sigma,region,phi_theory,phi_hat,r2,pass\n1,1,R_A,1,0.99,0.999,true\n",
            encoding="utf-8",
        )
        assert main(["--kind", "regionmap", "--in", str(src), "--out", str(tmp_path / "one.png")]) == 0
        assert "cells=1" in capsys.readouterr().out
