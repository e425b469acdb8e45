import json
import shutil

import pytest

from rectstitch.cli import main
from rectstitch.geometry import align_pair
from rectstitch.persistence import read_image, read_manifest, write_image, write_mask
from rectstitch.synthetic import synth_pair, synth_scene


@pytest.fixture
def pair_files(tmp_path):
    left, right, h = synth_pair(120, 90, seed=7)
    write_image(tmp_path / "left.png", left)
    write_image(tmp_path / "right.png", right)
    (tmp_path / "homography.json").write_text(json.dumps({"h": h.m.ravel().tolist()}))
    return tmp_path


@pytest.fixture
def prealigned_dir(tmp_path):
    left, right, h = synth_pair(120, 90, seed=7)
    pair = align_pair(left, right, h)
    d = tmp_path / "aligned"
    d.mkdir()
    write_image(d / "warp1.png", pair.i_wl)
    write_image(d / "warp2.png", pair.i_wr)
    write_mask(d / "mask1.png", pair.m_wl)
    write_mask(d / "mask2.png", pair.m_wr)
    return d


def run(*argv):
    return main([str(a) for a in argv])


class TestStitchCommand:
    def test_happy_path_homography_mode(self, pair_files, tmp_path):
        out = tmp_path / "out"
        code = run(
            "stitch", "--left", pair_files / "left.png", "--right", pair_files / "right.png",
            "--homography", pair_files / "homography.json", "--out", out, "--steps", 3,
        )
        assert code == 0
        assert (out / "stitched.png").exists()
        manifest = read_manifest(out)
        assert manifest.config["steps"] == 3
        assert set(manifest.input_hashes) == {"left", "right", "homography"}

    def test_prealigned_seeded_runs_are_byte_identical(self, prealigned_dir, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            code = run("stitch", "--prealigned", prealigned_dir, "--out", out,
                       "--steps", 3, "--seed", 0)
            assert code == 0
            outs.append((out / "stitched.png").read_bytes())
        assert outs[0] == outs[1]

    def test_env_var_backend_fallback(self, prealigned_dir, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("STITCH_BACKEND_URL", "http://127.0.0.1:9")
        code = run("stitch", "--prealigned", prealigned_dir, "--out", tmp_path / "out",
                   "--steps", 2)
        assert code == 4
        assert "backend" in capsys.readouterr().err

    def test_identical_runs_have_equivalent_manifests(self, prealigned_dir, tmp_path):
        outs = []
        for name in ("m1", "m2"):
            out = tmp_path / name
            assert run("stitch", "--prealigned", prealigned_dir, "--out", out, "--steps", 2) == 0
            outs.append(out)
        m1, m2 = (read_manifest(o) for o in outs)
        assert m1.equivalent(m2)
        assert (outs[0] / "stitched.png").read_bytes() == (outs[1] / "stitched.png").read_bytes()

    def test_missing_homography_file_is_io_error(self, pair_files, tmp_path, capsys):
        code = run(
            "stitch", "--left", pair_files / "left.png", "--right", pair_files / "right.png",
            "--homography", pair_files / "nope.json", "--out", tmp_path / "out",
        )
        assert code == 3
        assert "nope.json" in capsys.readouterr().err

    def test_incomplete_homography_args_is_usage_error(self, pair_files, tmp_path):
        code = run("stitch", "--left", pair_files / "left.png", "--out", tmp_path / "out")
        assert code == 2

    def test_dump_artifacts_layout(self, prealigned_dir, tmp_path):
        out = tmp_path / "out"
        code = run("stitch", "--prealigned", prealigned_dir, "--out", out,
                   "--steps", 2, "--dump-artifacts", "--dump-step-masks")
        assert code == 0
        for name in (
            "stitched.png", "coarse_fusion.png", "coarse_rectangling.png",
            "mask_seam.png", "mask_rect.png", "mask_inpaint.png",
            "w_init.png", "w_inpaint.png", "manifest.json",
        ):
            assert (out / name).exists(), name
        step_files = sorted((out / "step_masks").glob("t*.png"))
        assert len(step_files) == 3  # steps + 1

    def test_batch_jobs_match_serial(self, prealigned_dir, tmp_path):
        batch = tmp_path / "batch"
        for name in ("p0", "p1"):
            shutil.copytree(prealigned_dir, batch / name)
        out1 = tmp_path / "serial"
        out4 = tmp_path / "parallel"
        assert run("stitch", "--pairs-dir", batch, "--out", out1, "--steps", 2, "--jobs", 1) == 0
        assert run("stitch", "--pairs-dir", batch, "--out", out4, "--steps", 2, "--jobs", 4) == 0
        for name in ("p0", "p1"):
            a = (out1 / name / "stitched.png").read_bytes()
            b = (out4 / name / "stitched.png").read_bytes()
            assert a == b


class TestMasksCommand:
    def test_writes_seven_rasters(self, prealigned_dir, tmp_path):
        out = tmp_path / "masks"
        assert run("masks", "--prealigned", prealigned_dir, "--out", out) == 0
        pngs = sorted(p.name for p in out.glob("*.png"))
        assert pngs == [
            "mask_content.png", "mask_inpaint.png", "mask_overlap.png",
            "mask_rect.png", "mask_seam.png", "w_init.png", "w_inpaint.png",
        ]

    def test_smaller_divisor_widens_band(self, prealigned_dir, tmp_path):
        narrow = tmp_path / "narrow"
        wide = tmp_path / "wide"
        assert run("masks", "--prealigned", prealigned_dir, "--out", narrow) == 0
        assert run("masks", "--prealigned", prealigned_dir, "--out", wide, "--lambda", 100) == 0
        count_narrow = (read_image(narrow / "mask_seam.png").data > 0.5).sum()
        count_wide = (read_image(wide / "mask_seam.png").data > 0.5).sum()
        assert count_wide > count_narrow

    def test_no_overlap_is_pipeline_error(self, tmp_path):
        img = synth_scene(40, 40, seed=0)
        d = tmp_path / "inputs"
        d.mkdir()
        write_image(d / "left.png", img)
        write_image(d / "right.png", img)
        (d / "h.json").write_text(json.dumps({"h": [1, 0, 40, 0, 1, 0, 0, 0, 1]}))
        code = run("masks", "--left", d / "left.png", "--right", d / "right.png",
                   "--homography", d / "h.json", "--out", tmp_path / "out")
        assert code == 5


class TestEvalCommand:
    def test_identical_quadruples_score_one(self, tmp_path):
        img = synth_scene(128, 128, seed=3)
        for sample in ("s0", "s1"):
            d = tmp_path / "eval" / sample
            d.mkdir(parents=True)
            for name in ("stitched", "fusion", "left", "right"):
                write_image(d / f"{name}.png", img)
        assert run("eval", "--dir", tmp_path / "eval") == 0
        rows = (tmp_path / "eval" / "ccs_report.csv").read_text().strip().splitlines()
        assert rows[0] == "image_id,ccs,ccs_n,ccs_g"
        assert len(rows) == 4  # two samples + mean
        mean = rows[-1].split(",")
        assert mean[0] == "mean"
        assert float(mean[1]) == pytest.approx(1.0, abs=1e-6)

    def test_rows_stay_in_range(self, tmp_path):
        d = tmp_path / "eval" / "mixed"
        d.mkdir(parents=True)
        for i, name in enumerate(("stitched", "fusion", "left", "right")):
            write_image(d / f"{name}.png", synth_scene(130, 130, seed=40 + i))
        assert run("eval", "--dir", tmp_path / "eval") == 0
        rows = (tmp_path / "eval" / "ccs_report.csv").read_text().strip().splitlines()[1:]
        for row in rows:
            for v in row.split(",")[1:]:
                assert -1.0 <= float(v) <= 1.0

    def test_remote_provider_down_is_backend_error(self, tmp_path):
        d = tmp_path / "eval" / "s"
        d.mkdir(parents=True)
        img = synth_scene(128, 128, seed=1)
        for name in ("stitched", "fusion", "left", "right"):
            write_image(d / f"{name}.png", img)
        code = run("eval", "--dir", tmp_path / "eval", "--provider", "remote",
                   "--backend", "http://127.0.0.1:9")
        assert code == 4


class TestAblateCommand:
    def test_four_configs_and_contact_sheet(self, tmp_path):
        from rectstitch.synthetic import corner_hole_pair

        pair = corner_hole_pair(96, 72, leg=16, seed=4)
        d = tmp_path / "aligned"
        d.mkdir()
        write_image(d / "warp1.png", pair.i_wl)
        write_image(d / "warp2.png", pair.i_wr)
        write_mask(d / "mask1.png", pair.m_wl)
        write_mask(d / "mask2.png", pair.m_wr)
        out = tmp_path / "ablate"
        assert run("ablate", "--prealigned", d, "--out", out, "--steps", 2) == 0
        names = [
            "full", "no_coarse_rectangling", "no_weighted_init", "no_weighted_inpaint",
        ]
        for name in names:
            assert (out / name / "stitched.png").exists()
        sheet = read_image(out / "sheet.png")
        one = read_image(out / "full" / "stitched.png")
        assert sheet.height == 2 * one.height
        assert sheet.width == 2 * one.width


class TestHelp:
    def test_help_lists_defaults(self, capsys):
        with pytest.raises(SystemExit):
            import rectstitch.cli as cli

            cli.build_parser().parse_args(["stitch", "--help"])
        text = capsys.readouterr().out
        for token in ("--lambda", "--delta", "--kg", "--radius", "--eps1",
                      "--eps2", "--steps", "--guidance", "--seed"):
            assert token in text
        assert "200" in text and "7.5" in text and "128" in text
