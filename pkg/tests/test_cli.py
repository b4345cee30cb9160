import json
import re

import numpy as np
import pytest
from PIL import Image

from mehlerfock.cli import RunConfig, main
from mehlerfock.io import read_transform_csv, write_transform_csv
from mehlerfock.mft import RadialFunction
from mehlerfock.pipelines import noisy_texture, two_tone_image

from conftest import mp_conical


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestConical:
    @pytest.mark.parametrize("m, expected", [(0, "1"), (1, "0")])
    def test_origin_values(self, capsys, m, expected):
        code, out, _ = run(capsys, "conical", "--m", m, "--kappa", 1.0, "--tau", 0.0)
        assert code == 0 and out.strip() == expected

    def test_oracle_value(self, capsys):
        code, out, _ = run(capsys, "conical", "--m", 0, "--kappa", 1.0, "--tau", 1.0)
        assert code == 0 and abs(float(out) - mp_conical(0, 1.0, 1.0)) < 1e-8
        assert len(out.strip().replace("-", "").replace(".", "").lstrip("0")) <= 15

    def test_quadrature_failure_exit_3(self, capsys):
        code, _, err = run(capsys, "conical", "--m", 0, "--kappa", 20, "--tau", 12, "--n-theta", 64)
        assert code == 3 and "quadrature" in err


class TestMft:
    def test_zero_file(self, tmp_path, capsys):
        src = tmp_path / "zero.csv"
        write_transform_csv(RadialFunction.from_callable(lambda t: 0 * t), src)
        code, _, _ = run(capsys, "mft", "--input", src, "--out-dir", tmp_path, "--no-figures")
        assert code == 0
        assert np.all(read_transform_csv(tmp_path / "zero_spectrum.csv").values == 0)

    def test_round_trip_logged(self, tmp_path, capsys):
        src = tmp_path / "p2.csv"
        write_transform_csv(RadialFunction.from_callable(lambda t: np.cosh(t) ** -2.0), src)
        code, _, err = run(capsys, "mft", "--input", src, "--direction", "roundtrip", "--out-dir", tmp_path)
        assert code == 0
        match = re.search(r"relative L2 error: ([0-9.e+-]+)", err)
        assert match and float(match.group(1)) < 1e-3
        for name in ("p2_spectrum.csv", "p2_roundtrip.csv", "p2_spectrum.png", "p2_roundtrip.png"):
            assert (tmp_path / name).stat().st_size > 0

    def test_inverse_needs_spectrum(self, tmp_path, capsys):
        src = tmp_path / "p2.csv"
        write_transform_csv(RadialFunction.from_callable(lambda t: np.cosh(t) ** -2.0), src)
        code, _, err = run(capsys, "mft", "--input", src, "--direction", "inverse", "--out-dir", tmp_path)
        assert code == 2 and "spectrum" in err

    def test_missing_file_names_path(self, tmp_path, capsys):
        missing = tmp_path / "absent.csv"
        code, _, err = run(capsys, "mft", "--input", missing)
        assert code == 2 and str(missing) in err

    def test_malformed_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("1,2,3\n")
        code, _, err = run(capsys, "mft", "--input", bad, "--out-dir", tmp_path)
        assert code == 2 and "bad.csv" in err


class TestConfig:
    def test_defaults_validate(self):
        assert RunConfig().validate().m_max == 32

    @pytest.mark.parametrize("field, value", [("n_tau", 0), ("s", 1.0), ("window", -1), ("dt", -0.1)])
    def test_invalid_values(self, field, value):
        with pytest.raises(ValueError):
            RunConfig(**{field: value}).validate()

    def test_precedence(self, tmp_path, capsys):
        """Flag beats config file beats default: n_kappa comes from the file, kappa_max from the flag."""
        src = tmp_path / "p2.csv"
        write_transform_csv(RadialFunction.from_callable(lambda t: np.cosh(t) ** -2.0), src)
        conf = tmp_path / "c.json"
        conf.write_text(json.dumps({"n_kappa": 64, "kappa_max": 10.0, "figures": False}))
        code, _, _ = run(capsys, "mft", "--input", src, "--config", conf, "--kappa-max", 8, "--out-dir", tmp_path)
        assert code == 0
        spec = read_transform_csv(tmp_path / "p2_spectrum.csv")
        assert spec.grid.n_kappa == 64 and spec.grid.kappa_max == 8.0
        assert not (tmp_path / "p2_spectrum.png").exists()

    @pytest.mark.parametrize("payload", ['{"bogus": 1}', '{"n_tau": "many"}', "[1, 2]", "{not json"])
    def test_bad_config(self, tmp_path, capsys, payload):
        conf = tmp_path / "c.json"
        conf.write_text(payload)
        code, _, _ = run(capsys, "conical", "--m", 0, "--kappa", 1, "--tau", 1, "--config", conf)
        assert code == 2

    def test_invalid_flag_value(self, capsys):
        code, _, err = run(capsys, "conical", "--m", 0, "--kappa", 1, "--tau", 1, "--threads", 0)
        assert code == 2 and "threads" in err


def write_textures(directory, images):
    directory.mkdir()
    for name, img in images.items():
        Image.fromarray(np.round(img.pixels * 255).astype(np.uint8)).save(directory / f"{name}.png")


class TestTexture:
    FLAGS = ("--m-max", 4, "--no-figures")

    def test_identical_images(self, tmp_path, capsys, rng):
        img = noisy_texture(12, 0.5, rng)
        write_textures(tmp_path / "in", {"a": img, "b": img})
        code, _, _ = run(capsys, "texture", "--input-dir", tmp_path / "in", "--out-dir", tmp_path / "out", *self.FLAGS)
        assert code == 0
        D = np.loadtxt(tmp_path / "out" / "distances.csv", delimiter=",", skiprows=1, usecols=(1, 2))
        np.testing.assert_array_equal(D, np.zeros((2, 2)))

    def test_monotone_ranking_and_thread_determinism(self, tmp_path, capsys):
        rng = np.random.default_rng(42)
        write_textures(tmp_path / "in", {f"a{i}": noisy_texture(12, a, rng) for i, a in enumerate((0.0, 0.4, 1.0))})
        outs = []
        for threads in (1, 3):
            out = tmp_path / f"out{threads}"
            code, _, _ = run(capsys, "texture", "--input-dir", tmp_path / "in", "--out-dir", out,
                             "--threads", threads, *self.FLAGS)
            assert code == 0
            outs.append(out)
        rows = (outs[0] / "ranking.csv").read_text().splitlines()[1:]
        assert [r.split(",")[1] for r in rows] in (["a0", "a1", "a2"], ["a2", "a1", "a0"])
        for name in ("distances.csv", "embedding.csv", "ranking.csv", "density_a1.csv"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_figures_written(self, tmp_path, capsys, rng):
        write_textures(tmp_path / "in", {"a": noisy_texture(8, 0.1, rng), "b": noisy_texture(8, 0.9, rng)})
        code, _, _ = run(capsys, "texture", "--input-dir", tmp_path / "in", "--out-dir", tmp_path / "out",
                         "--m-max", 2)
        assert code == 0
        for name in ("embedding.png", "distances.png", "density_a.png"):
            assert (tmp_path / "out" / name).stat().st_size > 0

    def test_empty_directory(self, tmp_path, capsys):
        (tmp_path / "empty").mkdir()
        code, _, _ = run(capsys, "texture", "--input-dir", tmp_path / "empty")
        assert code == 2

    def test_unreadable_images_listed(self, tmp_path, capsys, rng):
        write_textures(tmp_path / "in", {"good": noisy_texture(8, 0.1, rng)})
        (tmp_path / "in" / "broken.png").write_bytes(b"garbage")
        code, _, err = run(capsys, "texture", "--input-dir", tmp_path / "in", "--out-dir", tmp_path / "out")
        assert code == 2 and "broken.png" in err


class TestDesaturate:
    def test_grayscale_outputs_identical(self, tmp_path, capsys, rng):
        g = rng.integers(0, 256, (12, 12), dtype=np.uint8)
        Image.fromarray(g).save(tmp_path / "gray.png")
        code, _, _ = run(capsys, "desaturate", "--input", tmp_path / "gray.png", "--out-dir", tmp_path / "out",
                         "--window", 4, "--no-figures")
        assert code == 0
        outs = sorted((tmp_path / "out").glob("gray_t*.png"))
        assert len(outs) == 16
        for p in outs:
            np.testing.assert_array_equal(np.asarray(Image.open(p).convert("L")), g)

    def test_zero_dt_repeats(self, tmp_path, capsys):
        Image.fromarray(two_tone_image(16).rgb).save(tmp_path / "tt.png")
        code, _, _ = run(capsys, "desaturate", "--input", tmp_path / "tt.png", "--out-dir", tmp_path,
                         "--dt", 0, "--n-steps", 4, "--window", 4, "--no-figures")
        assert code == 0
        first = np.asarray(Image.open(tmp_path / "tt_t1.png"))
        for k in (2, 3, 4):
            np.testing.assert_array_equal(np.asarray(Image.open(tmp_path / f"tt_t{k}.png")), first)

    def test_saturation_log_and_threads(self, tmp_path, capsys):
        Image.fromarray(two_tone_image(24).rgb).save(tmp_path / "tt.png")
        for threads in (1, 2):
            code, _, _ = run(capsys, "desaturate", "--input", tmp_path / "tt.png", "--out-dir",
                             tmp_path / f"o{threads}", "--threads", threads)
            assert code == 0
        sat = np.loadtxt(tmp_path / "o1" / "tt_saturation.csv", delimiter=",", skiprows=1)[:, 2]
        assert len(sat) == 17 and np.all(np.diff(sat[1:]) <= 1e-12)
        for k in range(1, 17):
            assert (tmp_path / "o1" / f"tt_t{k}.png").read_bytes() == (tmp_path / "o2" / f"tt_t{k}.png").read_bytes()
        assert (tmp_path / "o1" / "tt_strip.png").stat().st_size > 0

    def test_decode_failure(self, tmp_path, capsys):
        (tmp_path / "x.png").write_bytes(b"\x89PNG garbage")
        code, _, err = run(capsys, "desaturate", "--input", tmp_path / "x.png", "--out-dir", tmp_path)
        assert code == 2 and "x.png" in err


class TestKdeAndSynth:
    def test_kde_random_samples(self, tmp_path, capsys):
        code, _, err = run(capsys, "kde", "--out-dir", tmp_path, "--s", 2, "--n-samples", 10)
        assert code == 0
        dev = float(re.search(r"direct sum: ([0-9.e+-]+)", err).group(1))
        assert dev < 1e-2
        for name in ("samples.csv", "density_spectrum.csv", "density_grid.csv", "density.png"):
            assert (tmp_path / name).stat().st_size > 0

    def test_synth_outputs(self, tmp_path, capsys):
        code, _, _ = run(capsys, "synth", "--out-dir", tmp_path, "--size", 16, "--amplitudes", 0.0, 0.5)
        assert code == 0
        names = {p.name for p in tmp_path.iterdir()}
        assert {"texture_a0.00.png", "texture_a0.50.png", "two_tone.png", "gray.png", "cosh_pow2.csv"} <= names
