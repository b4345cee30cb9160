"""
Command-line entry point.

Every command writes its delimited output and figures under ``--out-dir``.
Settings come from, in increasing precedence: built-in defaults, a JSON file
given by ``--config`` (keys are the RunConfig field names), command-line flags.

Exit codes: 0 success, 2 bad input (missing or malformed files, invalid
settings), 3 quadrature failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io, plotting
from .conical import DEFAULT_QUADRATURE, QuadratureError, conical_p
from .density import RadialKernel, SampleSet, kde_direct, kde_spectral
from .mft import (
    RadialFunction,
    RadialGrid,
    SpectralGrid,
    Spectrum,
    mft_forward,
    mft_inverse,
    relative_l2_error,
)
from .pipelines import (
    DesaturationConfig,
    TextureConfig,
    default_schedule,
    desaturate,
    noisy_color_image,
    noisy_texture,
    texture_rank,
    two_tone_image,
)

log = logging.getLogger("mehlerfock")


@dataclass(frozen=True)
class RunConfig:
    tau_max: float = 12.0
    n_tau: int = 600
    kappa_max: float = 20.0
    n_kappa: int = 400
    kernel_family: str = "PowerCosh"
    s: float = 4.0
    m_max: int = 32
    gain: float = 1.0
    window: int = 10
    dt: float = 0.05
    n_steps: int = 16
    threads: int = 1
    seed: int = 42
    out_dir: str = "."
    figures: bool = True

    def validate(self) -> "RunConfig":
        positive = ("tau_max", "n_tau", "kappa_max", "n_kappa", "s", "gain", "window", "n_steps", "threads")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.m_max < 0:
            raise ValueError("m_max must be >= 0")
        if self.dt < 0:
            raise ValueError("dt must be >= 0")
        # builds the grids and kernel, which check the remaining constraints
        self.sgrid, self.rgrid, self.kernel
        return self

    @property
    def sgrid(self) -> SpectralGrid:
        return SpectralGrid(self.kappa_max, self.n_kappa)

    @property
    def rgrid(self) -> RadialGrid:
        return RadialGrid(self.tau_max, self.n_tau)

    @property
    def kernel(self) -> RadialKernel:
        return RadialKernel(self.s, self.kernel_family)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


class UsageError(Exception):
    pass


def _load_config(args) -> RunConfig:
    values = {}
    if args.config is not None:
        path = Path(args.config)
        if not path.is_file():
            raise FileNotFoundError(f"no such config file: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise UsageError(f"{path}: expected a JSON object")
        unknown = sorted(set(data) - set(_FIELDS))
        if unknown:
            raise UsageError(f"{path}: unknown keys {unknown}")
        values.update(data)
    for name in _FIELDS:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    for name, v in values.items():
        kind = type(_FIELDS[name].default)
        if kind is float and isinstance(v, int) and not isinstance(v, bool):
            values[name] = float(v)
        elif not isinstance(values[name], kind) or (kind is int and isinstance(v, bool)):
            raise UsageError(f"{name} must be of type {kind.__name__}, got {v!r}")
    return RunConfig(**values).validate()


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_conical(args, cfg: RunConfig) -> int:
    qcfg = DEFAULT_QUADRATURE if args.n_theta is None else DEFAULT_QUADRATURE.with_n_theta(args.n_theta)
    print("%.15g" % conical_p(args.m, args.kappa, args.tau, qcfg))
    return 0


def cmd_mft(args, cfg: RunConfig) -> int:
    src = Path(args.input)
    obj = io.read_transform_csv(src)
    out = _out_dir(cfg)
    stem = src.stem
    if args.direction in ("forward", "roundtrip"):
        if not isinstance(obj, RadialFunction):
            raise UsageError(f"{src}: forward transform needs a radial file")
        spec = mft_forward(obj, cfg.sgrid)
        io.write_transform_csv(spec, out / f"{stem}_spectrum.csv")
        if cfg.figures:
            plotting.plot_transform(spec, out / f"{stem}_spectrum.png", "forward transform")
        log.info("wrote %s", out / f"{stem}_spectrum.csv")
        if args.direction == "roundtrip":
            back = mft_inverse(spec, obj.grid)
            io.write_transform_csv(back, out / f"{stem}_roundtrip.csv")
            if cfg.figures:
                plotting.plot_roundtrip(obj, back, out / f"{stem}_roundtrip.png")
            if np.any(obj.values):
                log.info("round-trip relative L2 error: %.3e", relative_l2_error(back, obj))
            else:
                log.info("round-trip of the zero function: max abs value %.3e", float(np.abs(back.values).max()))
    else:
        if not isinstance(obj, Spectrum):
            raise UsageError(f"{src}: inverse transform needs a spectrum file")
        rad = mft_inverse(obj, cfg.rgrid)
        io.write_transform_csv(rad, out / f"{stem}_radial.csv")
        if cfg.figures:
            plotting.plot_transform(rad, out / f"{stem}_radial.png", "inverse transform")
        log.info("wrote %s", out / f"{stem}_radial.csv")
    return 0


def cmd_kde(args, cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    if args.samples is not None:
        samples = SampleSet.read_csv(args.samples)
    else:
        rng = np.random.default_rng(cfg.seed)
        n = args.n_samples
        samples = SampleSet(rng.uniform(0, 2 * np.pi, n), rng.uniform(0, args.tau_range, n))
        samples.write_csv(out / "samples.csv")
    d = kde_spectral(samples, cfg.kernel, cfg.m_max, cfg.sgrid, cfg.rgrid)
    d.write_csv(out / "density_spectrum.csv")
    tau = np.linspace(0.0, float(samples.tau.max()) + 1.0, args.n_tau_plot)
    grid = d.polar_grid(tau, args.n_phi_plot)
    io.write_polar_dump(grid, out / "density_grid.csv")
    phi = 2 * np.pi * np.arange(args.n_phi_plot) / args.n_phi_plot
    z = np.tanh(tau / 2)[None, :] * np.exp(1j * phi[:, None])
    direct = kde_direct(samples, cfg.kernel, z)
    log.info("max relative deviation from the direct sum: %.3e",
             float(np.abs(grid - direct).max() / np.abs(direct).max()))
    if cfg.figures:
        plotting.plot_polar_density(grid, tau, out / "density.png", f"spectral KDE, m_max={cfg.m_max}")
    return 0


def _image_files(directory: Path):
    if not directory.is_dir():
        raise FileNotFoundError(f"no such directory: {directory}")
    return sorted(p for p in directory.iterdir() if p.suffix.lower() in io.IMAGE_SUFFIXES)


def cmd_texture(args, cfg: RunConfig) -> int:
    files = _image_files(Path(args.input_dir))
    if len(files) < 2:
        raise UsageError(f"{args.input_dir}: need at least 2 images, found {len(files)}")
    images, bad = {}, []
    for f in files:
        try:
            images[f.stem] = io.read_gray_image(f)
        except (io.FormatError, ValueError) as exc:
            bad.append(f"{f}: {exc}")
    if bad:
        raise UsageError("unreadable images:\n  " + "\n  ".join(bad))
    if len(images) != len(files):
        raise UsageError("image file names must have distinct stems")
    tcfg = TextureConfig(cfg.gain, cfg.s, cfg.m_max, cfg.sgrid, cfg.rgrid, cfg.threads)
    res = texture_rank(images, tcfg)
    out = _out_dir(cfg)
    io.write_labeled_matrix(out / "distances.csv", res.ids, res.ids, res.distances)
    axes = [f"axis{j + 1}" for j in range(res.embedding.shape[1])]
    io.write_labeled_matrix(out / "embedding.csv", res.ids, axes, res.embedding)
    with open(out / "ranking.csv", "w") as fh:
        fh.write("rank,id,axis1\n")
        for rank, tid in enumerate(res.order, start=1):
            fh.write(f"{rank},{tid},{res.first_axis[tid]:.16e}\n")
    tau = np.linspace(0.0, 2.0 * cfg.gain * np.sqrt(2.0), 48)
    grids = {}
    for tid, d in zip(res.ids, res.densities):
        grids[tid] = d.polar_grid(tau, 64)
        io.write_polar_dump(grids[tid], out / f"density_{tid}.csv")
    if cfg.figures:
        plotting.plot_embedding(res.ids, res.embedding, out / "embedding.png")
        plotting.plot_distance_matrix(res.distances, res.ids, out / "distances.png")
        for tid, g in grids.items():
            plotting.plot_polar_density(g, tau, out / f"density_{tid}.png", tid)
    log.info("ranking: %s", " < ".join(res.order))
    return 0


def cmd_desaturate(args, cfg: RunConfig) -> int:
    src = Path(args.input)
    img = io.read_color_image(src)
    times = default_schedule(cfg.dt, cfg.n_steps)
    dcfg = DesaturationConfig(s=cfg.s, sgrid=cfg.sgrid, rgrid=cfg.rgrid, threads=cfg.threads)
    res = desaturate(img, cfg.window, times, dcfg)
    out = _out_dir(cfg)
    for k, im in enumerate(res.images, start=1):
        io.write_png(im.rgb, out / f"{src.stem}_t{k}.png")
    with open(out / f"{src.stem}_saturation.csv", "w") as fh:
        fh.write("step,time,mean_saturation\n")
        fh.write(f"0,0,{float(res.initial_radii.mean()):.16e}\n")
        for k, (t, m) in enumerate(zip(res.times, res.mean_saturation), start=1):
            fh.write(f"{k},{t:.16e},{m:.16e}\n")
    if cfg.figures:
        plotting.plot_saturation([0.0] + res.times, [float(res.initial_radii.mean())] + res.mean_saturation,
                                 out / f"{src.stem}_saturation.png")
        plotting.plot_image_strip([img.rgb] + [im.rgb for im in res.images],
                                  ["input"] + [f"t={t:.2f}" for t in res.times], out / f"{src.stem}_strip.png")
    log.info("wrote %d images to %s", len(res.images), out)
    return 0


def cmd_synth(args, cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    rng = np.random.default_rng(cfg.seed)
    for amp in args.amplitudes:
        io.write_png(noisy_texture(args.size, amp, rng).pixels, out / f"texture_a{amp:.2f}.png")
    io.write_png(two_tone_image(args.size).rgb, out / "two_tone.png")
    io.write_png(noisy_color_image(args.size, rng).rgb, out / "noisy_color.png")
    io.write_png(np.repeat(rng.integers(0, 256, (args.size, args.size, 1), dtype=np.uint8), 3, axis=2),
                 out / "gray.png")
    radial = RadialFunction.from_callable(lambda t: np.cosh(t) ** -2.0, cfg.rgrid)
    io.write_transform_csv(radial, out / "cosh_pow2.csv")
    log.info("wrote synthetic inputs to %s", out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--config", help="JSON file with RunConfig fields")
    g.add_argument("--out-dir", dest="out_dir", help="output directory (default: current)")
    g.add_argument("--threads", type=int, help="worker threads (default 1)")
    g.add_argument("--seed", type=int, help="seed for generated data (default 42)")
    g.add_argument("--tau-max", dest="tau_max", type=float)
    g.add_argument("--n-tau", dest="n_tau", type=int)
    g.add_argument("--kappa-max", dest="kappa_max", type=float)
    g.add_argument("--n-kappa", dest="n_kappa", type=int)
    g.add_argument("--s", type=float, help="kernel exponent (default 4)")
    g.add_argument("--m-max", dest="m_max", type=int, help="highest angular order (default 32)")
    g.add_argument("--no-figures", dest="figures", action="store_const", const=False,
                   help="skip the matplotlib figures")
    g.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="mehlerfock", description="Harmonic analysis on the hyperbolic disk.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("conical", parents=[common], help="evaluate P^m_{-1/2+i kappa}(cosh tau)")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--n-theta", dest="n_theta", type=int)
    p.set_defaults(func=cmd_conical)

    p = sub.add_parser("mft", parents=[common], help="Mehler-Fock transform of a CSV file")
    p.add_argument("--input", required=True)
    p.add_argument("--direction", choices=("forward", "inverse", "roundtrip"), default="forward")
    p.set_defaults(func=cmd_mft)

    p = sub.add_parser("kde", parents=[common], help="spectral kernel density estimate on the disk")
    p.add_argument("--samples", help="CSV with phi,tau[,weight] rows; random samples if omitted")
    p.add_argument("--n-samples", dest="n_samples", type=int, default=20)
    p.add_argument("--tau-range", dest="tau_range", type=float, default=3.0)
    p.add_argument("--n-phi-plot", dest="n_phi_plot", type=int, default=64)
    p.add_argument("--n-tau-plot", dest="n_tau_plot", type=int, default=48)
    p.set_defaults(func=cmd_kde)

    p = sub.add_parser("texture", parents=[common], help="rank a directory of textures")
    p.add_argument("--input-dir", dest="input_dir", required=True)
    p.add_argument("--gain", type=float)
    p.set_defaults(func=cmd_texture)

    p = sub.add_parser("desaturate", parents=[common], help="heat-flow desaturation of a color image")
    p.add_argument("--input", required=True)
    p.add_argument("--window", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--n-steps", dest="n_steps", type=int)
    p.set_defaults(func=cmd_desaturate)

    p = sub.add_parser("synth", parents=[common], help="write synthetic demo inputs")
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--amplitudes", type=float, nargs="+", default=[0.0, 0.3, 0.6])
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    warnings.simplefilter("default")
    try:
        cfg = _load_config(args)
        return args.func(args, cfg)
    except QuadratureError as exc:
        print(f"error: quadrature failed: {exc}", file=sys.stderr)
        return 3
    except (UsageError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
