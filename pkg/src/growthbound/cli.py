"""Command line front end: ``growthbound construct|certify|profile|demo``.

Runs are driven by a TOML file with flat dotted keys, for example::

    mode = "growth"
    h = 8.0
    x0 = -0.1
    delta_max = 1e-100
    weight.family = "power"
    weight.alpha = 1.0
    decay.family = "inverse-log"
    grid.radial = 40
    grid.angles = 64

Exit codes: 0 ok, 2 configuration error, 3 certification failure,
4 numerical instability.
"""

import argparse
from dataclasses import dataclass, field
import math
from pathlib import Path
import re
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from growthbound.certify import CertGrid, certify_bloch, certify_growth, little_o_profile
from growthbound.coefficients import CoeffSeq, NuSeq, nu_coefficients
from growthbound.envelope import Envelope, build_envelope
from growthbound.errors import (
    ArgumentError,
    ConfigError,
    ConstructionError,
    DomainError,
    GrowthboundError,
    NumericalInstabilityError,
    PreconditionError,
)
from growthbound.series import FunctionPair, SparseSeries, build_bloch_pair, build_growth_pair
from growthbound.weights import DecayFunction, RadialWeight
from growthbound.zeros import remove_common_zeros

EXIT_OK, EXIT_CONFIG, EXIT_CERT, EXIT_NUMERIC = 0, 2, 3, 4

DEFAULTS_HELP = """\
config keys (defaults in brackets):
  mode                 bloch | vmoa | growth                      [vmoa]
  q                    lacunarity, perfect square                 [100]
  J                    truncation of the lacunary series          [auto]
  h                    envelope gap parameter, h >= 8             [8.0]
  x0                   log t_0, log(9/10) < x0 < 0                [-0.1]
  K_max                cap on covering envelope segments          [64]
  r_max | delta_max    outer radius (give one)                    [delta_max = 1e-6]
  weight.family        power | exponential | custom               [power]
  weight.alpha         power exponent                             [1.0]
  weight.c, weight.p   exponential weight exp(-c/(1-r)^p)         [1.0, 1.0]
  weight.expr          custom expression in r and d = 1 - r
  decay.family         inverse-log | power | constant-one         [inverse-log]
  decay.scale          inverse-log scale                          [1.0]
  decay.gamma          power decay exponent                       [0.5]
  grid.radial          radial samples per interval                [40]
  grid.angles          angular samples                            [64]
  grid.k_min, k_max    certified interval indices                 [bloch 1..6, growth 3..k_cover]
  profile.delta_first  first probe, 1 - r                         [0.1]
  profile.delta_last   last probe                                 [bloch 1e-22, growth delta_max]
  profile.count        number of probes                           [23]
  profile.window_end   grid end beyond the last probe             [last probe]
  seed                 random angular jitter (off when absent)    [off]
  output.dir           output directory                           [out]

environment: GROWTHBOUND_THREADS caps certification threads.
exit codes: 0 ok, 2 config error, 3 certification failure, 4 numerical instability.
"""


@dataclass
class RunConfig:
    mode: str = "vmoa"
    q: int = 100
    J: int = None
    h: float = 8.0
    x0: float = -0.1
    K_max: int = 64
    r_max: float = None
    delta_max: float = None
    weight: dict = field(default_factory=lambda: {"family": "power", "alpha": 1.0})
    decay: dict = field(default_factory=lambda: {"family": "inverse-log"})
    grid_radial: int = 40
    grid_angles: int = 64
    k_min: int = None
    k_max: int = None
    profile: dict = field(default_factory=dict)
    seed: int = None
    out: str = "out"
    source: str = ""  # raw text, for line references

    # -- parsing -------------------------------------------------------------

    @classmethod
    def from_text(cls, text):
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            m = re.search(r"line (\d+)", str(exc))
            raise ConfigError(f"cannot parse config: {exc}", int(m.group(1)) if m else None) from None
        cfg = cls(source=text)
        known = {"mode", "q", "J", "h", "x0", "K_max", "r_max", "delta_max", "weight", "decay", "grid",
                 "profile", "seed", "output"}
        for key in data:
            if key not in known:
                raise ConfigError(f"unknown key {key!r}", _line_of(text, key))
        for key in ("mode", "q", "J", "h", "x0", "K_max", "r_max", "delta_max", "seed"):
            if key in data:
                setattr(cfg, key, data[key])
        if "weight" in data:
            cfg.weight = dict(data["weight"])
        if "decay" in data:
            cfg.decay = dict(data["decay"])
        grid = data.get("grid", {})
        for key in grid:
            if key not in ("radial", "angles", "k_min", "k_max"):
                raise ConfigError(f"unknown key grid.{key}", _line_of(text, f"grid.{key}"))
        cfg.grid_radial = grid.get("radial", cfg.grid_radial)
        cfg.grid_angles = grid.get("angles", cfg.grid_angles)
        cfg.k_min = grid.get("k_min")
        cfg.k_max = grid.get("k_max")
        cfg.profile = dict(data.get("profile", {}))
        cfg.out = data.get("output", {}).get("dir", cfg.out)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path):
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_text(text)

    def _fail(self, msg, key):
        raise ConfigError(msg, _line_of(self.source, key))

    def validate(self):
        if self.mode not in ("bloch", "vmoa", "growth"):
            self._fail(f"mode must be bloch, vmoa or growth (got {self.mode!r})", "mode")
        if not isinstance(self.q, int) or self.q < 4 or math.isqrt(self.q) ** 2 != self.q:
            self._fail("q must be a perfect square integer >= 4", "q")
        if self.J is not None and (not isinstance(self.J, int) or self.J < 2):
            self._fail("J must be an integer >= 2", "J")
        if self.mode == "growth":
            if not isinstance(self.h, (int, float)) or not self.h >= 8:
                self._fail(f"h = {self.h} violates h >= 8", "h")
            if not (math.log(0.9) < self.x0 < 0):
                self._fail(f"x0 = {self.x0} violates log(9/10) < x0 < 0", "x0")
            if not isinstance(self.K_max, int) or self.K_max < 3:
                self._fail("K_max must be an integer >= 3", "K_max")
            if self.r_max is not None and self.delta_max is not None:
                self._fail("give only one of r_max and delta_max", "delta_max")
            if self.r_max is not None and not (0 < self.r_max < 1):
                self._fail("r_max must lie in (0, 1)", "r_max")
            if self.delta_max is not None and not (0 < self.delta_max < 1):
                self._fail("delta_max must lie in (0, 1)", "delta_max")
        if self.mode == "vmoa" and self.decay.get("family", "inverse-log") != "inverse-log":
            self._fail("mode vmoa uses the inverse-log decay", "decay.family")
        for key, val, lo in (("grid.radial", self.grid_radial, 2), ("grid.angles", self.grid_angles, 1)):
            if not isinstance(val, int) or val < lo:
                self._fail(f"{key} must be an integer >= {lo}", key)
        try:
            self.make_weight()
        except (ArgumentError, KeyError, TypeError, SyntaxError, NameError) as exc:
            self._fail(f"bad weight: {exc}", "weight.family")
        try:
            self.make_decay()
        except (ArgumentError, KeyError, TypeError) as exc:
            self._fail(f"bad decay: {exc}", "decay.family")

    # -- object factories ----------------------------------------------------

    def make_weight(self):
        w = dict(self.weight)
        fam = w.pop("family", "power")
        if fam == "power":
            return RadialWeight.power(w.get("alpha", 1.0))
        if fam == "exponential":
            return RadialWeight.exponential(w.get("c", 1.0), w.get("p", 1.0))
        if fam == "custom":
            return RadialWeight.custom(w["expr"])
        raise ArgumentError(f"unknown weight family {fam!r}")

    def make_decay(self):
        d = dict(self.decay)
        fam = d.pop("family", "inverse-log")
        if fam == "inverse-log":
            return DecayFunction.inverse_log(d.get("scale", 1.0))
        if fam == "power":
            return DecayFunction.power(d.get("gamma", 0.5))
        if fam == "constant-one":
            return DecayFunction.constant_one()
        raise ArgumentError(f"unknown decay family {fam!r}")

    def make_grid(self):
        k_range = None
        if self.k_min is not None or self.k_max is not None:
            if self.k_min is None or self.k_max is None:
                raise ConfigError("give both grid.k_min and grid.k_max", _line_of(self.source, "grid.k_min"))
            k_range = (self.k_min, self.k_max)
        offset = 0.0
        if self.seed is not None:
            offset = float(np.random.default_rng(self.seed).uniform())
        return CertGrid(k_range, self.grid_radial, self.grid_angles, offset)

    def outer_delta(self):
        if self.r_max is not None:
            return 1.0 - self.r_max
        return self.delta_max if self.delta_max is not None else 1e-6

    def canonical(self):
        """Deterministic TOML text of the effective configuration."""
        lines = [f'mode = "{self.mode}"', f"q = {self.q}"]
        if self.J is not None:
            lines.append(f"J = {self.J}")
        lines += [f"h = {self.h!r}", f"x0 = {self.x0!r}", f"K_max = {self.K_max}"]
        if self.r_max is not None:
            lines.append(f"r_max = {self.r_max!r}")
        if self.delta_max is not None:
            lines.append(f"delta_max = {self.delta_max!r}")
        for prefix, table in (("weight", self.weight), ("decay", self.decay), ("profile", self.profile)):
            for k in sorted(table):
                lines.append(f"{prefix}.{k} = {_toml_value(table[k])}")
        lines += [f"grid.radial = {self.grid_radial}", f"grid.angles = {self.grid_angles}"]
        if self.k_min is not None:
            lines += [f"grid.k_min = {self.k_min}", f"grid.k_max = {self.k_max}"]
        if self.seed is not None:
            lines.append(f"seed = {self.seed}")
        return "\n".join(lines) + "\n"


def _toml_value(v):
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return str(v)


def _line_of(text, key):
    """1-based line where ``key`` (possibly dotted) is assigned, or None."""
    if not text:
        return None
    parts = key.split(".")
    pat = re.compile(r"^\s*" + r"\s*\.\s*".join(re.escape(p) for p in parts) + r"\s*=")
    for i, line in enumerate(text.splitlines(), 1):
        if pat.match(line):
            return i
    # a [table] header followed by the last part
    if len(parts) == 2:
        inside = False
        for i, line in enumerate(text.splitlines(), 1):
            s = line.strip()
            if s.startswith("["):
                inside = s == f"[{parts[0]}]"
            elif inside and re.match(r"^" + re.escape(parts[1]) + r"\s*=", s):
                return i
    return None


PRESETS = {
    "ramey-ullrich": """\
mode = "bloch"
q = 100
J = 8
decay.family = "constant-one"
grid.k_min = 1
grid.k_max = 6
""",
    "vmoa": """\
mode = "vmoa"
q = 100
J = 14
decay.family = "inverse-log"
grid.k_min = 1
grid.k_max = 6
profile.delta_first = 0.1
profile.delta_last = 1e-22
profile.count = 23
""",
    "abakumov-doubtsov-little": """\
mode = "growth"
h = 8.0
x0 = -0.1
delta_max = 1e-100
weight.family = "power"
weight.alpha = 1.0
decay.family = "inverse-log"
profile.delta_first = 0.1
profile.delta_last = 1e-90
profile.count = 90
profile.window_end = 1e-100
""",
}


# -- pipeline ----------------------------------------------------------------


@dataclass
class Built:
    pair: FunctionPair
    env: Envelope = None
    nu: NuSeq = None


def construct(cfg):
    if cfg.mode in ("bloch", "vmoa"):
        kind = cfg.mode
        k_max = cfg.k_max if cfg.k_max is not None else 6
        pair = build_bloch_pair(cfg.make_decay(), cfg.q, cfg.J, k_max=k_max, kind=kind)
        return Built(pair)
    weight = cfg.make_weight()
    env = build_envelope(weight, cfg.h, cfg.x0, K_max=cfg.K_max, delta_max=cfg.outer_delta())
    decay = cfg.make_decay()
    if decay.is_constant_one:
        nu = NuSeq(tuple([1.0] * env.K), tuple(env.x))
    else:
        nu = nu_coefficients(decay, x_seq=env.x)
    pair, _ = remove_common_zeros(build_growth_pair(env, nu))
    return Built(pair, env, nu)


def write_construct(cfg, built, out):
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.toml").write_text(cfg.canonical())
    pair = built.pair
    (out / "series_f.csv").write_text(pair.f.to_csv(pair.kind))
    (out / "series_g.csv").write_text(pair.g.to_csv(pair.kind))
    if pair.kind in ("bloch", "vmoa"):
        (out / "coefficients_f.csv").write_text(pair.provenance["a"].to_csv())
        (out / "coefficients_g.csv").write_text(pair.provenance["b"].to_csv())
    else:
        (out / "envelope.txt").write_text(built.env.to_text())
        (out / "nu.csv").write_text(built.nu.to_csv())
        (out / "zeros.txt").write_text(pair.zero_report.to_text())


def load_construct(src):
    """Re-read the artifacts written by ``construct``."""
    src = Path(src)
    cfg = RunConfig.from_file(src / "config.toml")
    f, kind = SparseSeries.from_csv((src / "series_f.csv").read_text())
    g, _ = SparseSeries.from_csv((src / "series_g.csv").read_text())
    if kind in ("bloch", "vmoa"):
        J = len(f)
        a = CoeffSeq(f.coefficients, cfg.q, 0.0, ())
        b = CoeffSeq(g.coefficients, cfg.q, 0.5, ())
        prov = {"decay": cfg.make_decay(), "q": cfg.q, "J": J, "a": a, "b": b}
        return cfg, Built(FunctionPair(f, g, kind, prov))
    env = Envelope.from_text((src / "envelope.txt").read_text())
    nu = NuSeq.from_csv((src / "nu.csv").read_text(), float(env.x[0]))
    prov = {"env": env, "nu": nu, "shift": env.n[0], "x_radius": float(env.x[2])}
    pair = FunctionPair(f.rotated(0.0), g.rotated(0.0), kind, prov)
    pair, rep = remove_common_zeros(pair)
    if rep.theta_turns != g.rotation:
        raise NumericalInstabilityError("stored rotation differs from the recomputed one")
    return cfg, Built(pair, env, nu)


def certify(cfg, built):
    grid = cfg.make_grid()
    if built.pair.kind in ("bloch", "vmoa"):
        return certify_bloch(built.pair, cfg.make_decay(), cfg.q, grid)
    decay = cfg.make_decay()
    nu = None if decay.is_constant_one else built.nu
    return certify_growth(built.pair, cfg.make_weight(), decay, built.env, nu, grid)


def write_report(report, out):
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(report.to_text())
    (out / "report.kv").write_text(report.to_kv())
    (out / "profile.csv").write_text(report.profile_csv())


def profile(cfg, built):
    """Little-o profile of the pair, or None in big-O mode."""
    if cfg.make_decay().is_constant_one:
        return None
    p = cfg.profile
    first = float(p.get("delta_first", 0.1))
    default_last = cfg.outer_delta() if built.pair.kind == "growth" else 1e-22
    last = float(p.get("delta_last", default_last))
    count = int(p.get("count", 23))
    probes = np.geomspace(first, last, count)
    window = p.get("window_end")
    pair = built.pair
    if pair.kind == "growth":
        return little_o_profile([pair.f, pair.g], cfg.make_weight(), probes, window_end=window,
                                angles=cfg.grid_angles)
    return little_o_profile([pair.f, pair.g], None, probes, deriv=True, window_end=window, angles=cfg.grid_angles)


def write_profile(prof, out):
    out.mkdir(parents=True, exist_ok=True)
    text = prof.to_csv()
    (out / "little_o_profile.csv").write_text(text)
    summary = (
        f"ratio = {prof.ratio:.17g}\nmonotone = {int(prof.monotone)}\nverdict = {prof.verdict}\n"
    )
    (out / "little_o_summary.txt").write_text(summary)
    return summary


# -- argument handling -------------------------------------------------------


def _k_range(text):
    m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError("expected A..B")
    return int(m.group(1)), int(m.group(2))


def _parser():
    p = argparse.ArgumentParser(
        prog="growthbound",
        description="Construct and certify function pairs with prescribed growth near the unit circle.",
        epilog=DEFAULTS_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="TOML run configuration")
        sp.add_argument("--out", help="output directory (overrides output.dir)")
        sp.add_argument("--grid-radial", type=int, help="radial samples per interval")
        sp.add_argument("--grid-angles", type=int, help="angular samples")
        sp.add_argument("--k-range", type=_k_range, help="certified interval indices A..B")

    common(sub.add_parser("construct", help="build sequences, envelope and series tables"))
    cp = sub.add_parser("certify", help="certify the bounds and write reports")
    common(cp)
    cp.add_argument("--from", dest="source", help="directory written by construct")
    common(sub.add_parser("profile", help="write the little-o profile"))
    dp = sub.add_parser("demo", help="run a preset end to end")
    dp.add_argument("name", choices=sorted(PRESETS))
    common(dp)
    return p


def _apply_overrides(cfg, args):
    if args.out:
        cfg.out = args.out
    if args.grid_radial is not None:
        cfg.grid_radial = args.grid_radial
    if args.grid_angles is not None:
        cfg.grid_angles = args.grid_angles
    if args.k_range is not None:
        cfg.k_min, cfg.k_max = args.k_range
    cfg.validate()
    return cfg


def run(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    stderr = sys.stderr
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "demo":
            cfg = RunConfig.from_text(PRESETS[args.name])
            cfg.out = f"demo-{args.name}"
            if args.config:
                raise ConfigError("demo presets do not take --config")
        elif args.command == "certify" and args.source:
            cfg, built = load_construct(args.source)
        elif args.config:
            cfg = RunConfig.from_file(args.config)
        else:
            cfg = RunConfig.from_text("")
        cfg = _apply_overrides(cfg, args)
        out = Path(cfg.out)
        if not (args.command == "certify" and args.source):
            built = construct(cfg)
        if args.command == "construct":
            write_construct(cfg, built, out)
            print(f"wrote construction tables to {out}", file=stdout)
            return EXIT_OK
        if args.command == "profile":
            prof = profile(cfg, built)
            if prof is None:
                print("profile skipped: constant-one decay is the big-O mode", file=stdout)
                return EXIT_OK
            print(write_profile(prof, out), end="", file=stdout)
            return EXIT_OK
        report = certify(cfg, built)
        write_report(report, out)
        if args.command == "demo":
            write_construct(cfg, built, out)
            prof = profile(cfg, built)
            if prof is None:
                print("profile skipped: constant-one decay is the big-O mode", file=stdout)
            else:
                print(write_profile(prof, out), end="", file=stdout)
        print(report.to_text(), end="", file=stdout)
        return EXIT_OK if report.passed else EXIT_CERT
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except NumericalInstabilityError as exc:
        print(f"numerical instability: {exc}", file=stderr)
        return EXIT_NUMERIC
    except (ArgumentError, PreconditionError, ConstructionError, DomainError) as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except GrowthboundError as exc:
        print(f"error: {exc}", file=stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
