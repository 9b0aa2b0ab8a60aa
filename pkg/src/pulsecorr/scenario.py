"""Scenario files, parameter sweeps and figure datasets.

A scenario is a flat INI-style file::

    [state]
    kind = tmsv
    q_abs = 2

    [channel_a]
    kind = abstract
    n2 = 0.5

    [channel_d]
    kind = ideal

    [sweep]
    variable = channel_a.n2
    min = 0
    max = 1
    points = 101

    [output]
    directory = out
    formats = csv, svg

Channels are ``ideal``, ``abstract`` (fixed overlap values) or ``device``
(a device response seen by a pulse, evaluated at its mid-frequency or by
full quadrature).
"""

import configparser
import csv
import io
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import correlation_measures as cm
from .device_response import DeviceResponse, LorentzParams
from .gaussian_state import SqueezingParameter, thermal_entropy
from .pulse_modes import (
    QUAD_TOL,
    OverlapSet,
    SpectralProfile,
    channel_overlaps,
    normalize,
)

OUT_DIR_ENV = "PULSECORR_OUT_DIR"
FIG3_ASSUMPTION = (
    "assumption: I_e_a_norm, I_e_d_norm = I_e / S_th(n_sq), "
    "normalized by their common lossless value"
)


class ConfigError(ValueError):
    """Invalid scenario file; ``field`` and ``line`` locate the problem."""

    def __init__(self, message, field=None, line=None):
        where = []
        if field:
            where.append(f"field {field!r}")
        if line:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.field = field
        self.line = line


class UnknownFieldError(ConfigError):
    pass


class MissingBlockError(ConfigError):
    pass


class MissingFieldError(ConfigError):
    pass


class FieldRangeError(ConfigError):
    pass


class SweepVariableError(ConfigError):
    pass


class MissingFileError(ConfigError):
    pass


class SweepPointError(RuntimeError):
    """A numeric failure at one sweep point."""

    def __init__(self, index, variable, value, cause):
        super().__init__(f"sweep point {index} ({variable} = {value!r}): {cause}")
        self.index = index
        self.value = value


@dataclass(frozen=True)
class StateSpec:
    kind: str
    q_abs: float = 0.0
    q_phase: float = 0.0
    lam: complex = 0j
    n: int = 1


@dataclass(frozen=True)
class ChannelSpec:
    kind: str
    ov: complex = None
    n2: float = None
    device: str = None
    device_params: tuple = ()
    device_csv: str = None
    phase_reference: str = "faces"
    branch: str = "transmitted"
    pulse: str = "narrowband"
    mid_freq: float = None
    bandwidth: float = None
    pulse_csv: str = None


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    min: float
    max: float
    points: int
    scale: str = "linear"

    def values(self):
        if self.points == 1:
            return np.array([self.min])
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.points)
        return np.linspace(self.min, self.max, self.points)


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "."
    formats: tuple = ("csv",)
    name: str = "scenario"
    normalize_indices: bool = False


@dataclass(frozen=True)
class ScenarioConfig:
    state: StateSpec
    channel_a: ChannelSpec
    channel_d: ChannelSpec
    sweep: SweepSpec
    output: OutputSpec
    echo: tuple = ()


_STATE_KEYS = {
    "tmsv": {"kind", "q_abs", "q_phase"},
    "pair_superposition": {"kind", "lambda_re", "lambda_im", "n"},
}
_CHANNEL_KEYS = {
    "ideal": {"kind"},
    "abstract": {"kind", "ov_re", "ov_im", "n2"},
    "device": {
        "kind", "device", "eps_s", "gamma_ratio", "thickness", "t_re", "t_im",
        "r_re", "r_im", "device_csv", "phase_reference", "branch", "pulse", "mid_freq", "bandwidth",
        "pulse_csv",
    },
}
_SWEEP_KEYS = {"variable", "min", "max", "points", "scale"}
_OUTPUT_KEYS = {"directory", "formats", "name", "normalize_indices"}
_BLOCKS = ("state", "channel_a", "channel_d", "sweep", "output")
_SWEEPABLE = {
    "state.q_abs", "state.q_phase", "state.lambda_abs",
    "channel_a.ov", "channel_a.n2", "channel_a.mid_freq",
    "channel_d.ov", "channel_d.n2", "channel_d.mid_freq",
}
_FORMATS = {"csv", "svg"}


class _Reader:
    """Typed access to one parsed block with line-aware errors."""

    def __init__(self, text, parser, block):
        self.text = text
        self.block = block
        self.section = parser[block]

    def line_of(self, key):
        in_block = False
        for no, line in enumerate(self.text.splitlines(), 1):
            stripped = line.strip()
            if stripped.startswith("["):
                in_block = stripped.lower() == f"[{self.block}]"
            elif in_block and re.match(rf"{re.escape(key)}\s*[=:]", stripped, re.I):
                return no
        return None

    def error(self, cls, key, message):
        return cls(message, field=f"{self.block}.{key}", line=self.line_of(key))

    def check_keys(self, allowed):
        for key in self.section:
            if key not in allowed:
                raise self.error(UnknownFieldError, key, f"unknown field in [{self.block}]")

    def has(self, key):
        return key in self.section

    def str(self, key, default=None, choices=None):
        if key not in self.section:
            if default is None:
                raise self.error(MissingFieldError, key, "required field is missing")
            return default
        value = self.section[key].strip()
        if choices and value not in choices:
            raise self.error(
                FieldRangeError, key, f"must be one of {sorted(choices)}, got {value!r}"
            )
        return value

    def float(self, key, default=None, lo=None, hi=None, lo_open=False):
        if key not in self.section:
            if default is None:
                raise self.error(MissingFieldError, key, "required field is missing")
            return default
        try:
            value = float(self.section[key])
        except ValueError:
            raise self.error(FieldRangeError, key, f"not a number: {self.section[key]!r}") from None
        if not math.isfinite(value):
            raise self.error(FieldRangeError, key, "must be finite")
        if lo is not None and (value < lo or (lo_open and value == lo)):
            op = ">" if lo_open else ">="
            raise self.error(FieldRangeError, key, f"must be {op} {lo}, got {value}")
        if hi is not None and value > hi:
            raise self.error(FieldRangeError, key, f"must be <= {hi}, got {value}")
        return value

    def int(self, key, default=None, lo=None):
        value = self.float(key, default, lo=lo)
        if value != int(value):
            raise self.error(FieldRangeError, key, f"must be an integer, got {value}")
        return int(value)


def _resolve(path, base_dir):
    p = Path(path)
    if not p.is_absolute() and base_dir is not None:
        p = Path(base_dir) / p
    return str(p)


def _parse_state(r):
    kind = r.str("kind", "tmsv", choices=_STATE_KEYS)
    r.check_keys(_STATE_KEYS[kind])
    if kind == "tmsv":
        return StateSpec(kind, q_abs=r.float("q_abs", 0.0, lo=0), q_phase=r.float("q_phase", 0.0))
    lam = complex(r.float("lambda_re", 0.0), r.float("lambda_im", 0.0))
    return StateSpec(kind, lam=lam, n=r.int("n", 1, lo=1))


def _parse_channel(r, base_dir):
    kind = r.str("kind", choices=_CHANNEL_KEYS)
    r.check_keys(_CHANNEL_KEYS[kind])
    if kind == "ideal":
        return ChannelSpec(kind)
    if kind == "abstract":
        ov = None
        if r.has("ov_re") or r.has("ov_im"):
            ov = complex(r.float("ov_re", 0.0), r.float("ov_im", 0.0))
            if abs(ov) > 1:
                raise r.error(FieldRangeError, "ov_re", f"|ov| = {abs(ov)} exceeds 1")
        n2 = r.float("n2", lo=0, hi=1) if r.has("n2") else None
        if ov is not None and n2 is not None and abs(ov) ** 2 > n2 + 1e-12:
            raise r.error(FieldRangeError, "n2", "must be >= |ov|^2")
        return ChannelSpec(kind, ov=ov, n2=n2)

    device = r.str("device", choices={"lorentz_slab", "flat", "tabulated"})
    params = ()
    device_csv = None
    phase_reference = "faces"
    if device == "lorentz_slab":
        params = (
            r.float("eps_s", lo=1),
            r.float("gamma_ratio", lo=0),
            r.float("thickness", lo=0),
        )
        phase_reference = r.str("phase_reference", "faces", choices={"faces", "vacuum"})
    elif r.has("phase_reference"):
        raise r.error(UnknownFieldError, "phase_reference", "only valid for lorentz_slab devices")
    elif device == "flat":
        t = complex(r.float("t_re"), r.float("t_im", 0.0))
        rr = complex(r.float("r_re", 0.0), r.float("r_im", 0.0))
        if abs(t) ** 2 + abs(rr) ** 2 > 1 + 1e-12:
            raise r.error(FieldRangeError, "t_re", "flat response violates |t|^2 + |r|^2 <= 1")
        params = (t, rr)
    else:
        device_csv = _resolve(r.str("device_csv"), base_dir)
        if not os.path.isfile(device_csv):
            raise r.error(MissingFileError, "device_csv", f"file not found: {device_csv}")
    branch = r.str("branch", "transmitted", choices={"transmitted", "reflected"})
    pulse = r.str("pulse", "narrowband", choices={"narrowband", "gaussian", "tabulated"})
    mid_freq = bandwidth = pulse_csv = None
    if pulse in ("narrowband", "gaussian"):
        mid_freq = r.float("mid_freq", lo=0, lo_open=True)
    if pulse == "gaussian":
        bandwidth = r.float("bandwidth", lo=0, lo_open=True)
    if pulse == "tabulated":
        pulse_csv = _resolve(r.str("pulse_csv"), base_dir)
        if not os.path.isfile(pulse_csv):
            raise r.error(MissingFileError, "pulse_csv", f"file not found: {pulse_csv}")
    return ChannelSpec(
        kind, device=device, device_params=params, device_csv=device_csv,
        phase_reference=phase_reference, branch=branch,
        pulse=pulse, mid_freq=mid_freq, bandwidth=bandwidth, pulse_csv=pulse_csv,
    )


def _parse_sweep(r, state, channels):
    r.check_keys(_SWEEP_KEYS)
    variable = r.str("variable")
    names = [v for v in re.split(r"[,\s]+", variable) if v]
    if len(names) != 1:
        raise r.error(SweepVariableError, "variable", "exactly one sweep variable is allowed")
    variable = names[0]
    if variable not in _SWEEPABLE:
        raise r.error(SweepVariableError, "variable", f"cannot sweep {variable!r}")
    block, attr = variable.split(".")
    if block == "state":
        wanted = "tmsv" if attr.startswith("q_") else "pair_superposition"
        if state.kind != wanted:
            raise r.error(SweepVariableError, "variable", f"{variable} needs a {wanted} state")
    else:
        ch = channels[block]
        ok = ch.kind == "abstract" if attr in ("ov", "n2") else (
            ch.kind == "device" and ch.pulse != "tabulated"
        )
        if not ok:
            raise r.error(SweepVariableError, "variable", f"{variable} is not a parameter of [{block}]")
    scale = r.str("scale", "linear", choices={"linear", "log"})
    lo, hi = r.float("min"), r.float("max")
    if hi < lo:
        raise r.error(FieldRangeError, "max", f"max ({hi}) < min ({lo})")
    if scale == "log" and lo <= 0:
        raise r.error(FieldRangeError, "min", "log sweep needs min > 0")
    bounds = {
        "n2": (0, 1), "ov": (-1, 1), "q_abs": (0, None), "lambda_abs": (0, None),
        "mid_freq": (0, None),
    }.get(attr)
    if bounds:
        if lo < bounds[0] or (attr == "mid_freq" and lo <= 0):
            raise r.error(FieldRangeError, "min", f"{variable} must stay above {bounds[0]}")
        if bounds[1] is not None and hi > bounds[1]:
            raise r.error(FieldRangeError, "max", f"{variable} must stay below {bounds[1]}")
    points = r.int("points", lo=1)
    return SweepSpec(variable, lo, hi, points, scale)


def _parse_output(r):
    r.check_keys(_OUTPUT_KEYS)
    formats = tuple(f.strip() for f in r.str("formats", "csv").split(",") if f.strip())
    for f in formats:
        if f not in _FORMATS:
            raise r.error(FieldRangeError, "formats", f"unknown format {f!r}")
    norm = r.str("normalize_indices", "false", choices={"true", "false"}) == "true"
    name = r.str("name", "scenario")
    if not re.fullmatch(r"[\w.\-]+", name):
        raise r.error(FieldRangeError, "name", f"not a valid file stem: {name!r}")
    return OutputSpec(r.str("directory", "."), formats, name, norm)


def parse_config(text, base_dir=None):
    """Parse and validate scenario text.

    Raises:
        ConfigError: a subclass naming the offending field and its line.
    """
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), default_section="__none__"
    )
    try:
        parser.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate field {exc.option!r}", field=exc.option, line=exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate block [{exc.section}]", line=exc.lineno) from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed scenario text: {exc.message.splitlines()[0]}") from None
    for block in parser.sections():
        if block not in _BLOCKS:
            raise UnknownFieldError(f"unknown block [{block}]", field=block)
    for block in ("state", "channel_a", "channel_d", "sweep"):
        if block not in parser:
            raise MissingBlockError(f"missing block [{block}]", field=block)
    if "output" not in parser:
        parser.add_section("output")

    def reader(block):
        return _Reader(text, parser, block)

    state = _parse_state(reader("state"))
    channels = {
        "channel_a": _parse_channel(reader("channel_a"), base_dir),
        "channel_d": _parse_channel(reader("channel_d"), base_dir),
    }
    sweep = _parse_sweep(reader("sweep"), state, channels)
    output = _parse_output(reader("output"))
    echo = tuple(
        f"[{block}] " + ", ".join(f"{k} = {parser[block][k].strip()}" for k in parser[block])
        for block in _BLOCKS
        if block in parser and block != "output"
    )
    return ScenarioConfig(state, channels["channel_a"], channels["channel_d"], sweep, output, echo)


def load_config(path):
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)


def _device(ch):
    if ch.device == "lorentz_slab":
        return DeviceResponse.lorentz_slab(LorentzParams(*ch.device_params), ch.phase_reference)
    if ch.device == "flat":
        return DeviceResponse.flat(*ch.device_params)
    return DeviceResponse.from_csv(ch.device_csv)


def _channel_overlaps(ch, block, variable, value):
    """``(ov, n2)`` of one channel at one sweep value."""
    swept = variable.split(".")[1] if variable.startswith(block + ".") else None
    if ch.kind == "ideal":
        return 1 + 0j, 1.0
    if ch.kind == "abstract":
        ov, n2 = ch.ov, ch.n2
        if swept == "ov":
            ov = complex(value)
        elif swept == "n2":
            n2 = float(value)
        # unspecified quantities default to a frequency-independent channel
        if ov is None and n2 is None:
            ov, n2 = 1 + 0j, 1.0
        elif ov is None:
            ov = complex(math.sqrt(n2))
        elif n2 is None:
            n2 = abs(ov) ** 2
        return ov, n2
    response = _device(ch).branch(ch.branch)
    mid = float(value) if swept == "mid_freq" else ch.mid_freq
    if ch.pulse == "narrowband":
        t = complex(response(mid))
        return t, abs(t) ** 2
    if ch.pulse == "gaussian":
        profile = normalize(SpectralProfile.gaussian(mid, ch.bandwidth))
    else:
        profile = normalize(SpectralProfile.from_csv(ch.pulse_csv))
    return channel_overlaps(profile, response)


def evaluate_point(config, value):
    """Report for one sweep value."""
    var = config.sweep.variable
    ov_a, n2_a = _channel_overlaps(config.channel_a, "channel_a", var, value)
    ov_d, n2_d = _channel_overlaps(config.channel_d, "channel_d", var, value)
    ov = OverlapSet(ov_a, min(n2_a, 1.0), ov_d, min(n2_d, 1.0))
    st = config.state
    if st.kind == "tmsv":
        q_abs = float(value) if var == "state.q_abs" else st.q_abs
        q_phase = float(value) if var == "state.q_phase" else st.q_phase
        return cm.build_report(ov, SqueezingParameter(q_abs, q_phase))
    lam = st.lam
    if var == "state.lambda_abs":
        lam = float(value) * (np.exp(1j * np.angle(lam)) if lam else 1.0)
    pair = cm.PairSuperpositionState(lam, st.n)
    nan = float("nan")
    return cm.CorrelationReport(
        ov=ov, q_abs=nan, F_e=cm.fidelity_pair_superposition(ov, pair),
        S_a=nan, S_d=nan, S_ad=nan, I_c=nan, I_e_a=nan, I_e_d=nan,
        n_a=nan, n_d=nan, n_ad=nan, n_sq=cm.entanglement_pair_superposition(pair)[1],
        separable=None, witness=nan, oracle_gap=nan,
    )


@dataclass
class FigureDataset:
    name: str
    header: list
    columns: tuple
    rows: list = field(default_factory=list)

    def column(self, name):
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows], dtype=float)

    def to_csv(self):
        buf = io.StringIO()
        for line in self.header:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(v) for v in row])
        return buf.getvalue()


def format_value(v):
    """12 significant digits, locale-free; booleans as true/false."""
    if v is None:
        return "na"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    x = float(v) + 0.0
    if math.isnan(x):
        return "nan"
    return format(x, ".12g")


def read_csv(text):
    """Split emitted CSV text into ``(header_lines, columns, rows)`` of strings."""
    lines = text.splitlines()
    header = [ln[2:] for ln in lines if ln.startswith("# ")]
    body = [ln for ln in lines if not ln.startswith("#")]
    reader = csv.reader(body)
    columns = tuple(next(reader))
    return header, columns, [tuple(r) for r in reader]


def run_scenario(config, threads=1):
    """Evaluate every sweep point; rows keep sweep order."""
    values = config.sweep.values()
    var = config.sweep.variable

    def point(item):
        i, v = item
        try:
            return evaluate_point(config, v)
        except (ArithmeticError, ValueError) as exc:
            raise SweepPointError(i, var, float(v), exc) from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(point, enumerate(values)))
    else:
        reports = [point(item) for item in enumerate(values)]

    columns = (var,) + cm.CorrelationReport.CSV_COLUMNS
    norm = config.output.normalize_indices
    if norm:
        columns += ("I_e_a_norm", "I_e_d_norm")
    header = [
        f"pulsecorr {__version__}",
        f"scenario: {config.output.name}",
        *config.echo,
        f"quadrature_tol = {QUAD_TOL:g}; simon_tol = 1e-10; entropy units = nats",
        "F_e = Tr(rho_in rho_out)",
    ]
    if norm:
        header.append(FIG3_ASSUMPTION)
    rows = []
    for v, rep in zip(values, reports):
        row = (float(v),) + rep.csv_values()
        if norm:
            s0 = thermal_entropy(rep.n_sq) if rep.n_sq > 0 else float("nan")
            row += (rep.I_e_a / s0, rep.I_e_d / s0)
        rows.append(row)
    return FigureDataset(config.output.name, header, columns, rows)


def _svg_plot(dataset, ycols):
    x = dataset.column(dataset.columns[0])
    series = [(c, dataset.column(c)) for c in ycols if c in dataset.columns]
    series = [(c, y) for c, y in series if np.all(np.isfinite(y))]
    W, H, M = 640, 400, 50
    ys = np.concatenate([y for _, y in series]) if series else np.array([0.0, 1.0])
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(ys.min()), float(ys.max())
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1
    sx = lambda v: M + (v - x0) / (x1 - x0) * (W - 2 * M)  # noqa: E731
    sy = lambda v: H - M - (v - y0) / (y1 - y0) * (H - 2 * M)  # noqa: E731
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="{M}" y="{M}" width="{W - 2 * M}" height="{H - 2 * M}" fill="none" stroke="black"/>',
        f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle" font-size="12">{dataset.columns[0]}</text>',
        f'<text x="{M}" y="{M - 8}" font-size="11">{y1:.4g}</text>',
        f'<text x="{M}" y="{H - M + 14}" font-size="11">{y0:.4g}</text>',
        f'<text x="{W - M}" y="{H - M + 14}" text-anchor="end" font-size="11">{x1:.4g}</text>',
    ]
    for k, (name, y) in enumerate(series):
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        col = colors[k % len(colors)]
        out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{W - M + 4}" y="{M + 14 * (k + 1)}" font-size="11" fill="{col}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


SVG_COLUMNS = ("F_e", "S_ad", "I_c", "I_e_a", "I_e_d", "I_e_a_norm", "I_e_d_norm")


def emit_figures(dataset, directory, formats=("csv",)):
    """Write the dataset as ``<name>.csv`` (always) and ``<name>.svg``."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        path = directory / f"{dataset.name}.csv"
        path.write_text(dataset.to_csv())
        paths.append(path)
        if "svg" in formats:
            path = directory / f"{dataset.name}.svg"
            path.write_text(_svg_plot(dataset, SVG_COLUMNS))
            paths.append(path)
    except OSError as exc:
        raise OSError(f"cannot write figures to {directory}: {exc}") from exc
    return paths
