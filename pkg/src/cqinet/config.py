"""Run configuration: sectioned ``key = value`` text.

Grammar (``configparser`` INI dialect, interpolation disabled)::

    [device]     any DeviceParams field, e.g. kappa_b_o = 0.1
    [fock]       dim_a, dim_b, include_qubit, cap
    [protocol]   window = auto | <float>, transmission = <float>
    [sweep]      variable, grid, scheme, optimize_detuning, n_th_list, workers
    [output]     path = - | <file>, format = csv | jsonl

``grid`` is a comma list or ``lin:lo:hi:n`` / ``log:lo:hi:n``.  Booleans
accept true/false/yes/no/1/0.  Unknown sections or keys are errors.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields

from .core import DeviceParams
from .lindblad import FockConfig
from .sweeps import KAPPA_B_GRID, ProtocolSettings, SweepSpec, linspace_grid, logspace_grid


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class OutputSettings:
    path: str = "-"
    format: str = "csv"

    def __post_init__(self):
        if self.format not in ("csv", "jsonl"):
            raise ConfigError(f"unknown output format {self.format!r}")


@dataclass(frozen=True)
class RunConfig:
    device: DeviceParams = DeviceParams()
    fock: FockConfig = FockConfig()
    protocol: ProtocolSettings = ProtocolSettings()
    sweep: SweepSpec = SweepSpec("kappa_b_o", KAPPA_B_GRID)
    output: OutputSettings = OutputSettings()


_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def _bool(text: str) -> bool:
    try:
        return _BOOL[text.strip().lower()]
    except KeyError:
        raise ConfigError(f"not a boolean: {text!r}") from None


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}") from None


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"not an integer: {text!r}") from None


def parse_grid(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    kind, _, rest = text.partition(":")
    if kind in ("lin", "log") and rest:
        parts = rest.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid spec needs lo:hi:n, got {text!r}")
        lo, hi, n = _float(parts[0]), _float(parts[1]), _int(parts[2])
        if n < 1:
            raise ConfigError("grid needs at least one point")
        return linspace_grid(lo, hi, n) if kind == "lin" else logspace_grid(lo, hi, n)
    return tuple(_float(x) for x in text.split(",") if x.strip())


def _section(parser, name, allowed):
    if not parser.has_section(name):
        return {}
    items = dict(parser.items(name))
    unknown = set(items) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {', '.join(sorted(unknown))}")
    return items


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    known = {"device", "fock", "protocol", "sweep", "output"}
    extra = set(parser.sections()) - known
    if extra:
        raise ConfigError(f"unknown sections: {', '.join(sorted(extra))}")

    try:
        dev_fields = {f.name: f for f in fields(DeviceParams)}
        dev = {}
        for key, value in _section(parser, "device", dev_fields).items():
            dev[key] = _bool(value) if key == "cqi_b_external_is_loss" else _float(value)
        device = DeviceParams(**dev)

        fk = _section(parser, "fock", ("dim_a", "dim_b", "include_qubit", "cap"))
        fock = FockConfig(
            dim_a=_int(fk.get("dim_a", "3")),
            dim_b=_int(fk.get("dim_b", "4")),
            include_qubit=_bool(fk.get("include_qubit", "true")),
            cap=_int(fk.get("cap", "512")),
        )

        pr = _section(parser, "protocol", ("window", "transmission"))
        window_text = pr.get("window", "auto").strip()
        protocol = ProtocolSettings(
            window=None if window_text == "auto" else _float(window_text),
            transmission=_float(pr.get("transmission", "1")),
        )
        if protocol.window is not None and protocol.window <= 0:
            raise ConfigError("window must be > 0")
        if not 0 <= protocol.transmission <= 1:
            raise ConfigError("transmission must lie in [0, 1]")

        sw = _section(
            parser,
            "sweep",
            ("variable", "grid", "scheme", "optimize_detuning", "n_th_list", "workers"),
        )
        sweep = SweepSpec(
            variable=sw.get("variable", "kappa_b_o").strip(),
            grid=parse_grid(sw["grid"]) if "grid" in sw else KAPPA_B_GRID,
            params=device,
            scheme=sw.get("scheme", "both").strip(),
            optimize_detuning=_bool(sw.get("optimize_detuning", "false")),
            fock=fock,
            protocol=protocol,
            n_th_list=parse_grid(sw.get("n_th_list", "0.1, 0.2, 0.5")),
            workers=_int(sw.get("workers", "1")),
        )

        out = _section(parser, "output", ("path", "format"))
        output = OutputSettings(out.get("path", "-").strip(), out.get("format", "csv").strip())
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(device, fock, protocol, sweep, output)


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)
