"""Command-line front end.

Subcommands: response | link | network | sweep | selftest.
Exit codes: 0 success, 2 configuration/usage error, 3 solver error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import replace

from . import acceptance
from .config import ConfigError, RunConfig, load_config, parse_grid
from .core import cas_response, cqi_response
from .protocol import NodeResponse, ghz_chain, identical_links, link_entangle
from .sweeps import ROW_FIELDS, SOLVER_ERRORS, iter_sweep, node_response, optimize_detuning

RESPONSE_FIELDS = ("scheme", "delta", "re_f_s", "im_f_s", "re_f_g", "im_f_g", "abs_f_s", "abs_f_g")
LINK_FIELDS = ("scheme", "delta", "n_th", "fidelity", "success_prob", "figure_of_merit", "nu", "error")
NETWORK_FIELDS = ("scheme", "n_nodes", "n_th", "ghz_fidelity", "total_success", "figure_of_merit", "zeta", "error")


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return "%.12g" % (value + 0.0)  # folds -0.0 into 0
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return format_value(value)
    if isinstance(value, float):
        return float("%.12g" % (value + 0.0))
    return value


def _csv_cell(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


class TableWriter:
    """Order-preserving, locale-free row emitter."""

    def __init__(self, stream, columns, fmt="csv"):
        self.stream = stream
        self.columns = tuple(columns)
        self.fmt = fmt
        self._started = False

    def write(self, row: dict):
        if self.fmt == "csv" and not self._started:
            self.stream.write(",".join(self.columns) + "\n")
        self._started = True
        if self.fmt == "csv":
            line = ",".join(_csv_cell(format_value(row.get(c))) for c in self.columns)
        else:
            line = json.dumps({c: _json_value(row.get(c)) for c in self.columns}, separators=(",", ":"))
        self.stream.write(line + "\n")
        self.stream.flush()


def _common(parser):
    parser.add_argument("--config", metavar="PATH")
    parser.add_argument("--out", metavar="PATH")
    parser.add_argument("--format", choices=("csv", "jsonl"))


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="cqinet", description="Cooperative vs cascaded quantum interface models.")
    sub = parser.add_subparsers(dest="command", parser_class=ArgumentParser)
    sub.required = True

    p = sub.add_parser("response", help="scattering amplitudes on a detuning grid")
    _common(p)
    p.add_argument("--scheme", choices=("cqi", "cas", "both"), default="both")
    p.add_argument("--delta", default="0", help="comma list or lin:lo:hi:n")
    p.add_argument("--nth", type=float)

    p = sub.add_parser("link", help="two-node entanglement fidelity and success")
    _common(p)
    p.add_argument("--scheme", choices=("cqi", "cas", "both"), default="both")
    p.add_argument("--nth", type=float)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--optimize-detuning", action="store_true")
    p.add_argument("--ideal", action="store_true", help="use f_s=1, f_g=-1, no noise")

    p = sub.add_parser("network", help="GHZ chain over N nodes")
    _common(p)
    p.add_argument("--scheme", choices=("cqi", "cas", "both"), default="both")
    p.add_argument("--nodes", type=int, default=4)
    p.add_argument("--nth", type=float)
    p.add_argument("--optimize-detuning", action="store_true")
    p.add_argument("--ideal", action="store_true")

    p = sub.add_parser("sweep", help="parameter sweep from the [sweep] config block")
    _common(p)
    p.add_argument("--scheme", choices=("cqi", "cas", "both"))
    p.add_argument("--nth", type=float)
    p.add_argument("--optimize-detuning", action="store_true")
    p.add_argument("--nodes", type=int, help="single N for a scaling sweep")

    p = sub.add_parser("selftest", help="run the acceptance suite")
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--quick", action="store_true", help="closed-form subset only")
    return parser


def _settings(args) -> RunConfig:
    cfg = load_config(args.config)
    nth = getattr(args, "nth", None)
    if nth is not None:
        if not (math.isfinite(nth) and nth >= 0):
            raise ConfigError("--nth must be finite and >= 0")
        dev = cfg.device.with_(n_th=nth)
        cfg = replace(cfg, device=dev, sweep=replace(cfg.sweep, params=dev))
    return cfg


def _open_out(args, cfg: RunConfig):
    path = getattr(args, "out", None) or cfg.output.path
    fmt = getattr(args, "format", None) or cfg.output.format
    if path == "-":
        return sys.stdout, fmt, False
    try:
        return open(path, "w", encoding="utf-8", newline=""), fmt, True
    except OSError as exc:
        raise ConfigError(f"cannot open output: {exc}") from None


def _schemes(choice):
    return ("cqi", "cas") if choice == "both" else (choice,)


def cmd_response(args, cfg, out):
    grid = parse_grid(args.delta)
    if not grid:
        raise ConfigError("empty detuning grid")
    if not all(math.isfinite(d) for d in grid):
        raise ConfigError("detunings must be finite")
    responder = {"cqi": cqi_response, "cas": cas_response}
    for scheme in _schemes(args.scheme):
        for delta in grid:
            f_s = responder[scheme](cfg.device, delta, False)
            f_g = responder[scheme](cfg.device, delta, True)
            out.write(
                {
                    "scheme": scheme,
                    "delta": delta,
                    "re_f_s": f_s.real,
                    "im_f_s": f_s.imag,
                    "re_f_g": f_g.real,
                    "im_f_g": f_g.imag,
                    "abs_f_s": abs(f_s),
                    "abs_f_g": abs(f_g),
                }
            )


def _nodes(args, cfg):
    """Yield (scheme, delta, NodeResponse)."""
    for scheme in _schemes(args.scheme):
        if args.ideal:
            yield scheme, 0.0, NodeResponse.ideal()
            continue
        delta = getattr(args, "delta", 0.0)
        if scheme == "cqi" and args.optimize_detuning:
            delta, _ = optimize_detuning(cfg.device, None, "cqi", cfg.fock, cfg.protocol)
        yield scheme, delta, node_response(cfg.device, delta, scheme, cfg.fock, cfg.protocol)


def cmd_link(args, cfg, out):
    for scheme, delta, node in _nodes(args, cfg):
        link = link_entangle(node, node)
        out.write(
            {
                "scheme": scheme,
                "delta": delta,
                "n_th": cfg.device.n_th,
                "fidelity": link.fidelity,
                "success_prob": link.success_prob,
                "figure_of_merit": link.figure_of_merit,
                "nu": node.nu,
            }
        )


def cmd_network(args, cfg, out):
    n = args.nodes
    if n < 2 or n % 2:
        raise ConfigError("--nodes must be an even integer >= 2")
    results = {}
    for scheme, _, node in _nodes(args, cfg):
        results[scheme] = ghz_chain(identical_links(node, n), n)
    for scheme, res in results.items():
        z = None
        if len(results) == 2 and scheme == "cqi" and results["cas"].figure_of_merit > 0:
            z = res.figure_of_merit / results["cas"].figure_of_merit
        out.write(
            {
                "scheme": scheme,
                "n_nodes": n,
                "n_th": cfg.device.n_th,
                "ghz_fidelity": res.ghz_fidelity,
                "total_success": res.total_success,
                "figure_of_merit": res.figure_of_merit,
                "zeta": z,
            }
        )


def cmd_sweep(args, cfg, out):
    spec = cfg.sweep
    if args.scheme:
        spec = replace(spec, scheme=args.scheme)
    if args.optimize_detuning:
        spec = replace(spec, optimize_detuning=True)
    if args.nodes is not None:
        if args.nodes < 2 or args.nodes % 2:
            raise ConfigError("--nodes must be an even integer >= 2")
        spec = replace(spec, variable="N", grid=(float(args.nodes),))
    if spec.variable == "N" and any(n < 2 or int(n) != n or int(n) % 2 for n in spec.grid):
        raise ConfigError("N grid must hold even integers >= 2")
    count = errors = 0
    for row in iter_sweep(spec):
        count += 1
        errors += row.error is not None
        out.write(row.as_dict())
    out.write({"value": "summary", "error": f"rows={count} errors={errors}"})
    return 3 if errors else 0


def cmd_selftest(args, cfg):
    def progress(res):
        print(f"criterion {res.number}: {res.elapsed:.2f} s", file=sys.stderr)

    results = acceptance.run_all(quick=args.quick, progress=progress)
    for res in results:
        for line in res.lines():
            print(line)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    sys.stdout.flush()
    return 0 if passed == len(results) else 1


COMMANDS = {
    "response": (cmd_response, RESPONSE_FIELDS),
    "link": (cmd_link, LINK_FIELDS),
    "network": (cmd_network, NETWORK_FIELDS),
    "sweep": (cmd_sweep, ROW_FIELDS),
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _settings(args)
        if args.command == "selftest":
            return cmd_selftest(args, cfg)
        func, columns = COMMANDS[args.command]
        stream, fmt, owned = _open_out(args, cfg)
    except (UsageError, ConfigError, ValueError) as exc:
        print(f"cqinet: error: {exc}", file=sys.stderr)
        return 2
    start = time.perf_counter()
    try:
        code = func(args, cfg, TableWriter(stream, columns, fmt)) or 0
    except (ConfigError, UsageError) as exc:
        print(f"cqinet: error: {exc}", file=sys.stderr)
        code = 2
    except SOLVER_ERRORS as exc:
        print(f"cqinet: solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = 3
    finally:
        if owned:
            stream.close()
    print(f"cqinet: {args.command} finished in {time.perf_counter() - start:.2f} s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
