"""Command-line driver: evaluations, scans, and the verification suite.

Subcommands: eval | scan-uniform | scan-derivative | scaling-limit |
glue-residual | verify.  A JSON config file may supply any flag value;
explicit flags win, and the fully resolved configuration is echoed into
every report.  CSV output is UTF-8 with LF line endings and floats at 17
significant digits, so identical configs and seeds reproduce reports
byte for byte.  Invalid configurations exit 2 with a machine-readable
error object on stderr; numeric failures (truncation cap, stencil
margin) exit 1 with the partial report flagged.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .annulus import annulus_green, lmax_cap
from .ball import BallDomain, ball_green, boggio_kernel
from .errors import PolyGreenError, PreconditionError
from .exterior import exterior_green, exterior_kernel
from .geometry import AnnulusDomain, ProblemSpec
from .scans import CutoffSpec, glue_residual, scaling_limit, scan_derivative, scan_uniform
from .verify import run_verify

_CONFIG_EXIT = 2
_NUMERIC_EXIT = 1


@dataclasses.dataclass
class RunConfig:
    experiment: str
    n: int = 0
    k: int = 0
    domain: str = "annulus"
    a: float | None = None
    b: float | None = None
    eps: tuple = ()
    r: int = 1
    delta: float | None = None
    q: float = 0.5
    tol: float = 1e-10
    samples: int = 0
    seed: int = 7
    threads: int = 0
    x: tuple = ()
    y: tuple = ()
    out: str | None = None
    fmt: str = "csv"
    dump_pairs: bool = False
    lmax: int = 0

    def resolved(self) -> dict:
        d = dataclasses.asdict(self)
        d["eps"] = list(self.eps)
        d["x"] = list(self.x)
        d["y"] = list(self.y)
        return d


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _parse_floats(text: str) -> tuple:
    try:
        return tuple(float(p) for p in text.split(",") if p.strip() != "")
    except ValueError as exc:
        raise PreconditionError(f"cannot parse float list {text!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polygreen", description=__doc__)
    sub = parser.add_subparsers(dest="experiment", required=True)
    names = ("eval", "scan-uniform", "scan-derivative", "scaling-limit",
             "glue-residual", "verify")
    for name in names:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--k", type=int, default=None)
        p.add_argument("--domain", type=str, default=None,
                       choices=("annulus", "ball", "exterior"))
        p.add_argument("--a", type=float, default=None)
        p.add_argument("--b", type=float, default=None)
        p.add_argument("--eps", type=str, default=None)
        p.add_argument("--r", type=int, default=None)
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--q", type=float, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--x", type=str, default=None)
        p.add_argument("--y", type=str, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--format", dest="fmt", type=str, default=None,
                       choices=("csv", "json"))
        p.add_argument("--dump-pairs", dest="dump_pairs", action="store_true", default=None)
    return parser


_DEFAULTS = {
    "scan-uniform": {"samples": 160, "b": 1.0},
    "scan-derivative": {"samples": 120, "b": 1.0},
    "scaling-limit": {"b": 10.0},
    "glue-residual": {"samples": 150, "b": 1.0},
    "eval": {"b": 1.0, "fmt": "json"},
    "verify": {"fmt": "json"},
}


def build_config(args: argparse.Namespace) -> RunConfig:
    file_values = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_values = json.load(fh)
        if not isinstance(file_values, dict):
            raise PreconditionError("config file must hold a JSON object")

    cfg = RunConfig(experiment=args.experiment)
    defaults = _DEFAULTS.get(args.experiment, {})
    for name in ("n", "k", "domain", "a", "b", "r", "delta", "q", "tol", "samples",
                 "seed", "threads", "out", "fmt", "dump_pairs", "lmax"):
        flag = getattr(args, name, None)
        if flag is not None:
            value = flag
        elif name in file_values:
            value = file_values[name]
        elif name in defaults:
            value = defaults[name]
        else:
            value = getattr(cfg, name)
        setattr(cfg, name, value)
    for name in ("eps", "x", "y"):
        flag = getattr(args, name, None)
        if flag is not None:
            setattr(cfg, name, _parse_floats(flag))
        elif name in file_values:
            setattr(cfg, name, tuple(float(v) for v in file_values[name]))

    if cfg.threads == 0:
        cfg.threads = os.cpu_count() or 1
    if cfg.lmax == 0:
        cfg.lmax = lmax_cap()
    if cfg.experiment != "verify" and (cfg.n == 0 or cfg.k == 0):
        raise PreconditionError("--n and --k are required")
    if cfg.experiment == "verify" and (cfg.n == 0 or cfg.k == 0):
        raise PreconditionError("verify requires --n and --k")
    return cfg


def _write_text(path: str | None, text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_report(cfg: RunConfig, header, rows) -> str:
    lines = ["# config: " + json.dumps(cfg.resolved(), sort_keys=True, separators=(",", ":"))]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_report(cfg: RunConfig, payload: dict) -> str:
    return json.dumps({"config": cfg.resolved(), **payload}, indent=2, sort_keys=True) + "\n"


def _scan_rows(report) -> list:
    return [(float(e), float(s), report.sample_count, report.seed)
            for e, s in zip(report.epsilon_grid, report.statistic)]


def _pair_rows(report) -> list:
    rows = []
    for eps, pairs in zip(report.epsilon_grid, report.metadata.get("pairs", [])):
        for idx, (x, y, value) in enumerate(pairs):
            rows.append((float(eps), idx, float(value),
                         " ".join(_fmt(c) for c in x), " ".join(_fmt(c) for c in y)))
    return rows


def _emit_scan(cfg: RunConfig, report) -> None:
    if cfg.fmt == "json":
        payload = {
            "epsilon": list(report.epsilon_grid),
            "statistic": list(report.statistic),
            "samples": report.sample_count,
            "seed": report.seed,
            "metadata": {k: v for k, v in report.metadata.items() if k != "pairs"},
        }
        _write_text(cfg.out, _json_report(cfg, payload))
        return
    if cfg.dump_pairs:
        text = _csv_report(cfg, ("epsilon", "pair", "weighted_value", "x", "y"),
                           _pair_rows(report))
    else:
        text = _csv_report(cfg, ("epsilon", "statistic", "samples", "seed"),
                           _scan_rows(report))
    _write_text(cfg.out, text)


def _run_eval(cfg: RunConfig) -> int:
    spec = ProblemSpec(cfg.n, cfg.k)
    x = np.asarray(cfg.x, dtype=float)
    y = np.asarray(cfg.y, dtype=float)
    if x.size != spec.n or y.size != spec.n:
        raise PreconditionError("--x and --y must have exactly n coordinates")
    if cfg.domain == "annulus":
        if cfg.a is None or cfg.b is None:
            raise PreconditionError("annulus eval requires --a and --b")
        ev = annulus_green(x, y, AnnulusDomain(cfg.a, cfg.b), spec,
                           tol=cfg.tol, lmax=cfg.lmax)
        result = {"value": ev.value, "truncation_estimate": ev.truncation_estimate,
                  "modes_used": ev.modes_used}
        capped = ev.modes_used >= lmax_cap(cfg.lmax)
    elif cfg.domain == "ball":
        radius = cfg.b if cfg.b is not None else 1.0
        kernel = boggio_kernel(spec, BallDomain(center=(0.0,) * spec.n, radius=radius))
        result = {"value": ball_green(x, y, kernel), "truncation_estimate": 0.0,
                  "modes_used": 0}
        capped = False
    else:
        eps = cfg.eps[0] if cfg.eps else 1.0
        result = {"value": exterior_green(x, y, exterior_kernel(spec, eps)),
                  "truncation_estimate": 0.0, "modes_used": 0}
        capped = False
    _write_text(cfg.out, _json_report(cfg, result))
    if capped:
        sys.stderr.write(json.dumps({"error": {
            "type": "truncation-cap",
            "message": f"mode cap {lmax_cap(cfg.lmax)} reached before tolerance",
            "truncation_estimate": result["truncation_estimate"],
        }}) + "\n")
        return _NUMERIC_EXIT
    return 0


def _run_verify(cfg: RunConfig) -> int:
    spec = ProblemSpec(cfg.n, cfg.k)
    checks, ok = run_verify(spec, seed=cfg.seed)
    if cfg.fmt == "csv":
        rows = [(c.name, int(c.passed), c.detail) for c in checks]
        text = _csv_report(cfg, ("check", "passed", "detail"), rows)
        _write_text(cfg.out, text)
    else:
        payload = {"checks": [dataclasses.asdict(c) for c in checks], "passed": ok}
        _write_text(cfg.out, _json_report(cfg, payload))
    for c in checks:
        sys.stderr.write(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}\n")
    return 0 if ok else _NUMERIC_EXIT


def run(cfg: RunConfig) -> int:
    """Execute one resolved configuration; returns the process exit status."""
    if cfg.experiment == "eval":
        return _run_eval(cfg)
    if cfg.experiment == "verify":
        return _run_verify(cfg)

    spec = ProblemSpec(cfg.n, cfg.k)
    if not cfg.eps:
        raise PreconditionError(f"{cfg.experiment} requires --eps")
    if cfg.experiment == "scan-uniform":
        report = scan_uniform(spec, cfg.eps, b=cfg.b, samples=cfg.samples,
                              seed=cfg.seed, q=cfg.q, tol=cfg.tol,
                              threads=cfg.threads, collect_pairs=cfg.dump_pairs)
        _emit_scan(cfg, report)
        return 0
    if cfg.experiment == "scan-derivative":
        report = scan_derivative(spec, cfg.eps, cfg.r, b=cfg.b, samples=cfg.samples,
                                 seed=cfg.seed, q=cfg.q, tol=cfg.tol,
                                 threads=cfg.threads, collect_pairs=cfg.dump_pairs)
        _emit_scan(cfg, report)
        return 0
    if cfg.experiment == "scaling-limit":
        if not cfg.x or not cfg.y:
            raise PreconditionError("scaling-limit requires probe --x and --y")
        probes = [(np.asarray(cfg.x, dtype=float), np.asarray(cfg.y, dtype=float))]
        report = scaling_limit(spec, cfg.eps, probes, b=cfg.b, tol=cfg.tol,
                               threads=cfg.threads)
        _emit_scan(cfg, report)
        return 0
    if cfg.experiment == "glue-residual":
        if cfg.delta is None:
            raise PreconditionError("glue-residual requires --delta")
        cutoff = CutoffSpec(delta=cfg.delta, k=spec.k)
        rows = []
        for eps in sorted(cfg.eps, reverse=True):
            rep = glue_residual(spec, eps, cutoff, samples=cfg.samples, b=cfg.b,
                                seed=cfg.seed, threads=cfg.threads)
            rows.append((float(eps), rep.sup_residual, rep.samples, cfg.seed))
        if cfg.fmt == "json":
            payload = {"epsilon": [r[0] for r in rows],
                       "statistic": [r[1] for r in rows],
                       "delta": cfg.delta, "samples": cfg.samples, "seed": cfg.seed}
            _write_text(cfg.out, _json_report(cfg, payload))
        else:
            _write_text(cfg.out, _csv_report(cfg, ("epsilon", "statistic", "samples", "seed"), rows))
        return 0
    raise PreconditionError(f"unknown experiment {cfg.experiment!r}")


def _merge_negative_values(argv) -> list:
    """Join '--x -0.4,0,...' into '--x=-0.4,0,...' so argparse accepts it."""
    out = []
    i = 0
    argv = list(argv)
    while i < len(argv):
        tok = argv[i]
        if tok in ("--x", "--y", "--eps") and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(_merge_negative_values(argv))
    try:
        cfg = build_config(args)
        return run(cfg)
    except PolyGreenError as exc:
        sys.stderr.write(json.dumps({"error": {
            "type": type(exc).__name__, "message": str(exc)}}) + "\n")
        return _CONFIG_EXIT
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(json.dumps({"error": {
            "type": type(exc).__name__, "message": str(exc)}}) + "\n")
        return _CONFIG_EXIT


if __name__ == "__main__":
    sys.exit(main())
