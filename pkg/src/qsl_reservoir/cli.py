"""Sweep the QSL bound over the coupling strength gamma0.

Writes one record per gamma0 with columns ``gamma0,regime,fidelity_end,x_tau,tau_qsl``.
Regimes: independent reservoirs are markovian for gamma0 <= lambda/2, a
common reservoir for gamma0 <= Gamma/4; a gamma0 exactly on the boundary
is labelled markovian.

Exit status: 0 on success, 1 on a configuration or I/O error, 2 when a
numerical invariant fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .common import DEFAULT_STEPS, CommonReservoirParams
from .independent import IndependentReservoirParams
from .qmath import InvariantViolation
from .qsl import BOUND_SLACK, evaluate_point
from .states import SQRT_HALF, EWLParams, Family

COLUMNS = ("gamma0", "regime", "fidelity_end", "x_tau", "tau_qsl")


class ConfigError(ValueError):
    def __init__(self, name: str, message: str):
        super().__init__(f"{name}: {message}")
        self.name = name


class SweepError(InvariantViolation):
    def __init__(self, gamma0: float, cause: Exception):
        super().__init__(f"sweep aborted at gamma0={gamma0!r}: {cause}")
        self.gamma0 = gamma0


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    count: int
    log: bool = True

    @classmethod
    def parse(cls, text: str) -> "Grid":
        parts = str(text).split(":")
        if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
            raise ConfigError("gamma0", f"expected start:stop:count[:log], got {text!r}")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError("gamma0", f"malformed grid {text!r}") from None
        return cls(start, stop, count, len(parts) == 4)

    def values(self) -> np.ndarray:
        if self.log:
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class RunConfig:
    setup: str = "independent"
    family: str = "psi1"
    r: float = 1.0
    alpha: float = SQRT_HALF
    theta: float = 0.0
    tau: float = 1.0
    lam: float = 50.0
    big_gamma: float = 50.0
    gamma0: Grid | None = None
    steps: int = DEFAULT_STEPS
    fock_n: int = 2
    output: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.gamma0 is None:
            object.__setattr__(self, "gamma0", default_grid(self.width))
        self.validate()

    @property
    def width(self) -> float:
        return self.lam if self.setup == "independent" else self.big_gamma

    def validate(self) -> None:
        choices = {"setup": ("independent", "common"), "family": tuple(f.value for f in Family), "format": ("csv", "json")}
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise ConfigError(name, f"must be one of {', '.join(allowed)}, got {getattr(self, name)!r}")
        for name in ("r", "alpha"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(name, f"out of [0,1]: {getattr(self, name)}")
        for name in ("tau", "lam", "big_gamma"):
            if not getattr(self, name) > 0:
                raise ConfigError(name, f"must be positive, got {getattr(self, name)}")
        g = self.gamma0
        if g.count < 2:
            raise ConfigError("gamma0", f"grid count must be >= 2, got {g.count}")
        if not 0 < g.start < g.stop:
            raise ConfigError("gamma0", f"need 0 < start < stop, got {g.start}:{g.stop}")
        if self.steps < 100:
            raise ConfigError("steps", f"must be >= 100, got {self.steps}")
        if self.fock_n < 2:
            raise ConfigError("fock_n", f"must be >= 2, got {self.fock_n}")

    def ewl(self) -> EWLParams:
        return EWLParams(Family(self.family), self.r, self.alpha, self.theta)

    def reservoir(self, gamma0: float):
        if self.setup == "independent":
            return IndependentReservoirParams(self.lam, gamma0)
        return CommonReservoirParams(self.big_gamma, gamma0, self.fock_n)


def default_grid(width: float) -> Grid:
    """50 log-spaced points, a decade either side of width/2.

    For a common reservoir (boundary width/4) this still straddles the
    boundary, and both topologies share one gamma0 axis.
    """
    return Grid(width / 20.0, 5.0 * width, 50, True)


@dataclass(frozen=True)
class SweepRecord:
    gamma0: float
    regime: str
    fidelity_end: float
    x_tau: float
    tau_qsl: float


def run_sweep(cfg: RunConfig) -> list[SweepRecord]:
    ewl = cfg.ewl()
    records = []
    for g0 in cfg.gamma0.values():
        g0 = float(g0)
        res = cfg.reservoir(g0)
        try:
            out = evaluate_point(cfg.setup, ewl, res, cfg.tau, cfg.steps)
        except (InvariantViolation, ValueError) as exc:
            raise SweepError(g0, exc) from exc
        if out.tau_qsl > cfg.tau + BOUND_SLACK:
            raise SweepError(g0, InvariantViolation(f"tau_QSL {out.tau_qsl!r} > tau {cfg.tau!r}"))
        records.append(SweepRecord(g0, res.regime, out.fidelity_end, out.x_tau, out.tau_qsl))
    return records


def format_records(records: list[SweepRecord], fmt: str) -> str:
    if not records:
        raise ValueError("no records to emit")
    if fmt == "json":
        return json.dumps([asdict(r) for r in records], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        w.writerow([f"{r.gamma0:.17g}", r.regime, f"{r.fidelity_end:.17g}", f"{r.x_tau:.17g}", f"{r.tau_qsl:.17g}"])
    return buf.getvalue()


def parse_records(text: str, fmt: str) -> list[SweepRecord]:
    if fmt == "json":
        rows = json.loads(text)
    else:
        rows = list(csv.DictReader(io.StringIO(text)))
    return [
        SweepRecord(float(r["gamma0"]), r["regime"], float(r["fidelity_end"]), float(r["x_tau"]), float(r["tau_qsl"]))
        for r in rows
    ]


def emit(records: list[SweepRecord], cfg: RunConfig) -> None:
    text = format_records(records, cfg.format)
    if cfg.output is None:
        sys.stdout.write(text)
        return
    try:
        Path(cfg.output).write_text(text)
    except OSError as exc:
        raise ConfigError("output", f"cannot write {cfg.output}: {exc.strerror}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qsl-sweep", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="JSON file with any of the options below (flags win)")
    p.add_argument("--setup", choices=("independent", "common"))
    p.add_argument("--family", choices=("psi1", "psi2"))
    p.add_argument("--r", type=float, help="purity parameter in [0, 1]")
    p.add_argument("--alpha", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--tau", type=float, help="actual driving time")
    p.add_argument("--lambda", dest="lam", type=float, help="independent-reservoir width")
    p.add_argument("--big-gamma", dest="big_gamma", type=float, help="common-reservoir width")
    p.add_argument("--gamma0", help="start:stop:count[:log]")
    p.add_argument("--steps", type=int)
    p.add_argument("--fock-n", dest="fock_n", type=int)
    p.add_argument("--output", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    return p


_FILE_KEYS = {f.name for f in fields(RunConfig)} | {"lambda"}
_TYPES = {"r": float, "alpha": float, "theta": float, "tau": float, "lam": float, "big_gamma": float, "steps": int, "fock_n": int}


def _coerce(name: str, value):
    if name == "gamma0":
        return Grid.parse(value) if isinstance(value, str) else Grid(**value)
    if name in _TYPES:
        try:
            return _TYPES[name](value)
        except (TypeError, ValueError):
            raise ConfigError(name, f"malformed value {value!r}") from None
    return value


def parse_config(argv: list[str] | None = None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    values: dict = {}
    path = args.pop("config")
    if path:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config", "top level must be an object")
        for key, value in raw.items():
            if key not in _FILE_KEYS:
                raise ConfigError(key, "unknown option in config file")
            name = "lam" if key == "lambda" else key
            values[name] = _coerce(name, value)
    for name, value in args.items():
        if value is not None:
            values[name] = _coerce(name, value)
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from None


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
        records = run_sweep(cfg)
        emit(records, cfg)
    except ConfigError as exc:
        print(f"qsl-sweep: config error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"qsl-sweep: numerical error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
