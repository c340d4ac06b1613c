"""Scenario configuration: JSON loading, defaults, validation, flag overrides."""

from __future__ import annotations

import copy
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import STANDARD_THRESHOLDS
from .core import BASIS_LABELS, SystemParams
from .ensemble import DEFAULT_NODES, DEFAULT_SIGMA_IRF

KINDS = ("lifetime", "hbt", "sweep", "fit", "oracle-check")

# gamma1 = gamma2 = 1 ns^-1 is a placeholder calibration, not a measured device value
PLACEHOLDER_GAMMA = 1.0
PUMP_FRACTION = 0.01  # default gamma_p as a fraction of min(gamma1, gamma2)

DEFAULT_PARAMS = {"gamma1": PLACEHOLDER_GAMMA, "gamma2": PLACEHOLDER_GAMMA, "gamma_d": 8.0, "beta": 0.8, "delta": 0.0, "gamma_nr": 0.0}

DEFAULT_TIME = {
    "lifetime": {"start": -2.0, "stop": 15.0, "step": 0.005},
    "hbt": {"start": 0.0, "stop": 10.0, "step": 0.01},
}
DEFAULT_SWEEP = {
    "lifetime": [0.0, 1.1, 2.2, 3.3],
    "hbt": [0.0, 1.1, 2.2, 3.3, 15.0],
    "sweep": [round(0.25 * k, 2) for k in range(25)],
}

_TOP_KEYS = {
    "kind", "params", "ensemble", "irf", "detector", "time", "hbt_time", "sweep", "gated",
    "initial_state", "thresholds", "datasets", "fit", "output", "workers", "seed", "oracle",
}
_SECTION_KEYS = {
    "params": {"gamma1", "gamma2", "gamma_d", "gamma_p", "beta", "delta", "gamma_nr"},
    "ensemble": {"sigma_ueV", "nodes"},
    "irf": {"sigma_ns"},
    "detector": {"sigma_ns"},
    "time": {"start", "stop", "step"},
    "hbt_time": {"start", "stop", "step"},
    "fit": {"init", "max_iter", "xatol", "fatol"},
    "output": {"dir", "format"},
    "oracle": {"random_sets", "seed"},
}


class ConfigError(ValueError):
    """Invalid scenario; ``line`` points into the config file when known."""

    def __init__(self, message, source=None, line=None):
        where = ""
        if source is not None:
            where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.source = source
        self.line = line


@dataclass(frozen=True)
class TimeGrid:
    start: float
    stop: float
    step: float

    def points(self):
        import numpy as np

        n = int(round((self.stop - self.start) / self.step))
        # rounding keeps grid points such as t = 0 exact
        return np.round(self.start + self.step * np.arange(n + 1), 12)


@dataclass
class Scenario:
    kind: str
    params: SystemParams
    sigma_ueV: float = 1.3
    nodes: int = DEFAULT_NODES
    sigma_irf: float = DEFAULT_SIGMA_IRF
    detector_sigma: float = DEFAULT_SIGMA_IRF
    time: TimeGrid | None = None
    hbt_time: TimeGrid | None = None
    sweep: list = field(default_factory=list)
    gated: str = "both"  # "both", "gated" or "ungated"
    initial_state: str = "e1g2"
    thresholds: tuple = STANDARD_THRESHOLDS
    datasets: list = field(default_factory=list)
    fit: dict = field(default_factory=dict)
    out_dir: str = "out"
    fmt: str = "csv"
    workers: int = 1
    seed: int | None = None
    oracle: dict = field(default_factory=dict)
    placeholder_gamma: bool = True
    source: str | None = None

    @property
    def detunings(self) -> list:
        return list(self.sweep) if self.sweep else [self.params.delta]

    def resolved(self) -> dict:
        """Every setting that influences numerical output (paths excluded)."""
        doc = {
            "kind": self.kind,
            "params": self.params.as_dict(),
            "ensemble": {"sigma_ueV": self.sigma_ueV, "nodes": self.nodes},
            "irf": {"sigma_ns": self.sigma_irf},
            "detector": {"sigma_ns": self.detector_sigma},
            "sweep": list(self.sweep),
            "gated": self.gated,
            "initial_state": self.initial_state,
            "thresholds": list(self.thresholds),
            "format": self.fmt,
            "seed": self.seed,
            "gamma_calibration": "placeholder" if self.placeholder_gamma else "user",
        }
        if self.time is not None:
            doc["time"] = vars(self.time).copy()
        if self.hbt_time is not None:
            doc["hbt_time"] = vars(self.hbt_time).copy()
        if self.kind == "fit":
            doc["fit"] = dict(self.fit)
            doc["datasets"] = [dict(d) for d in self.datasets]
        if self.kind == "oracle-check":
            doc["oracle"] = dict(self.oracle)
        return doc


def _key_line(text: str | None, key: str):
    if not text:
        return None
    pattern = re.compile(r'"' + re.escape(key) + r'"\s*:')
    for i, line in enumerate(text.splitlines(), start=1):
        if pattern.search(line):
            return i
    return None


class _Validator:
    def __init__(self, text, source):
        self.text = text
        self.source = source

    def fail(self, key, message):
        raise ConfigError(message, self.source, _key_line(self.text, key))

    def number(self, section: dict, key: str, default=None, minimum=None, positive=False):
        if key not in section:
            if default is None:
                self.fail(key, f"missing required key {key!r}")
            return float(default)
        value = section[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self.fail(key, f"{key!r} must be a finite number, got {value!r}")
        value = float(value)
        if positive and value <= 0:
            self.fail(key, f"{key!r} must be > 0, got {value!r}")
        if minimum is not None and value < minimum:
            self.fail(key, f"{key!r} must be >= {minimum}, got {value!r}")
        return value

    def section(self, doc: dict, name: str) -> dict:
        value = doc.get(name, {})
        if not isinstance(value, dict):
            self.fail(name, f"{name!r} must be an object")
        allowed = _SECTION_KEYS.get(name)
        if allowed is not None:
            for key in value:
                if key not in allowed:
                    self.fail(key, f"unknown key {key!r} in {name!r} (allowed: {', '.join(sorted(allowed))})")
        return value

    def grid(self, doc: dict, name: str, default: dict) -> TimeGrid:
        sec = self.section(doc, name)
        start = self.number(sec, "start", default["start"])
        stop = self.number(sec, "stop", default["stop"])
        step = self.number(sec, "step", default["step"])
        if step <= 0:
            self.fail("step", f"time step must be > 0, got {step!r}")
        if stop <= start:
            self.fail("stop", f"time grid needs stop > start, got start={start!r}, stop={stop!r}")
        n = (stop - start) / step
        if abs(n - round(n)) > 1e-6:
            self.fail("step", "stop - start must be a whole number of steps")
        return TimeGrid(start, stop, step)


def load_config_text(path) -> str:
    try:
        return Path(path).read_text()
    except FileNotFoundError:
        raise
    except UnicodeDecodeError as exc:
        raise ConfigError(f"not valid UTF-8 text ({exc.reason})", str(path)) from None


def parse_config(text: str | None, source: str | None = None, kind: str | None = None, overrides: dict | None = None) -> Scenario:
    """Build a validated :class:`Scenario` from JSON text (or defaults when ``text`` is None).

    ``kind`` is the subcommand; it must agree with any ``kind`` in the file.
    ``overrides`` carries command-line flags and wins over file values.
    """
    doc = {}
    if text is not None:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", source, exc.lineno) from None
        if not isinstance(doc, dict):
            raise ConfigError("top level must be a JSON object", source, 1)
    v = _Validator(text, source)
    for key in doc:
        if key not in _TOP_KEYS:
            v.fail(key, f"unknown key {key!r}")
    doc = copy.deepcopy(doc)
    overrides = overrides or {}

    file_kind = doc.get("kind")
    if file_kind is not None and file_kind not in KINDS:
        v.fail("kind", f"kind must be one of {', '.join(KINDS)}, got {file_kind!r}")
    if kind is not None and file_kind is not None and file_kind != kind:
        v.fail("kind", f"config is for {file_kind!r} but the command is {kind!r}")
    kind = kind or file_kind
    if kind is None:
        raise ConfigError("scenario kind not given", source)

    p = v.section(doc, "params")
    placeholder = "gamma1" not in p and "gamma2" not in p
    values = {key: v.number(p, key, DEFAULT_PARAMS[key], minimum=0.0 if key not in ("delta",) else None) for key in DEFAULT_PARAMS}
    if values["beta"] > 1:
        v.fail("beta", f"'beta' must lie in [0, 1], got {values['beta']!r}")
    if "delta" in overrides:
        values["delta"] = float(overrides["delta"])

    if "gamma_p" in p:
        values["gamma_p"] = v.number(p, "gamma_p", minimum=0.0)
    elif kind in ("hbt", "sweep", "fit"):
        values["gamma_p"] = PUMP_FRACTION * min(values["gamma1"], values["gamma2"])
    else:
        values["gamma_p"] = 0.0
    if kind == "lifetime" and values["gamma_p"] > 0:
        v.fail("gamma_p", "lifetime scenarios describe pulsed decay and forbid gamma_p > 0")
    if kind in ("hbt", "fit") and values["gamma_p"] <= 0:
        v.fail("gamma_p", f"{kind} scenarios need a pumped steady state, gamma_p > 0")
    try:
        params = SystemParams(**values)
    except ValueError as exc:
        raise ConfigError(str(exc), source) from None

    ens = v.section(doc, "ensemble")
    sigma_ueV = v.number(ens, "sigma_ueV", 1.3, minimum=0.0)
    nodes = ens.get("nodes", DEFAULT_NODES)
    if "nodes" in overrides:
        nodes = overrides["nodes"]
    if isinstance(nodes, bool) or not isinstance(nodes, int) or nodes < 1 or nodes % 2 == 0:
        v.fail("nodes", f"'nodes' must be a positive odd integer, got {nodes!r}")

    sigma_irf = v.number(v.section(doc, "irf"), "sigma_ns", DEFAULT_SIGMA_IRF, minimum=0.0)
    detector_sigma = v.number(v.section(doc, "detector"), "sigma_ns", DEFAULT_SIGMA_IRF, minimum=0.0)

    time = hbt_time = None
    if kind in ("lifetime", "sweep"):
        time = v.grid(doc, "time", DEFAULT_TIME["lifetime"])
    if kind in ("hbt", "sweep"):
        hbt_time = v.grid(doc, "hbt_time" if kind == "sweep" else "time", DEFAULT_TIME["hbt"])
        if hbt_time.start != 0:
            v.fail("start", "HBT delay grid must start at tau = 0")
    elif "hbt_time" in doc:
        v.fail("hbt_time", "'hbt_time' only applies to sweep scenarios")
    for grid in (time, hbt_time):
        if grid is None:
            continue
        if kind in ("lifetime", "sweep") and grid is time and sigma_irf > 0 and grid.step > sigma_irf / 2:
            v.fail("step", f"time step {grid.step:g} ns under-resolves the IRF width {sigma_irf:g} ns (need <= sigma/2)")
        if grid is hbt_time and detector_sigma > 0 and grid.step > detector_sigma / 2:
            v.fail("step", f"delay step {grid.step:g} ns under-resolves the detector jitter {detector_sigma:g} ns")

    sweep = doc.get("sweep", DEFAULT_SWEEP.get(kind, []))
    if not isinstance(sweep, list) or any(isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x) for x in sweep):
        v.fail("sweep", "'sweep' must be a list of finite detunings (ueV)")
    sweep = [float(x) for x in sweep]
    if "delta" in overrides:
        sweep = []

    gated = doc.get("gated", "both")
    if isinstance(gated, bool):
        gated = "gated" if gated else "ungated"
    if gated not in ("both", "gated", "ungated"):
        v.fail("gated", f"'gated' must be true, false or \"both\", got {gated!r}")
    if "gated" in overrides:
        gated = "gated" if overrides["gated"] else "ungated"

    state = doc.get("initial_state", "e1g2")
    if state not in BASIS_LABELS or state == "g1g2":
        v.fail("initial_state", f"'initial_state' must be one of e1g2, g1e2, e1e2, got {state!r}")

    thresholds = doc.get("thresholds", list(STANDARD_THRESHOLDS))
    if not isinstance(thresholds, list) or len(thresholds) != 3 or any(
        isinstance(x, bool) or not isinstance(x, (int, float)) or not 0 < x < 1 for x in thresholds
    ):
        v.fail("thresholds", "'thresholds' must be three fractions in (0, 1)")

    datasets = doc.get("datasets", [])
    if not isinstance(datasets, list):
        v.fail("datasets", "'datasets' must be a list")
    cleaned = []
    for entry in datasets:
        if isinstance(entry, str):
            entry = {"path": entry}
        if not isinstance(entry, dict) or not isinstance(entry.get("path"), str):
            v.fail("datasets", "each dataset needs a string 'path'")
        extra = set(entry) - {"path", "delta"}
        if extra:
            v.fail(sorted(extra)[0], f"unknown dataset key {sorted(extra)[0]!r}")
        if "delta" in entry:
            v.number(entry, "delta")
        cleaned.append(dict(entry))
    for path in overrides.get("datasets", []):
        cleaned.append({"path": str(path)})

    fit = v.section(doc, "fit")
    init = fit.get("init", [5.0, 1.0])
    if not isinstance(init, list) or len(init) != 2 or any(isinstance(x, bool) or not isinstance(x, (int, float)) or x < 0 for x in init):
        v.fail("init", "'init' must be [gamma_d, sigma] with non-negative entries")
    max_iter = fit.get("max_iter", 400)
    if isinstance(max_iter, bool) or not isinstance(max_iter, int) or max_iter < 1:
        v.fail("max_iter", "'max_iter' must be a positive integer")
    fit_opts = {
        "init": [float(x) for x in init],
        "max_iter": max_iter,
        "xatol": v.number(fit, "xatol", 1e-5, positive=True),
        "fatol": v.number(fit, "fatol", 1e-10, positive=True),
    }

    out = v.section(doc, "output")
    out_dir = out.get("dir", "out")
    fmt = overrides.get("format") or out.get("format", "csv")
    if fmt not in ("csv", "json"):
        v.fail("format", f"output format must be csv or json, got {fmt!r}")
    if "out" in overrides:
        out_dir = overrides["out"]
    if not isinstance(out_dir, str):
        v.fail("dir", "'dir' must be a string path")

    workers = doc.get("workers", 1)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        v.fail("workers", "'workers' must be a positive integer")
    seed = overrides.get("seed", doc.get("seed"))
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        v.fail("seed", "'seed' must be an integer")

    orc = v.section(doc, "oracle")
    random_sets = orc.get("random_sets", 5)
    if isinstance(random_sets, bool) or not isinstance(random_sets, int) or random_sets < 0:
        v.fail("random_sets", "'random_sets' must be a non-negative integer")
    oracle_seed = orc.get("seed", 2024)
    if isinstance(oracle_seed, bool) or not isinstance(oracle_seed, int):
        v.fail("seed", "oracle 'seed' must be an integer")

    return Scenario(
        kind=kind,
        params=params,
        sigma_ueV=sigma_ueV,
        nodes=nodes,
        sigma_irf=sigma_irf,
        detector_sigma=detector_sigma,
        time=time,
        hbt_time=hbt_time,
        sweep=sweep,
        gated=gated,
        initial_state=state,
        thresholds=tuple(float(x) for x in thresholds),
        datasets=cleaned,
        fit=fit_opts,
        out_dir=out_dir,
        fmt=fmt,
        workers=workers,
        seed=seed,
        oracle={"random_sets": random_sets, "seed": oracle_seed},
        placeholder_gamma=placeholder,
        source=source,
    )


def load_scenario(path=None, kind=None, overrides=None) -> Scenario:
    if path is None:
        return parse_config(None, None, kind, overrides)
    return parse_config(load_config_text(path), str(path), kind, overrides)
