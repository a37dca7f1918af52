"""Experiment configuration documents and the built-in presets.

A configuration is a JSON object with the blocks ``model``, ``integrator``,
``sweep``, ``scan`` and ``output``.  Parsing is strict: unknown keys raise
:class:`~adiabatic_lab.errors.ConfigurationError`.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .integrate import IntegratorConfig
from .models import ModelSpec

TWO_PI = 2 * math.pi

_INTEGRATOR_KEYS = {"rtol", "atol", "h_init", "h_min", "max_steps", "renorm", "fixed_step", "n_samples"}
_SWEEP_KEYS = {"epsilon", "epsilons", "noise_floor", "threshold"}
_SCAN_KEYS = {"start", "stop", "num", "spacing"}
_OUTPUT_KEYS = {"dir"}
_TOP_KEYS = {"model", "integrator", "sweep", "scan", "output"}


def _strict(block, allowed, name):
    if not isinstance(block, dict):
        raise ConfigurationError(f"{name} block must be an object")
    unknown = set(block) - allowed
    if unknown:
        raise ConfigurationError(f"unknown {name} keys: {sorted(unknown)}")


@dataclass
class SweepBlock:
    epsilon: float | None = None
    epsilons: list | None = None
    noise_floor: float = 1e-10
    threshold: float = 0.9

    def __post_init__(self):
        if self.epsilon is not None and not self.epsilon > 0:
            raise ConfigurationError("sweep.epsilon must be positive")
        if self.epsilons is not None:
            self.epsilons = [float(e) for e in self.epsilons]
            if not self.epsilons or min(self.epsilons) <= 0:
                raise ConfigurationError("sweep.epsilons must be a non-empty positive list")


@dataclass
class ScanBlock:
    start: float = 1e-3
    stop: float = 1.0
    num: int = 40
    spacing: str = "log"

    def __post_init__(self):
        if self.spacing not in ("log", "linear"):
            raise ConfigurationError("scan.spacing must be 'log' or 'linear'")
        if self.num < 2:
            raise ConfigurationError("scan.num must be >= 2")
        if self.spacing == "log" and (self.start <= 0 or self.stop <= 0):
            raise ConfigurationError("log-spaced scans need positive bounds")

    def grid(self):
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.num)
        return np.linspace(self.start, self.stop, self.num)


@dataclass
class ExperimentConfig:
    model: ModelSpec = field(default_factory=ModelSpec)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    n_samples: int = 4096
    sweep: SweepBlock = field(default_factory=SweepBlock)
    scan: ScanBlock = field(default_factory=ScanBlock)
    output_dir: str = "out"

    @classmethod
    def from_dict(cls, doc):
        _strict(doc, _TOP_KEYS, "top-level")
        try:
            model = ModelSpec.from_dict(doc.get("model", {}))
            integ = dict(doc.get("integrator", {}))
            _strict(integ, _INTEGRATOR_KEYS, "integrator")
            n_samples = int(integ.pop("n_samples", 4096))
            if n_samples < 2:
                raise ConfigurationError("n_samples must be >= 2")
            integrator = IntegratorConfig(**integ)
            sw = doc.get("sweep", {})
            _strict(sw, _SWEEP_KEYS, "sweep")
            sc = doc.get("scan", {})
            _strict(sc, _SCAN_KEYS, "scan")
            out = doc.get("output", {})
            _strict(out, _OUTPUT_KEYS, "output")
            return cls(model, integrator, n_samples, SweepBlock(**sw), ScanBlock(**sc), out.get("dir", "out"))
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from None

    def to_dict(self):
        integ = self.integrator.to_dict()
        integ["n_samples"] = self.n_samples
        sweep = {"noise_floor": self.sweep.noise_floor, "threshold": self.sweep.threshold}
        if self.sweep.epsilon is not None:
            sweep["epsilon"] = self.sweep.epsilon
        if self.sweep.epsilons is not None:
            sweep["epsilons"] = list(self.sweep.epsilons)
        return {
            "model": self.model.to_dict(),
            "integrator": integ,
            "sweep": sweep,
            "scan": dict(self.scan.__dict__),
            "output": {"dir": self.output_dir},
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def load(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
    return ExperimentConfig.from_dict(doc)


def _model(**kw):
    base = {
        "variant": "SpinRotating",
        "theta": math.pi / 4,
        "omega0": 1.0,
        "f": {"kind": "Linear"},
        "schedule": {"kind": "LinearTime", "omega": 0.05},
        "sign_flip": False,
        "r_range": [-TWO_PI, TWO_PI],
    }
    base.update(kw)
    return base


_LINEAR_GRID = [float(x) for x in np.geomspace(1e-1, 1e-3, 10)]


def _rate_matched(sigma_t):
    r1 = TWO_PI
    rates = np.geomspace(1e-1, 1e-3, 8)
    return [float(x) for x in (rates / (sigma_t * r1 ** ((sigma_t - 1) / sigma_t))) ** sigma_t]


# sigma_t < 1 runs cost ~ eps**-2 steps (the interval grows as eps**(-1/sigma_t)),
# and the rate is unbounded at t = 0, so this grid stops at eps = 0.01
_SUBLINEAR_GRID = [float(x) for x in np.geomspace(1e-1, 1e-2, 5)]

PRESETS = {
    "fig3a": {
        "description": "regular connection, f(R) = R: fidelity oscillates with amplitude ~ eps^2",
        "config": {"model": _model(), "sweep": {"epsilon": 0.05, "epsilons": _LINEAR_GRID}},
    },
    "fig3b": {
        "description": "removable singularity, f(R) = |R|^(1/2): fidelity dips at R = 0",
        "config": {
            "model": _model(f={"kind": "Power", "sigma": 0.5}),
            "sweep": {"epsilon": 0.05, "epsilons": _LINEAR_GRID},
        },
    },
    "fig4a": {
        "description": "removable singularity sweep, f(R) = |R|^(1/2): 1 - F_min ~ eps^1",
        "config": {
            "model": _model(f={"kind": "Power", "sigma": 0.5}),
            "sweep": {"epsilon": 0.01, "epsilons": _LINEAR_GRID},
        },
    },
    "fig4b": {
        "description": "irremovable singularity sweep, f(R) = ln|R|: F_min plateaus below one",
        "config": {
            "model": _model(f={"kind": "Log"}),
            "sweep": {"epsilon": 0.01, "epsilons": _LINEAR_GRID},
        },
    },
    "fig5": {
        "description": "nonlinear schedule R = eps sign(t)|t|^2: 1 - F_min ~ eps^(2/2)",
        "config": {
            "model": _model(schedule={"kind": "NonlinearTime", "epsilon": 0.01, "sigma_t": 2.0}),
            "sweep": {"epsilon": 1e-4, "epsilons": _rate_matched(2.0)},
        },
    },
    "fig5-sigma3": {
        "description": "nonlinear schedule with sigma_t = 3: 1 - F_min ~ eps^(2/3)",
        "config": {
            "model": _model(schedule={"kind": "NonlinearTime", "epsilon": 0.01, "sigma_t": 3.0}),
            "sweep": {"epsilon": 1e-6, "epsilons": _rate_matched(3.0)},
        },
    },
    "fig5-sigma0.5": {
        "description": "nonlinear schedule with sigma_t = 1/2: 1 - F_min ~ eps^2",
        "config": {
            "model": _model(schedule={"kind": "NonlinearTime", "epsilon": 0.01, "sigma_t": 0.5}),
            "sweep": {"epsilon": 0.01, "epsilons": _SUBLINEAR_GRID},
        },
    },
    "counterexample": {
        "description": "counterexample Hamiltonian: F_min stays away from one",
        "config": {
            "model": _model(variant="CounterExample"),
            "sweep": {"epsilon": 0.01, "epsilons": [0.1, 0.03, 0.01]},
            "scan": {"start": -TWO_PI, "stop": TWO_PI, "num": 41, "spacing": "linear"},
        },
    },
    "counterexample-flipped": {
        "description": "sign-flipped counterexample: F_min converges to one",
        "config": {
            "model": _model(variant="CounterExample", sign_flip=True),
            "sweep": {"epsilon": 0.01, "epsilons": [0.1, 0.03, 0.01]},
            "scan": {"start": -TWO_PI, "stop": TWO_PI, "num": 41, "spacing": "linear"},
        },
    },
}


def preset(name):
    try:
        doc = PRESETS[name]["config"]
    except KeyError:
        raise ConfigurationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return ExperimentConfig.from_dict(copy.deepcopy(doc))
