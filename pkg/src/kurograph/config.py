"""Run configuration: an INI file with [kernel], [freq], [engine] and [run] sections.

Example::

    [kernel]
    kind = small_world
    p = 0.1
    r = 0.25

    [freq]
    kind = standard_normal

    [engine]
    n = 2048
    T = 200

    [run]
    seed = 7

All problems in a file are collected and reported together.
"""

from __future__ import annotations

import configparser
import io
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from . import freqdist, graphon
from .errors import ConfigError

KERNEL_KINDS = ("constant", "small_world", "cosine", "circulant", "grid")
FREQ_KINDS = ("standard_normal", "normal")
CLOSURES = ("truncate", "ott-antonsen")


def _float_list(text: str) -> List[float]:
    return [float(v) for v in text.replace(",", " ").split()]


# key -> (parser, default); a default of None marks an optional key
SCHEMA: Dict[str, Dict[str, tuple]] = {
    "kernel": {
        "kind": (str, None),
        "p": (float, None),
        "r": (float, None),
        "m": (int, 1),
        "coeffs": (_float_list, None),
        "grid_file": (str, None),
    },
    "freq": {
        "kind": (str, "standard_normal"),
        "sigma": (float, 1.0),
        "quad_nodes": (int, 40),
    },
    "engine": {
        "n": (int, 2048),
        "dt": (float, 0.01),
        "T": (float, 200.0),
        "stride": (int, 10),
        "J": (int, 8),
        "M": (int, 40),
        "x_nodes": (int, 64),
        "mf_dt": (float, 0.05),
        "T_max": (float, 3000.0),
        "tol": (float, 1e-6),
        "contour_shift": (float, 1.0),
        "closure": (str, "truncate"),
    },
    "run": {
        "seed": (int, 0),
        "out_dir": (str, "."),
    },
}


@dataclass
class RunConfig:
    kernel: Dict[str, Any]
    freq: Dict[str, Any]
    engine: Dict[str, Any]
    seed: int
    out_dir: str
    base_dir: Path = field(default=Path("."), compare=False)

    def echo(self) -> str:
        """Canonical INI text of the resolved configuration."""
        cp = configparser.ConfigParser()
        cp.optionxform = str
        for section, values in (("kernel", self.kernel), ("freq", self.freq), ("engine", self.engine)):
            cp[section] = {k: _fmt(v) for k, v in values.items() if v is not None}
        cp["run"] = {"seed": str(self.seed), "out_dir": self.out_dir}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue().strip() + "\n"

    def rng(self, label: str) -> np.random.Generator:
        return stream(self.seed, label)

    def build_kernel(self) -> graphon.GraphonKernel:
        return build_kernel(self.kernel, self.base_dir)

    def build_model(self) -> freqdist.FrequencyModel:
        return build_model(self.freq)


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return ", ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def stream(seed: int, label: str) -> np.random.Generator:
    """Independent generator for one component, derived from the global seed and a fixed label."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(label.encode())]))


def parse_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError([f"config file not found: {path}"])
    return parse_config_text(path.read_text(), base_dir=path.parent)


def parse_config_text(text: str, base_dir: Path = Path("."), strict: bool = True) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    errors: List[str] = []
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}".replace("\n", " ")]) from exc

    values: Dict[str, Dict[str, Any]] = {}
    for section in cp.sections():
        if section not in SCHEMA and strict:
            errors.append(f"unknown section [{section}]")
    for section, keys in SCHEMA.items():
        got = cp[section] if cp.has_section(section) else {}
        out = {}
        for key in got:
            if key not in keys and strict:
                errors.append(f"{section}.{key}: unknown key")
        for key, (parse, default) in keys.items():
            if key in got:
                try:
                    out[key] = parse(got[key])
                except ValueError:
                    errors.append(f"{section}.{key}: cannot parse {got[key]!r} as {parse.__name__.lstrip('_')}")
            else:
                out[key] = default
        values[section] = out

    _check(values, base_dir, errors)
    if errors:
        raise ConfigError(errors)
    run = values["run"]
    return RunConfig(values["kernel"], values["freq"], values["engine"],
                     int(run["seed"]), run["out_dir"], Path(base_dir))


def _check(v, base_dir, errors):
    k, f, e, r = v["kernel"], v["freq"], v["engine"], v["run"]
    kind = k.get("kind")
    if kind is None:
        errors.append("kernel.kind: missing required key")
    elif kind not in KERNEL_KINDS:
        errors.append(f"kernel.kind: {kind!r} not one of {', '.join(KERNEL_KINDS)}")
    p, rr = k.get("p"), k.get("r")
    if kind in ("constant", "small_world") and p is None:
        errors.append(f"kernel.p: required for kind {kind}")
    lo = -1.0 if kind == "constant" else 0.0
    if p is not None and not lo <= p <= 1.0:
        errors.append(f"kernel.p: {p} outside [{lo:g}, 1]")
    if kind == "small_world":
        if rr is None:
            errors.append("kernel.r: required for kind small_world")
        elif not 0.0 <= rr <= 0.5:
            errors.append(f"kernel.r: {rr} outside [0, 0.5]")
    if kind == "cosine" and isinstance(k.get("m"), int) and k["m"] < 1:
        errors.append("kernel.m: must be >= 1")
    if kind == "circulant" and not k.get("coeffs"):
        errors.append("kernel.coeffs: required for kind circulant")
    if kind == "grid":
        gf = k.get("grid_file")
        if gf is None:
            errors.append("kernel.grid_file: required for kind grid")
        elif not (Path(base_dir) / gf).is_file():
            errors.append(f"kernel.grid_file: file not found: {gf}")

    if f.get("kind") not in FREQ_KINDS:
        errors.append(f"freq.kind: {f.get('kind')!r} not one of {', '.join(FREQ_KINDS)}")
    if isinstance(f.get("sigma"), float) and f["sigma"] <= 0:
        errors.append("freq.sigma: must be positive")
    for key in ("n", "stride", "M", "x_nodes", "quad_nodes"):
        sec = f if key == "quad_nodes" else e
        if isinstance(sec.get(key), int) and sec[key] < 1:
            errors.append(f"{'freq' if sec is f else 'engine'}.{key}: must be >= 1")
    if isinstance(e.get("J"), int) and e["J"] < 2:
        errors.append("engine.J: must be >= 2")
    for key in ("dt", "T", "mf_dt", "T_max", "tol"):
        if isinstance(e.get(key), float) and e[key] <= 0:
            errors.append(f"engine.{key}: must be positive")
    if isinstance(e.get("contour_shift"), float) and e["contour_shift"] < 0:
        errors.append("engine.contour_shift: must be >= 0")
    if e.get("closure") not in CLOSURES:
        errors.append(f"engine.closure: {e.get('closure')!r} not one of {', '.join(CLOSURES)}")
    seed = r.get("seed")
    if isinstance(seed, int) and not 0 <= seed < 2 ** 64:
        errors.append("run.seed: must be a 64-bit unsigned integer")


def build_kernel(section: Dict[str, Any], base_dir: Path = Path(".")) -> graphon.GraphonKernel:
    kind = section["kind"]
    if kind == "constant":
        return graphon.constant(section["p"])
    if kind == "small_world":
        return graphon.small_world(section["p"], section["r"])
    if kind == "cosine":
        return graphon.cosine(section.get("m") or 1)
    if kind == "circulant":
        return graphon.circulant(coeffs=section["coeffs"])
    if kind == "grid":
        return graphon.load_grid_csv(Path(base_dir) / section["grid_file"])
    raise ConfigError([f"kernel.kind: {kind!r} not supported"])


def build_model(section: Dict[str, Any]) -> freqdist.FrequencyModel:
    if section["kind"] == "standard_normal":
        return freqdist.standard_normal()
    return freqdist.normal(section["sigma"])


def default_config(kernel: Optional[Dict[str, Any]] = None, **engine) -> RunConfig:
    """Config built in code (used by recipes when no file is given)."""
    lines = ["[kernel]"] + [f"{k} = {_fmt(v)}" for k, v in (kernel or {"kind": "constant", "p": 0.5}).items()]
    lines.append("[engine]")
    lines += [f"{k} = {_fmt(v)}" for k, v in engine.items()]
    return parse_config_text("\n".join(lines) + "\n")
