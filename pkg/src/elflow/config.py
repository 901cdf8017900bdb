"""Flat ``key = value`` run configuration files.

Example::

    dim = 2
    n = 64
    dt = 1e-3
    t_end = 1.0
    nu = 0.1
    eta1 = 5          # or alpha1 ... alpha6
    lambda = 1
    mode = full
    initial = random_smooth
    seed = 7
    amplitude = 0.015
    decay_rate = 1.0
    output_every = 1

Unknown keys are rejected so typos do not silently fall back to defaults.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

from . import doi_onsager
from .coefficients import LeslieCoefficients
from .errors import ConfigError
from .fields import GridSpec
from .solver import InitialData, SimConfig

_ALPHA_KEYS = tuple(f"alpha{i}" for i in range(1, 7))
_KNOWN = {
    "dim", "n", "dt", "t_end", "nu", "cutoff_K", "output_every", "mode", "initial",
    "amplitude", "wavevector", "seed", "decay_rate", "path", "renormalize_director",
    "sobolev_s", "es_variant", "eta1", "lambda", "quad_nodes", "snapshot_every",
    *_ALPHA_KEYS,
}
_REQUIRED = ("dt", "t_end", "nu")


@dataclass(frozen=True)
class RunOptions:
    """Settings that affect output only, not the simulated system."""

    snapshot_every: int = 0


def parse_kv(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _num(kv, key, default=None, conv=float):
    if key not in kv:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return conv(kv[key])
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {kv[key]!r}") from None


def _bool(kv, key, default=False):
    if key not in kv:
        return default
    v = kv[key].lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {kv[key]!r}")


def config_from_text(text: str, base_dir: str | None = None) -> tuple[SimConfig, RunOptions]:
    kv = parse_kv(text)
    unknown = sorted(set(kv) - _KNOWN)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    for key in _REQUIRED:
        if key not in kv:
            raise ConfigError(f"missing required key {key!r}")
    try:
        grid = GridSpec(_num(kv, "dim", 2, int), _num(kv, "n", 64, int))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    if any(k in kv for k in _ALPHA_KEYS):
        missing = [k for k in _ALPHA_KEYS if k not in kv]
        if missing:
            raise ConfigError(f"missing keys: {', '.join(missing)}")
        alpha = LeslieCoefficients(*(_num(kv, k) for k in _ALPHA_KEYS))
    elif "eta1" in kv or "lambda" in kv:
        try:
            params = doi_onsager.MaierSaupeParams(_num(kv, "eta1", doi_onsager.DEFAULT_ETA1),
                                                  _num(kv, "lambda", doi_onsager.DEFAULT_LAMBDA))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        alpha = doi_onsager.generate(params, _num(kv, "quad_nodes", doi_onsager.DEFAULT_NODES, int))
    else:
        raise ConfigError("give alpha1..alpha6 or eta1/lambda")

    path = kv.get("path")
    if path and base_dir and not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    wave = kv.get("wavevector", "1,0,0")
    try:
        wavevector = tuple(int(x) for x in wave.replace(" ", "").split(","))
    except ValueError:
        raise ConfigError(f"wavevector: cannot parse {wave!r}") from None
    try:
        initial = InitialData(
            kind=kv.get("initial", "taylor_green"),
            amplitude=_num(kv, "amplitude", 0.0),
            wavevector=wavevector,
            seed=_num(kv, "seed", 0, int),
            decay_rate=_num(kv, "decay_rate", 1.0),
            path=path,
        )
        cfg = SimConfig(
            grid=grid,
            dt=_num(kv, "dt"),
            t_end=_num(kv, "t_end"),
            nu=_num(kv, "nu"),
            alpha=alpha,
            cutoff_K=_num(kv, "cutoff_K", grid.default_cutoff),
            output_every=_num(kv, "output_every", 1, int),
            mode=kv.get("mode", "full"),
            initial=initial,
            renormalize_director=_bool(kv, "renormalize_director"),
            sobolev_s=_num(kv, "sobolev_s", 2, int),
            es_variant=kv.get("es_variant", "sec5"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg, RunOptions(snapshot_every=_num(kv, "snapshot_every", 0, int))


def load_config(path) -> tuple[SimConfig, RunOptions]:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return config_from_text(text, os.path.dirname(os.path.abspath(path)))


def config_to_text(cfg: SimConfig, options: RunOptions | None = None) -> str:
    """Resolved configuration in the same format; parses back to an equal config."""
    init = cfg.initial
    lines = [
        f"dim = {cfg.grid.dim}",
        f"n = {cfg.grid.n}",
        f"dt = {cfg.dt!r}",
        f"t_end = {cfg.t_end!r}",
        f"nu = {cfg.nu!r}",
        *(f"{k} = {v + 0.0!r}" for k, v in zip(_ALPHA_KEYS, cfg.alpha.as_tuple())),
        f"cutoff_K = {cfg.cutoff_K!r}",
        f"output_every = {cfg.output_every}",
        f"mode = {cfg.mode}",
        f"initial = {init.kind}",
        f"amplitude = {init.amplitude!r}",
        f"wavevector = {','.join(str(k) for k in init.wavevector)}",
        f"seed = {init.seed}",
        f"decay_rate = {init.decay_rate!r}",
        f"renormalize_director = {'true' if cfg.renormalize_director else 'false'}",
        f"sobolev_s = {cfg.sobolev_s}",
        f"es_variant = {cfg.es_variant}",
    ]
    if init.path:
        lines.append(f"path = {init.path}")
    if options is not None:
        lines.append(f"snapshot_every = {options.snapshot_every}")
    return "\n".join(lines) + "\n"
