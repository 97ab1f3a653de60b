"""Declarative experiment configuration (YAML).

Example::

    name: cone_gauss_n1
    T: [256, 512, 1024]
    reps: 50
    base_seed: 20240601
    outputs: out/cone_gauss_n1
    audit: false
    trace: none            # full | none | {thin: <stride>}
    env:
      n: 1
      reward: {kind: cone, L: 1.0, r0: 1.0}
      noise: {kind: gaussian, sigma: 0.25}
      inputs: {kind: gaussian_iso, scale: 1.0}
    agent:
      kind: abstention     # or always_commit, always_abstain, commit_first, oracle
      L: 1.0
      sigma: 0.25
      c: 0.5
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .agents import AGENT_KINDS, AgentSpec
from .environments import EnvSpec, validate_env

_FLOAT_PARAMS = ("L", "sigma", "c", "w", "m", "c_m")
_AGENT_KEYS = set(_FLOAT_PARAMS) | {"kind", "schedule", "j"}
_TOP_KEYS = {"name", "env", "agent", "T", "reps", "base_seed", "outputs", "audit", "trace", "workers"}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    env: EnvSpec
    agent: AgentSpec
    T: int | list[int]
    reps: int = 1
    base_seed: int = 0
    outputs: str = "out"
    audit: bool = False
    trace: str | int = "none"
    workers: int = 1
    source: str | None = field(default=None, compare=False)

    @property
    def horizons(self) -> list[int]:
        return sorted(self.T) if isinstance(self.T, list) else [self.T]

    def to_dict(self) -> dict[str, Any]:
        agent = {"kind": self.agent.kind, **dict(self.agent.params)}
        trace: Any = self.trace if isinstance(self.trace, str) else {"thin": self.trace}
        return {
            "name": self.name,
            "T": list(self.T) if isinstance(self.T, list) else self.T,
            "reps": self.reps,
            "base_seed": self.base_seed,
            "outputs": self.outputs,
            "audit": self.audit,
            "trace": trace,
            "workers": self.workers,
            "env": self.env.to_dict(),
            "agent": agent,
        }

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


def _line_index(node, prefix=()) -> dict[tuple, int]:
    out = {prefix: node.start_mark.line + 1}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            out.update(_line_index(v, prefix + (k.value,)))
    return out


def _where(source, lines, path) -> str:
    p = tuple(path)
    while p not in lines and p:
        p = p[:-1]
    loc = f"{source}:{lines[p]}" if source and p in lines else (source or "<config>")
    return f"{loc}: {'.'.join(path) or '<root>'}"


def parse_config(data: dict, source: str | None = None, lines: dict | None = None) -> ExperimentConfig:
    lines = lines or {}

    def fail(path, msg):
        raise ConfigError(f"{_where(source, lines, path)}: {msg}")

    def need(d, key, path):
        if not isinstance(d, dict) or key not in d or d[key] is None:
            fail(path + [key], "missing required field")
        return d[key]

    if not isinstance(data, dict):
        fail([], "config must be a mapping")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        fail([sorted(unknown)[0]], "unknown field")

    name = str(need(data, "name", []))
    T = need(data, "T", [])
    if isinstance(T, list):
        if not T or not all(isinstance(t, int) and t >= 1 for t in T):
            fail(["T"], "horizons must be positive integers")
        T = sorted(T)
    elif not isinstance(T, int) or T < 1:
        fail(["T"], "horizon must be a positive integer")

    env_d = need(data, "env", [])
    for key in ("reward", "inputs"):
        need(env_d, key, ["env"])
    rw = env_d["reward"]
    if not isinstance(rw, dict) or "kind" not in rw:
        fail(["env", "reward", "kind"], "missing required field")
    if rw["kind"] in ("cone", "radial_profile"):
        need(rw, "L", ["env", "reward"])
    try:
        env = EnvSpec.from_dict(env_d)
    except (KeyError, TypeError, ValueError) as exc:
        fail(["env"], f"invalid environment: {exc}")
    report = validate_env(env)
    if not report.ok:
        fail(["env"], "; ".join(report.violations))

    ag = need(data, "agent", [])
    kind = need(ag, "kind", ["agent"])
    if kind not in AGENT_KINDS:
        fail(["agent", "kind"], f"unknown agent kind {kind!r}")
    unknown = set(ag) - _AGENT_KEYS
    if unknown:
        fail(["agent", sorted(unknown)[0]], "unknown field")
    if kind == "abstention":
        need(ag, "L", ["agent"])
    params = {}
    for k, v in ag.items():
        if k == "kind" or v is None:
            continue
        if k in _FLOAT_PARAMS:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                fail(["agent", k], "must be a number")
            v = float(v)
        elif k == "j":
            v = int(v)
        params[k] = v
    agent = AgentSpec.of(kind, **params)
    if kind == "abstention":
        try:
            for t in T if isinstance(T, list) else [T]:
                agent.agent_config(env, t)
        except ValueError as exc:
            fail(["agent"], str(exc))

    trace = data.get("trace", "none")
    if isinstance(trace, dict):
        stride = trace.get("thin")
        if not isinstance(stride, int) or stride < 1:
            fail(["trace", "thin"], "thinning stride must be a positive integer")
        trace = stride
    elif trace not in ("full", "none"):
        fail(["trace"], "must be full, none or {thin: stride}")

    reps = data.get("reps", 1)
    if not isinstance(reps, int) or reps < 1:
        fail(["reps"], "must be a positive integer")
    seed = data.get("base_seed", 0)
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        fail(["base_seed"], "must be an unsigned 64-bit integer")

    return ExperimentConfig(
        name=name,
        env=env,
        agent=agent,
        T=T,
        reps=reps,
        base_seed=seed,
        outputs=str(data.get("outputs", "out")),
        audit=bool(data.get("audit", False)),
        trace=trace,
        workers=int(data.get("workers", 1)),
        source=source,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: malformed YAML: {exc}") from exc
    lines = _line_index(node) if node is not None else {}
    return parse_config(data, source=str(path), lines=lines)


def loads_config(text: str, source: str | None = None) -> ExperimentConfig:
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source or '<config>'}: malformed YAML: {exc}") from exc
    return parse_config(data, source=source, lines=_line_index(node) if node is not None else {})
