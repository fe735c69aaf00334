#!/usr/bin/env python3
"""
Configuration loader and validator for coalspec experiments
"""
import copy
import dataclasses
import yaml
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple
from dotenv import load_dotenv

from network_model import (
    FusionRule,
    MacModel,
    NetworkScenario,
    RadioParams,
    ScenarioError,
    generate_scenario,
    load_scenario,
    scenario_from_dict,
)
from sim import EventKind, ScenarioEvent, SimulationError


CONFIG_SCHEMA_VERSION = 1
SWEEP_VARIABLES = ("N", "V", "split")
RADIO_FIELDS = tuple(f.name for f in dataclasses.fields(RadioParams))

DEFAULTS: Dict[str, Any] = {
    "name": "experiment",
    "fusion_rule": "AND",
    "mac_model": "0/X",
    "events": [],
    "mobility": {"speed_mps": 0.0},
    "horizon": 6000,
    "window_slots": 600,
    "output_dir": "out",
    "emit": {"per_slot_csv": False, "summary_json": True, "formation_trace": True},
}

GENERATE_DEFAULTS: Dict[str, Any] = {
    "num_sus": 10,
    "num_channels": 5,
    "region_side_m": 100.0,
    "bandwidth_hz": 10.0e6,
    "availability": 0.2,
}


class ConfigError(Exception):
    """Raised when configuration is invalid; line is 1-based when known"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.message = message
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _line_of(node: Optional[yaml.Node], path: Sequence[Any]) -> Optional[int]:
    """1-based line of the node at path in a composed YAML tree (nearest known ancestor)"""
    line = node.start_mark.line + 1 if node is not None else None
    for key in path:
        if isinstance(node, yaml.MappingNode):
            match = None
            for key_node, value_node in node.value:
                if key_node.value == str(key):
                    match = (key_node, value_node)
                    break
            if match is None:
                return line
            line = match[0].start_mark.line + 1
            node = match[1]
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            return line
    return line


class ExperimentConfig:
    """Experiment configuration with validation"""

    def __init__(
        self,
        config_dict: Dict[str, Any],
        node: Optional[yaml.Node] = None,
        base_dir: Optional[Path] = None,
    ):
        self._node = node
        self.base_dir = base_dir or Path.cwd()
        self.raw = self._normalize(config_dict)
        self._validate()

    def _error(self, message: str, *path: Any) -> ConfigError:
        return ConfigError(message, _line_of(self._node, path))

    def _normalize(self, config_dict: Dict[str, Any]) -> Dict[str, Any]:
        raw = copy.deepcopy(DEFAULTS)
        for key, value in config_dict.items():
            if value is None and isinstance(raw.get(key), dict):
                continue
            if isinstance(value, dict) and isinstance(raw.get(key), dict):
                raw[key] = {**raw[key], **value}
            else:
                raw[key] = copy.deepcopy(value)
        scenario = raw.get("scenario")
        if isinstance(scenario, dict) and isinstance(scenario.get("generate"), dict):
            scenario["generate"] = {**GENERATE_DEFAULTS, **scenario["generate"]}
        return raw

    def _validate(self):
        """Validate configuration structure and values"""
        raw = self.raw

        if raw.get("schema_version") != CONFIG_SCHEMA_VERSION:
            raise self._error(
                f"schema_version must be {CONFIG_SCHEMA_VERSION}, got {raw.get('schema_version')!r}",
                "schema_version",
            )

        seeds = raw.get("seeds")
        if not isinstance(seeds, list) or not seeds:
            raise self._error("seeds must be a non-empty list of integers", "seeds")
        for i, seed in enumerate(seeds):
            if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
                raise self._error(f"invalid seed {seed!r}", "seeds", i)

        horizon = raw.get("horizon")
        if not isinstance(horizon, int) or isinstance(horizon, bool) or horizon < 1:
            raise self._error("horizon must be an integer >= 1", "horizon")

        window = raw.get("window_slots")
        if not isinstance(window, int) or isinstance(window, bool) or window < 1:
            raise self._error("window_slots must be an integer >= 1", "window_slots")

        if raw.get("fusion_rule") not in [r.value for r in FusionRule]:
            raise self._error(f"fusion_rule must be AND or OR, got {raw.get('fusion_rule')!r}", "fusion_rule")
        if raw.get("mac_model") not in [m.value for m in MacModel]:
            raise self._error(f"mac_model must be 0/X or 1/X, got {raw.get('mac_model')!r}", "mac_model")

        speed = raw["mobility"].get("speed_mps")
        if not isinstance(speed, (int, float)) or isinstance(speed, bool) or speed < 0:
            raise self._error("mobility.speed_mps must be a nonnegative number", "mobility", "speed_mps")

        for flag, value in raw["emit"].items():
            if flag not in DEFAULTS["emit"]:
                raise self._error(f"unknown emit flag: {flag}", "emit", flag)
            if not isinstance(value, bool):
                raise self._error(f"emit.{flag} must be true or false", "emit", flag)

        self._validate_scenario()
        self._validate_radio()
        self._events = self._parse_events()
        self._validate_sweep()

    def _validate_scenario(self):
        scenario = self.raw.get("scenario")
        if not isinstance(scenario, dict):
            raise self._error("missing required section: scenario", "scenario")
        sources = [k for k in ("generate", "inline", "file") if k in scenario]
        if len(sources) != 1:
            raise self._error("scenario needs exactly one of generate, inline, file", "scenario")
        if "generate" in scenario:
            generate = scenario["generate"]
            for key in generate:
                if key not in GENERATE_DEFAULTS and key != "seed":
                    raise self._error(f"unknown scenario.generate key: {key}", "scenario", "generate", key)
            for key in ("num_sus", "num_channels"):
                value = generate[key]
                if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                    raise self._error(f"scenario.generate.{key} must be an integer >= 1", "scenario", "generate", key)
            if not 0.0 <= float(generate["availability"]) <= 1.0:
                raise self._error("scenario.generate.availability must lie in [0, 1]", "scenario", "generate", "availability")
        elif "inline" in scenario:
            try:
                scenario_from_dict(scenario["inline"])
            except ScenarioError as e:
                raise self._error(f"invalid inline scenario: {e}", "scenario", "inline") from e
        else:
            if not self._scenario_path().exists():
                raise self._error(f"scenario file not found: {self._scenario_path()}", "scenario", "file")

    def _validate_radio(self):
        radio = self.raw.get("radio", {})
        if not isinstance(radio, dict):
            raise self._error("radio must be a mapping", "radio")
        for key in radio:
            if key not in RADIO_FIELDS:
                raise self._error(f"unknown radio parameter: {key}", "radio", key)
        try:
            self.radio_params()
        except (ScenarioError, TypeError) as e:
            raise self._error(f"invalid radio parameters: {e}", "radio") from e

    def _parse_events(self) -> Tuple[ScenarioEvent, ...]:
        events = self.raw.get("events") or []
        if not isinstance(events, list):
            raise self._error("events must be a list", "events")
        parsed: List[ScenarioEvent] = []
        for i, event in enumerate(events):
            try:
                event_obj = ScenarioEvent(
                    slot=int(event["slot"]),
                    kind=EventKind(event["kind"]),
                    value=int(event["value"]),
                )
            except (KeyError, TypeError, ValueError, SimulationError) as e:
                raise self._error(f"invalid event: {e}", "events", i) from e
            if parsed and event_obj.slot <= parsed[-1].slot:
                raise self._error("event slots must strictly increase", "events", i, "slot")
            parsed.append(event_obj)
        return tuple(parsed)

    def _validate_sweep(self):
        sweep = self.raw.get("sweep")
        if sweep is None:
            return
        if not isinstance(sweep, dict):
            raise self._error("sweep must be a mapping", "sweep")
        variable = sweep.get("variable")
        if variable not in SWEEP_VARIABLES:
            raise self._error(
                f"unknown sweep variable {variable!r}; expected one of {', '.join(SWEEP_VARIABLES)}",
                "sweep", "variable",
            )
        if variable == "split":
            for key in ("mean_snr", "md_coalition"):
                if key not in sweep:
                    raise self._error(f"split sweep needs {key}", "sweep")
            if not 0.0 < float(sweep["md_coalition"]) < 1.0:
                raise self._error("sweep.md_coalition must lie in (0, 1)", "sweep", "md_coalition")
            points = sweep.get("points", 101)
            if not isinstance(points, int) or points < 2:
                raise self._error("sweep.points must be an integer >= 2", "sweep", "points")
            return
        if "generate" not in self.raw["scenario"]:
            raise self._error(f"a {variable} sweep needs a generated scenario", "scenario")
        values = sweep.get("values")
        if not isinstance(values, list) or not values:
            raise self._error("sweep.values must be a non-empty list", "sweep", "values")
        for i, value in enumerate(values):
            if variable == "N" and (not isinstance(value, int) or value < 1):
                raise self._error(f"channel count {value!r} must be an integer >= 1", "sweep", "values", i)
            if variable == "V" and (not isinstance(value, (int, float)) or value < 0):
                raise self._error(f"speed {value!r} must be a nonnegative number", "sweep", "values", i)
        if variable == "V":
            channels = sweep.get("channels")
            if not isinstance(channels, list) or not channels or not all(
                isinstance(c, int) and c >= 1 for c in channels
            ):
                raise self._error("a V sweep needs sweep.channels, a list of channel counts", "sweep", "channels")

    # -- accessors ----------------------------------------------------------

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value with dot notation support"""
        keys = key.split(".")
        value = self.raw
        for k in keys:
            if isinstance(value, dict):
                value = value.get(k, default)
            else:
                return default
        return value

    @property
    def name(self) -> str:
        return str(self.raw["name"])

    @property
    def seeds(self) -> List[int]:
        return list(self.raw["seeds"])

    @property
    def horizon(self) -> int:
        return self.raw["horizon"]

    @property
    def window_slots(self) -> int:
        return self.raw["window_slots"]

    @property
    def fusion_rule(self) -> FusionRule:
        return FusionRule(self.raw["fusion_rule"])

    @property
    def mac_model(self) -> MacModel:
        return MacModel(self.raw["mac_model"])

    @property
    def speed_mps(self) -> float:
        return float(self.raw["mobility"]["speed_mps"])

    @property
    def events(self) -> Tuple[ScenarioEvent, ...]:
        return self._events

    @property
    def output_dir(self) -> Path:
        path = Path(self.raw["output_dir"])
        return path if path.is_absolute() else Path.cwd() / path

    @property
    def sweep(self) -> Optional[Dict[str, Any]]:
        return self.raw.get("sweep")

    def emit(self, flag: str) -> bool:
        return bool(self.raw["emit"][flag])

    def radio_params(self) -> RadioParams:
        return RadioParams(**self.raw.get("radio", {}))

    def _scenario_path(self) -> Path:
        path = Path(self.raw["scenario"]["file"])
        return path if path.is_absolute() else self.base_dir / path

    def build_scenario(
        self,
        seed: int,
        num_sus: Optional[int] = None,
        num_channels: Optional[int] = None,
    ) -> NetworkScenario:
        """
        Scenario of one replication

        A generated scenario uses scenario.generate.seed when given, otherwise
        the replication seed. Inline and file scenarios take the configured
        fusion rule and MAC model.
        """
        source = self.raw["scenario"]
        if "generate" in source:
            generate = source["generate"]
            return generate_scenario(
                num_sus=num_sus or generate["num_sus"],
                num_channels=num_channels or generate["num_channels"],
                seed=generate.get("seed", seed),
                radio=self.radio_params(),
                region_side_m=float(generate["region_side_m"]),
                bandwidth_hz=float(generate["bandwidth_hz"]),
                availability=float(generate["availability"]),
                fusion_rule=self.fusion_rule,
                mac_model=self.mac_model,
            )
        if num_sus is not None or num_channels is not None:
            raise ConfigError("N sweeps need a generated scenario")
        scenario = scenario_from_dict(source["inline"]) if "inline" in source else load_scenario(self._scenario_path())
        return dataclasses.replace(scenario, fusion_rule=self.fusion_rule, mac_model=self.mac_model)

    def with_overrides(
        self,
        seeds: Optional[List[int]] = None,
        output_dir: Optional[Path] = None,
        num_channels: Optional[int] = None,
        speed_mps: Optional[float] = None,
    ) -> "ExperimentConfig":
        """
        Copy with command-line or sweep-point values applied

        Raises:
            ConfigError: If num_channels is given for a scenario that is not generated
        """
        raw = self.to_dict()
        if seeds is not None:
            raw["seeds"] = list(seeds)
        if output_dir is not None:
            raw["output_dir"] = str(output_dir)
        if num_channels is not None:
            if "generate" not in raw["scenario"]:
                raise ConfigError("N sweeps need a generated scenario")
            raw["scenario"]["generate"]["num_channels"] = num_channels
        if speed_mps is not None:
            raw["mobility"]["speed_mps"] = float(speed_mps)
        return ExperimentConfig(raw, base_dir=self.base_dir)

    def to_dict(self) -> Dict[str, Any]:
        """Normalized configuration, defaults filled in"""
        return copy.deepcopy(self.raw)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ExperimentConfig) and self.raw == other.raw


def parse_config(text: str, base_dir: Optional[Path] = None) -> ExperimentConfig:
    """
    Parse and validate a configuration document

    Raises:
        ConfigError: With the offending line when it can be located
    """
    try:
        node = yaml.compose(text)
        config_dict = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigError(f"Invalid YAML: {e}", mark.line + 1 if mark else None) from e

    if not isinstance(config_dict, dict):
        raise ConfigError("Config file must contain a YAML dictionary")

    return ExperimentConfig(config_dict, node=node, base_dir=base_dir)


def load_config(config_path: Optional[Path] = None) -> ExperimentConfig:
    """
    Load and validate configuration from a YAML (or JSON) file

    Args:
        config_path: Path to the config (defaults to ../config/config.yaml relative to this file)

    Returns:
        ExperimentConfig object

    Raises:
        ConfigError: If configuration is invalid
    """
    # Load environment variables from .env
    project_root = Path(__file__).parent.parent
    env_path = project_root / ".env"
    if env_path.exists():
        load_dotenv(env_path)

    if config_path is None:
        config_path = project_root / "config" / "config.yaml"
    config_path = Path(config_path)

    if not config_path.exists():
        raise ConfigError(f"Config file not found: {config_path}")

    with open(config_path, "r", encoding="utf-8") as f:
        text = f.read()
    return parse_config(text, base_dir=config_path.parent)


def dump_config(config: ExperimentConfig) -> str:
    """YAML text of a configuration"""
    return yaml.safe_dump(config.to_dict(), sort_keys=True)
