import json
import logging
import os
import re
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from brkpyapi.brk_cli.cli_exception import ParseError, ValidationError
from brkpyapi.brk_cli.problem_kind import ProblemKind
from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.brk_models import build_system
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem
from brkpyapi.brk_core.system_exception import SystemException
from brkpyapi.brk_viscous.grid_solution import SimulationConfig


OUTPUT_ENV: str = "BRK_OUTPUT_DIR"
DEFAULT_OUTPUT: str = "brk_output"
FORMATS: Tuple[str, ...] = ("csv", "json")
SECTIONS: Tuple[str, ...] = ("problem", "system", "data", "numerics", "simulation", "output", "suite")
STATE_KEYS: Tuple[str, ...] = ("u0", "ud", "u_minus", "u_plus", "initial_guess")
MATRIX_KEYS: Tuple[str, ...] = ("b_1", "b_2")
DATA_KEYS: Tuple[str, ...] = STATE_KEYS + MATRIX_KEYS + ("epsilon", "epsilons", "eta", "fan_file")
REQUIRED_DATA: Dict[ProblemKind, Tuple[str, ...]] = {
    ProblemKind.RIEMANN: ("u_minus", "u_plus"),
    ProblemKind.BOUNDARY_RIEMANN: ("u0", "ud"),
    ProblemKind.CLASSICAL_SIM: ("u0", "ud", "epsilon"),
    ProblemKind.SELFSIMILAR_SIM: ("u0", "ud", "epsilon"),
    ProblemKind.COMPARE_LIMITS: ("u0", "ud", "epsilons"),
    ProblemKind.B_DEPENDENCE: ("u0", "ud", "b_1", "b_2", "epsilon"),
    ProblemKind.VALIDATE: (),
    ProblemKind.SUITE: (),
}
_TOML_POSITION = re.compile(r"line (\d+), column (\d+)")


@dataclass(frozen=True)
class SuiteConfig:
    """
    Sizes of the acceptance battery run by the ``suite`` subcommand.

    :param envelope_functions: Random piecewise-linear functions for the envelope oracle.
    :param envelope_max_nodes: Largest number of nodes of one of those functions.
    :param boundary_problems: Random small-data boundary problems per system.
    :param signature_draws: Random (U, B) draws of the sign-count check.
    :param data_size: |U_0 - U_D| of the random boundary problems and of the limit comparison.
    :param epsilons: Viscosities of the limit comparison.
    :param viscous: Include the limit comparison and the viscosity dependence exhibit.
    """
    envelope_functions: int = 200
    envelope_max_nodes: int = 100
    boundary_problems: int = 50
    signature_draws: int = 1000
    data_size: float = 0.05
    epsilons: Tuple[float, ...] = (0.08, 0.04, 0.02)
    viscous: bool = False

    def to_dict(self) -> dict:
        data: dict = asdict(self)
        data["epsilons"] = list(self.epsilons)
        return data


@dataclass(frozen=True, eq=False)
class RunConfig:
    """
    Fully resolved run configuration.

    :param problem: Problem to run.
    :type problem: ProblemKind
    :param system_name: Name of a bundled model.
    :type system_name: str
    :param system_params: Model parameters.
    :type system_params: dict
    :param data: Problem data, lists of floats for states and matrices.
    :type data: dict
    :param numerics: Tolerances with overrides applied.
    :type numerics: Numerics
    :param simulation: Discretization of the viscous runs.
    :type simulation: SimulationConfig
    :param output_dir: Output root; the run writes into a subdirectory.
    :type output_dir: Path
    :param formats: Subset of ("csv", "json").
    :type formats: Tuple[str, ...]
    :param seed: Seed of every randomized step.
    :type seed: int
    :param suite: Sizes of the acceptance battery.
    :type suite: SuiteConfig
    :param source: Where the configuration came from.
    :type source: str
    """
    problem: ProblemKind
    system_name: str
    system_params: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    numerics: Numerics = DEFAULT_NUMERICS
    simulation: SimulationConfig = SimulationConfig()
    output_dir: Path = Path(DEFAULT_OUTPUT)
    formats: Tuple[str, ...] = FORMATS
    seed: int = 0
    suite: SuiteConfig = SuiteConfig()
    source: str = "<text>"

    def system(self) -> HyperbolicSystem:
        return build_system(self.system_name, self.system_params)

    def state(self, key: str) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.data[key], dtype=float)).reshape(-1)

    def matrix(self, key: str) -> np.ndarray:
        return np.atleast_2d(np.asarray(self.data[key], dtype=float))

    @property
    def run_dir(self) -> Path:
        """
        Per-run output directory, unique per problem and system.
        """
        return self.output_dir / f"{self.problem.value}-{self.system_name}"

    def to_dict(self) -> dict:
        return {
            "problem": self.problem.value,
            "system": {"name": self.system_name, "params": self.system_params},
            "data": self.data,
            "numerics": self.numerics.as_dict(),
            "simulation": self.simulation.to_dict(),
            "output": {"directory": str(self.output_dir), "formats": list(self.formats), "seed": self.seed},
            "suite": self.suite.to_dict(),
            "source": self.source,
        }


# region documents

def _format_of(path: Path) -> str:
    suffix: str = path.suffix.lower()
    if suffix in (".yaml", ".yml"):
        return "yaml"
    if suffix == ".json":
        return "json"
    return "toml"


def _decode(text: str, fmt: str, label: str) -> dict:
    try:
        if fmt == "yaml":
            document = yaml.safe_load(text)
        elif fmt == "json":
            document = json.loads(text)
        else:
            document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        line: Optional[int] = getattr(e, "lineno", None)
        column: Optional[int] = getattr(e, "colno", None)
        match = _TOML_POSITION.search(str(e))
        if line is None and match is not None:
            line, column = int(match.group(1)), int(match.group(2))
        raise ParseError(f"{label}: {getattr(e, 'msg', e)}", line=line, column=column)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ParseError(f"{label}: {getattr(e, 'problem', None) or e}",
                         line=mark.line + 1 if mark is not None else None,
                         column=mark.column + 1 if mark is not None else None)
    except json.JSONDecodeError as e:
        raise ParseError(f"{label}: {e.msg}", line=e.lineno, column=e.colno)
    if document is None:
        document = {}
    if not isinstance(document, dict):
        raise ParseError(f"{label}: top level must be a table of keys, got {type(document).__name__}")
    return document


def load_document(source: Union[str, Path], fmt: Optional[str] = None) -> Tuple[dict, str]:
    """
    Reads a configuration document from a file, or from text when source
    is a string that names no file.

    :param source: Path or document text.
    :param fmt: "toml", "yaml" or "json"; taken from the file suffix when None, TOML for text.
    :raises ParseError: If the file cannot be read or decoded.
    :return: (document, label).
    :rtype: Tuple[dict, str]
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and "=" not in source
                                    and os.path.isfile(source)):
        path = Path(source)
        try:
            text: str = path.read_text()
        except OSError as e:
            raise ParseError(f"cannot read configuration {path}; Detail: {e}")
        return _decode(text, fmt or _format_of(path), str(path)), str(path)
    return _decode(str(source), fmt or "toml", "<text>"), "<text>"


def parse_value(text: str) -> Any:
    """
    Parses an override value as a TOML value, falling back to the bare string.
    """
    try:
        return tomllib.loads(f"value = {text}")["value"]
    except tomllib.TOMLDecodeError:
        return text.strip()


def apply_overrides(document: dict, overrides: Sequence[str]) -> dict:
    """
    Applies ``dotted.key=value`` overrides; they take precedence over the document.

    :raises ParseError: If an override is not of the form key=value.
    """
    for item in overrides:
        if "=" not in item:
            raise ParseError(f"override '{item}' is not key=value")
        key, text = item.split("=", 1)
        parts: List[str] = [p.strip() for p in key.strip().split(".") if p.strip()]
        if not parts:
            raise ParseError(f"override '{item}' has an empty key")
        node: dict = document
        for part in parts[:-1]:
            child = node.get(part)
            if not isinstance(child, dict):
                child = {}
                node[part] = child
            node = child
        node[parts[-1]] = parse_value(text)
        logging.debug(f"override {'.'.join(parts)} = {node[parts[-1]]!r}")
    return document

# endregion


# region validation

def _reject_unknown(section: str, values: Mapping[str, Any], allowed: Sequence[str]) -> None:
    for key in values:
        if key not in allowed:
            prefix: str = f"{section}." if section else ""
            raise ValidationError(f"unknown key {prefix}{key}")


def _positive(section: str, key: str, value: Any, integer: bool = False) -> Any:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{section}.{key} must be a number, got {value!r}")
    if integer and float(value) != int(value):
        raise ValidationError(f"{section}.{key} must be an integer, got {value!r}")
    if not value > 0:
        raise ValidationError(f"{section}.{key} must be > 0")
    return int(value) if integer else float(value)


def _numerics(values: Mapping[str, Any]) -> Numerics:
    _reject_unknown("numerics", values, Numerics.field_names())
    types: Dict[str, Any] = {f.name: f.type for f in fields(Numerics)}
    overrides: Dict[str, Any] = {}
    for key, value in values.items():
        overrides[key] = _positive("numerics", key, value, integer=types[key] in (int, "int"))
    return DEFAULT_NUMERICS.updated(**overrides)


def _simulation(values: Mapping[str, Any]) -> SimulationConfig:
    names: Tuple[str, ...] = tuple(f.name for f in fields(SimulationConfig))
    _reject_unknown("simulation", values, names)
    resolved: Dict[str, Any] = {}
    for key, value in values.items():
        if key == "time_marching":
            if not isinstance(value, bool):
                raise ValidationError(f"simulation.time_marching must be true or false, got {value!r}")
            resolved[key] = value
        elif value is not None:
            resolved[key] = _positive("simulation", key, value, integer=key in ("saves", "xi_nodes", "workers"))
    return SimulationConfig(**resolved)


def _suite(values: Mapping[str, Any]) -> SuiteConfig:
    names: Tuple[str, ...] = tuple(f.name for f in fields(SuiteConfig))
    _reject_unknown("suite", values, names)
    resolved: Dict[str, Any] = {}
    for key, value in values.items():
        if key == "viscous":
            resolved[key] = bool(value)
        elif key == "epsilons":
            resolved[key] = tuple(_positive("suite", key, v) for v in value)
        else:
            resolved[key] = _positive("suite", key, value, integer=key != "data_size")
    return SuiteConfig(**resolved)


def _system_section(document: dict) -> Tuple[str, dict]:
    raw = document.get("system")
    if raw is None:
        raise ValidationError("missing key system")
    if isinstance(raw, str):
        return raw, {}
    if not isinstance(raw, dict):
        raise ValidationError(f"system must be a model name or a table, got {raw!r}")
    _reject_unknown("system", raw, ("name", "params"))
    if "name" not in raw:
        raise ValidationError("missing key system.name")
    params = raw.get("params", {}) or {}
    if not isinstance(params, dict):
        raise ValidationError("system.params must be a table")
    return str(raw["name"]), dict(params)


def _check_data(data: dict, problem: ProblemKind, sys: HyperbolicSystem) -> dict:
    _reject_unknown("data", data, DATA_KEYS)
    for key in REQUIRED_DATA[problem]:
        if key not in data:
            raise ValidationError(f"missing key data.{key} for problem {problem.value}")
    resolved: dict = dict(data)
    for key in STATE_KEYS:
        if key not in data:
            continue
        state: np.ndarray = np.atleast_1d(np.asarray(data[key], dtype=float)).reshape(-1)
        if state.size != sys.n:
            raise ValidationError(f"data.{key} has {state.size} components, system {sys.name} has n={sys.n} "
                                  f"(dimension mismatch)")
        if not np.all(np.isfinite(state)):
            raise ValidationError(f"data.{key} must be finite")
        resolved[key] = state.tolist()
    for key in MATRIX_KEYS:
        if key not in data:
            continue
        matrix: np.ndarray = np.atleast_2d(np.asarray(data[key], dtype=float))
        if matrix.shape != (sys.n, sys.n):
            raise ValidationError(f"data.{key} has shape {matrix.shape}, system {sys.name} needs {(sys.n, sys.n)}")
        resolved[key] = matrix.tolist()
    if "epsilon" in data:
        resolved["epsilon"] = _positive("data", "epsilon", data["epsilon"])
    if "eta" in data:
        resolved["eta"] = _positive("data", "eta", data["eta"])
    if "epsilons" in data:
        eps: List[float] = [_positive("data", "epsilons", e) for e in data["epsilons"]]
        if not eps or any(b >= a for a, b in zip(eps[:-1], eps[1:])):
            raise ValidationError(f"data.epsilons must be strictly decreasing, got {eps}")
        resolved["epsilons"] = eps
    if "fan_file" in data:
        resolved["fan_file"] = str(data["fan_file"])
    return resolved


def _output(values: Mapping[str, Any]) -> Tuple[Path, Tuple[str, ...], int]:
    _reject_unknown("output", values, ("directory", "formats", "seed"))
    directory: str = str(values.get("directory") or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)
    formats = values.get("formats", list(FORMATS))
    if isinstance(formats, str):
        formats = [formats]
    for fmt in formats:
        if fmt not in FORMATS:
            raise ValidationError(f"output.formats entry {fmt!r} is not one of {list(FORMATS)}")
    seed = values.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ValidationError(f"output.seed must be a nonnegative integer, got {seed!r}")
    return Path(directory), tuple(formats), int(seed)


def resolve(document: dict, source: str = "<text>") -> RunConfig:
    """
    Validates a decoded document and fills in the defaults.

    :raises ValidationError: Naming the offending key.
    :rtype: RunConfig
    """
    _reject_unknown("", document, SECTIONS)
    if "problem" not in document:
        raise ValidationError("missing key problem")
    try:
        problem = ProblemKind(str(document["problem"]))
    except ValueError:
        raise ValidationError(f"problem {document['problem']!r} is not one of {[p.value for p in ProblemKind]}")

    name, params = _system_section(document)
    try:
        system: HyperbolicSystem = build_system(name, params)
    except (SystemException, ValueError, TypeError) as e:
        raise ValidationError(f"system {name} cannot be built; Detail: {e}")

    for section in ("data", "numerics", "simulation", "output", "suite"):
        if not isinstance(document.get(section, {}), dict):
            raise ValidationError(f"{section} must be a table")
    directory, formats, seed = _output(document.get("output", {}))
    config = RunConfig(
        problem=problem,
        system_name=name,
        system_params=params,
        data=_check_data(document.get("data", {}), problem, system),
        numerics=_numerics(document.get("numerics", {})),
        simulation=_simulation(document.get("simulation", {})),
        output_dir=directory,
        formats=formats,
        seed=seed,
        suite=_suite(document.get("suite", {})),
        source=source,
    )
    logging.debug(f"configuration {source}: problem {problem.value}, system {name} (n={system.n})")
    return config

# endregion


def parse_config(source: Union[str, Path], overrides: Sequence[str] = (), fmt: Optional[str] = None) -> RunConfig:
    """
    Reads, overrides and validates a run configuration.

    :param source: Configuration file path or TOML text.
    :type source: Union[str, Path]
    :param overrides: ``dotted.key=value`` items with precedence over the document.
    :type overrides: Sequence[str]
    :param fmt: Document format, from the file suffix when None.
    :type fmt: Optional[str]
    :raises ParseError: With line and column when the document is malformed.
    :raises ValidationError: Naming the offending key.
    :return: Configuration with defaults filled in.
    :rtype: RunConfig
    """
    document, label = load_document(source, fmt)
    return resolve(apply_overrides(document, overrides), label)


def write_echo(config: RunConfig, directory: Path) -> Path:
    """
    Writes the effective configuration next to the results.
    """
    directory.mkdir(parents=True, exist_ok=True)
    target: Path = directory / "effective_config.json"
    target.write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True))
    return target
