"Configuration module."

import enum
import getopt
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Type, TypeVar

import yaml

from qeslab.error import ConfigError, Error
from qeslab.exactalg import DEFAULT_PRECISION, Rational, rational
from qeslab.models import EuclidParams, SphereParams

SPACES = ("sphere", "euclid")
FORMATS = ("json", "csv")
SUITES = ("integrals", "algebra", "gauge", "radial", "contraction", "closedforms", "geometry",
          "all")

def _choice(value: Any, allowed: Tuple[str, ...], what: str) -> str:
    text = str(value).lower()
    if text not in allowed:
        raise ConfigError(f"invalid {what}: {value} (expected one of {', '.join(allowed)})")
    return text

def _integer(value: Any, what: str, minimum: int = 0) -> int:
    try:
        result = int(str(value))
    except ValueError:
        raise ConfigError(f"invalid {what}: {value}")
    if result < minimum:
        raise ConfigError(f"{what} must be at least {minimum}: {value}")
    return result

def _rational(value: Any, what: str) -> Rational:
    try:
        return rational(value)
    except Error:
        raise ConfigError(f"invalid {what}: {value}")

def _rationals(value: Any, what: str) -> Tuple[Rational, ...]:
    items = value if isinstance(value, list) else str(value).split(",")
    if not items or any(str(item).strip() == "" for item in items):
        raise ConfigError(f"invalid {what}: {value}")
    return tuple(_rational(str(item).strip(), what) for item in items)

PrefsType = TypeVar("PrefsType", bound="Prefs")
class Prefs(NamedTuple):
    "User preferences to choose default behavior."

    # Default model family.
    space: str = "sphere"
    # Bits of precision for irrational roots.
    precision: int = DEFAULT_PRECISION
    # Seed of the conformance parameter draws.
    seed: int = 0
    # Default output format.
    format: str = "json"
    # Parameter draws per conformance identity.
    draws: int = 5
    # Contraction parameters ε, each halving the previous one by default.
    epsilons: Tuple[Rational, ...] = (rational("1/2"), rational("1/4"), rational("1/8"),
                                      rational("1/16"))

    @classmethod
    def dict_key(cls: Type[PrefsType], field: str) -> str:
        "Get the untyped `dict` key name for a `Prefs` field."
        if field not in cls._fields:
            raise ConfigError(f"invalid field: {field}")
        return field

    @classmethod
    def from_dict(cls: Type[PrefsType], data: Dict[str, Any]) -> PrefsType:
        "Create `Prefs` from an untyped `dict` (YAML deserialization result)."

        prefs = {}
        for (field, value_fn) in (
                ("space", lambda x: _choice(x, SPACES, "space")),
                ("precision", lambda x: _integer(x, "precision", 1)),
                ("seed", lambda x: _integer(x, "seed")),
                ("format", lambda x: _choice(x, FORMATS, "format")),
                ("draws", lambda x: _integer(x, "draw count", 1)),
                ("epsilons", lambda x: _rationals(x, "epsilons")),
        ):
            key = cls.dict_key(field)
            if key in data:
                prefs[field] = value_fn(data[key])

        unknown_keys = set(data.keys()) - set(cls.dict_key(k) for k in cls._fields)
        if unknown_keys:
            raise ConfigError(f"unknown preferences: {sorted(unknown_keys)}")
        if any(eps <= 0 for eps in prefs.get("epsilons", ())):
            raise ConfigError("epsilons must be positive")

        return cls(**prefs) # type: ignore

    @classmethod
    def from_yaml_file(cls: Type[PrefsType], path: Path) -> PrefsType:
        "Create a `Prefs` from a YAML file."

        with path.open(encoding="utf-8") as file:
            data = yaml.safe_load(file)
            if data is None:
                return cls()
            if isinstance(data, dict):
                return cls.from_dict(data)
            raise ConfigError(f"invalid prefs file: {data}")

@enum.unique
class Subcommand(enum.Enum):
    "Subcommand for selecting program execution type."

    # Matrix spectrum of h^(QES) (or ĥ^(QES)) on P_k with separation labels.
    SPECTRUM = enum.auto()
    # Run the conformance suite.
    VERIFY = enum.auto()
    # Solve every admissible separation chain.
    SEPARATE = enum.auto()
    # Probe the sphere-to-Euclidean contraction.
    CONTRACT = enum.auto()
    # Show program usage and exit.
    HELP = enum.auto()

ConfigType = TypeVar("ConfigType", bound="Config")
class Config(NamedTuple):
    "Command-line configuration."

    # Model family: sphere or euclid.
    space: str
    # Dimension.
    n: int
    # Degree bound of the invariant subspace.
    k: int
    # γ_1..γ_{n+1} (sphere) or γ′_1..γ′_n (euclid); None means all zero.
    gammas: Optional[Tuple[Rational, ...]]
    # Sphere coupling a; None means 0.
    a: Optional[Rational]
    # Euclidean frequency ω and coupling b; None means 1 and 0.
    omega: Optional[Rational]
    b: Optional[Rational]
    precision: int
    seed: int
    format: str
    draws: int
    epsilons: Tuple[Rational, ...]
    # Output path; None writes to stdout.
    out: Optional[Path] = None
    # Conformance suite selector.
    suite: str = "all"
    # 0: warnings, 1: info, 2: debug.
    verbosity: int = 0
    # qeslab subcommand.
    subcommand: Subcommand = Subcommand.HELP

    @classmethod
    def default(cls: Type[ConfigType], *, prefs: Optional[Prefs] = None) -> ConfigType:
        "Return a default config."

        prefs = prefs if prefs is not None else Prefs()
        return cls(
            space=prefs.space,
            n=1,
            k=0,
            gammas=None,
            a=None,
            omega=None,
            b=None,
            precision=prefs.precision,
            seed=prefs.seed,
            format=prefs.format,
            draws=prefs.draws,
            epsilons=prefs.epsilons,
        )

    @classmethod
    # pylint: disable=too-many-branches,too-many-statements
    def from_argv(
            cls: Type[ConfigType],
            argv: List[str],
            *,
            prefs: Optional[Prefs] = None,
    ) -> ConfigType:
        "Get configuration by parsing the program arguments."

        prefs = prefs if prefs is not None else Prefs()
        config: Dict[str, Any] = cls.default(prefs=prefs)._asdict()
        try:
            opts, args = getopt.gnu_getopt(argv[1:], "hvo:", longopts=[
                "a=",
                "b=",
                "format=",
                "gamma=",
                "help",
                "k=",
                "n=",
                "omega=",
                "out=",
                "precision=",
                "prefs=",
                "seed=",
                "space=",
                "suite=",
                "verbose",
            ])
        except getopt.GetoptError as ex:
            raise ConfigError(ex)

        if args:
            subcommand = {
                "contract": Subcommand.CONTRACT,
                "help": Subcommand.HELP,
                "separate": Subcommand.SEPARATE,
                "spectrum": Subcommand.SPECTRUM,
                "verify": Subcommand.VERIFY,
            }.get(args[0].lower())
            if subcommand is None:
                raise ConfigError(f"invalid subcommand: {args[0]}")
            if len(args) > 1:
                raise ConfigError(f"unexpected arguments: {args[1:]}")
            config["subcommand"] = subcommand

        for opt, optarg in opts:
            if opt in ("-h", "--help"):
                config["subcommand"] = Subcommand.HELP
            elif opt in ("-v", "--verbose"):
                config["verbosity"] += 1
            elif opt in ("-o", "--out"):
                if optarg:
                    config["out"] = Path(optarg)
                else:
                    raise ConfigError("output path cannot be empty")
            elif opt == "--space":
                config["space"] = _choice(optarg, SPACES, "space")
            elif opt == "--n":
                config["n"] = _integer(optarg, "dimension", 1)
            elif opt == "--k":
                config["k"] = _integer(optarg, "degree bound")
            elif opt == "--gamma":
                config["gammas"] = _rationals(optarg, "gamma list")
            elif opt == "--a":
                config["a"] = _rational(optarg, "a")
            elif opt == "--omega":
                config["omega"] = _rational(optarg, "omega")
            elif opt == "--b":
                config["b"] = _rational(optarg, "b")
            elif opt == "--precision":
                config["precision"] = _integer(optarg, "precision", 1)
            elif opt == "--seed":
                config["seed"] = _integer(optarg, "seed")
            elif opt == "--format":
                config["format"] = _choice(optarg, FORMATS, "format")
            elif opt == "--suite":
                config["suite"] = _choice(optarg, SUITES, "suite")
            elif opt == "--prefs":
                # Consumed by the entry point before parsing.
                if not optarg:
                    raise ConfigError("prefs path cannot be empty")
            else:
                raise ConfigError(f"unhandled option: {opt}")

        result = cls(**config) # type: ignore
        result.check_params()
        return result

    def check_params(self):
        "Reject parameter lists that do not fit the space and dimension."
        expected = self.n + 1 if self.space == "sphere" else self.n
        if self.gammas is not None and len(self.gammas) != expected:
            raise ConfigError(f"{self.space} with n={self.n} needs {expected} gammas, "
                              f"got {len(self.gammas)}")
        if self.space == "euclid" and self.omega is not None and self.omega <= 0:
            raise ConfigError(f"omega must be positive: {self.omega}")

    def explicit_params(self) -> bool:
        "Whether any model parameter was given for the configured space."
        if self.gammas is not None:
            return True
        if self.space == "sphere":
            return self.a is not None
        return self.omega is not None or self.b is not None

    def sphere_params(self) -> SphereParams:
        "Sphere parameters of this configuration."
        a = self.a if self.a is not None else rational(0)
        return SphereParams.make(self.n, self.gammas, a, self.k)

    def euclid_params(self) -> EuclidParams:
        "Euclidean parameters of this configuration."
        return EuclidParams.make(
            self.n,
            self.gammas,
            self.omega if self.omega is not None else rational(1),
            self.b if self.b is not None else rational(0),
            self.k,
        )

def prefs_path(argv: List[str]) -> Optional[Path]:
    "The path given with --prefs, if any."
    for (i, arg) in enumerate(argv):
        if arg == "--prefs" and i + 1 < len(argv):
            return Path(argv[i + 1])
        if arg.startswith("--prefs="):
            return Path(arg.split("=", 1)[1])
    return None
