from pathlib import Path
from typing import Any, Dict, List, Optional

import tomli

from intrasign.errors import ConfigurationError
from intrasign.utils import deep_merge


def _convert_scalar(value: str):
    lowered = value.lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    for conv in (int, float):
        try:
            return conv(value)
        except ValueError:
            pass
    return value


def parse_dot_config(cli_args: list[str]) -> dict:
    """Parse overrides in dot notation to a nested dictionary.

    For example: ["rprop.max_iterations=200", "trading.grid_max=0.01"] will be
    parsed to:
    {
        "rprop": {"max_iterations": 200},
        "trading": {"grid_max": 0.01},
    }

    Args:
        cli_args: List of strings in the format "key.path=value".

    Returns:
        dict: Nested dictionary representing the parsed config.

    Raises:
        ConfigurationError: if an entry has no "=".
    """
    result = {}
    for arg in cli_args:
        if "=" not in arg:
            raise ConfigurationError(f"Override must look like key.path=value: {arg!r}")
        key_path, value = arg.split("=", 1)
        keys = key_path.strip().split(".")
        current = result
        for key in keys[:-1]:
            current = current.setdefault(key, {})
        current[keys[-1]] = _convert_scalar(value.strip())
    return result


def hoist_default(data: dict, group: str = "DEFAULT") -> dict:
    """Move the keys of a [DEFAULT] table to the root of ``data``.

    [DEFAULT] keys and root scalars are one namespace; within one layer the
    [DEFAULT] value wins.
    """
    data = dict(data)
    default = data.pop(group, None)
    if isinstance(default, dict):
        data = deep_merge(data, default)
    return data


class TomlConfigParser:
    """Layered TOML configuration with declared, documented keys.

    Files in ``config_files`` are merged in order (later wins), then
    ``override_configs`` on top. Keys are declared through argument groups
    so that defaults apply and a commented template can be dumped.
    """

    def __init__(
        self,
        config_files: Optional[List[Path]] = None,
        override_configs: Optional[dict] = None,
    ):
        self._raw_data: Dict[str, Any] = {}
        self.known_groups: list[ArgumentGroup] = []
        self.parsed = Config({})
        self.default_group_name = "DEFAULT"
        self.default_group = self.add_argument_group(self.default_group_name)
        self.config_files = list(config_files or [])
        self.override_configs = override_configs

    def parse_args(self) -> "Config":
        self.load_config()
        self.parsed = Config({})
        for group in self.known_groups:
            group.parse_args()
        self.parsed.update(self.parsed.pop(self.default_group_name, {}))
        return self.parsed

    def add_argument_group(self, name: str, help="", expose_raw=False):
        """Create an argument group for related keys in one TOML table

        Args:
            name: The name of the group (will be a TOML table name)

        Returns:
            ArgumentGroup: A group object that can have arguments added to it
        """
        group = ArgumentGroup(self, name, help, expose_raw)
        self.known_groups.append(group)
        return group

    def add_argument(
        self, name: str, default=None, help: str = "", required: bool = False
    ):
        """Add a top-level key with optional default value"""
        self.default_group.add_argument(name, default, help, required)

    def dump_default_config(self, dest=None) -> str:
        """Generate a default config file based on known arguments"""
        config = "\n".join(group.dump_default_config() for group in self.known_groups)
        if dest:
            dest.write(config)
        return config

    def load_config(self) -> Dict[str, Any]:
        config: Dict[str, Any] = {}
        for path in self.config_files:
            path = Path(path)
            if not path.exists():
                raise ConfigurationError(f"Config file not found: {path}")
            with open(path, "rb") as f:
                try:
                    loaded = tomli.load(f)
                except tomli.TOMLDecodeError as e:
                    raise ConfigurationError(f"Invalid TOML in {path}: {e}") from e
            config = deep_merge(config, self._hoist_default(loaded))
        if self.override_configs:
            config = deep_merge(config, self._hoist_default(self.override_configs))

        self._raw_data = config
        return config

    def _hoist_default(self, data: dict) -> dict:
        return hoist_default(data, self.default_group_name)


class ArgumentGroup:
    """Helper class for grouping arguments in TOML tables"""

    def __init__(self, parent, name, help="", expose_raw=False):
        self.parent = parent
        self.name = name
        self.known_args: Dict[str, dict] = {}
        self.help = help
        self.parsed = Config({})
        self._raw_data: Dict[str, Any] = {}
        self.expose_raw = expose_raw

    def parse_args(self):
        self._parse_group()
        for name, info in self.known_args.items():
            self._parse_argument(name, info)
        return self.parsed

    def _path(self) -> list[str]:
        return self.name.split(".")

    def _parse_group(self):
        raw = self.parent._raw_data
        if self.name == self.parent.default_group_name:
            raw = {k: v for k, v in raw.items() if not isinstance(v, dict)}
        else:
            for g in self._path():
                raw = raw.get(g, {}) if isinstance(raw, dict) else {}
        self._raw_data = raw

        parsed = self.parent.parsed
        for g in self._path():
            parsed = parsed.setdefault(g, Config({}))
        if self.expose_raw:
            parsed.update(self._raw_data)
        self.parsed = parsed

    def _parse_argument(self, name, info):
        if name in self._raw_data:
            value = self._raw_data[name]
        elif info["required"]:
            raise ConfigurationError(f"Missing required config key {self.name}.{name}")
        else:
            value = info["default"]
        self.parsed[name] = value

    def add_argument(
        self, name: str, default=None, help: str = "", required: bool = False
    ):
        """Add an argument to this group

        Args:
            name: Argument name (will be nested under the group in TOML)
            default: Default value if not specified
            help: Description of the argument
            required: Whether this argument is required
        """
        self.known_args[name] = {
            "default": default,
            "help": help,
            "required": required,
        }

    def dump_default_config(self):
        """Generate a commented TOML table for this group"""
        lines = [f"[{self.name}]"]
        if self.help:
            lines.insert(0, f"# {self.help}")
        for name, info in self.known_args.items():
            lines.append(f"# {info['help']}")
            if info["required"]:
                lines.append("# Required: Yes")
            default = info["default"]
            if default is None:
                lines.append(f"# {name} = ")
            else:
                lines.append(f"# {name} = {_toml_literal(default)}")
            lines.append("")
        return "\n".join(lines) + "\n"


def _toml_literal(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    return f'"{value}"'


class Config(dict):
    """Wrapper class that allows both dot notation and dictionary-style access to fields"""

    def __getattr__(self, name):
        if name in self:
            value = self[name]
            if isinstance(value, dict) and not isinstance(value, Config):
                return Config(value)
            return value
        raise AttributeError(f"'Config' object has no attribute '{name}'")

    def __setattr__(self, name, value):
        self[name] = value
