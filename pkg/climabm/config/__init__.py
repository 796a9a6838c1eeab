# This file is part of climabm, a spatial agent-based model of a
# climate-exposed economy.
#
# climabm is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License version 3
# as published by the Free Software Foundation.
#
# climabm is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with climabm.  If not, see <https://www.gnu.org/licenses/>.
"""
_module_: `climabm.config`

This module powers climabm's precedence based site configuration.
The system works like this:

1. When a configuration file is needed, this module is imported
and one of its convenience functions is called.
2. Configuration files located in `$CLIMABM_HOME/etc/default` and
`$CLIMABM_HOME/etc/local` are merged:
    1. Files in `$CLIMABM_HOME/etc/default` are parsed. This gives
    every program a default value for all of its options.
    2. Files in `$CLIMABM_HOME/etc/local` are parsed and their values
    override the defaults. __NOTE__ that only the options you wish to
    change need to be declared in `$CLIMABM_HOME/etc/local`.
3. Once all configurations are parsed, the results are returned.

Three convenience functions are defined in this module:

1. `get_config(filename)`: parse the configuration for `filename` and
return a `configparser.ConfigParser` instance.
2. `get_config_dict(filename)`: parse the configuration for `filename`
and return a `dict` of `dict`s keyed by section.
3. `get_configs_dict(base_dir=CONFIG_HOME)`: parse every `.conf` file
in `base_dir/default` and return them keyed by filename.

`CLIMABM_HOME` defaults to the current working directory when the
environment variable is not set.
"""
import os
import configparser
from climabm import __version__

CLIMABM_HOME = os.environ.get("CLIMABM_HOME", os.getcwd())
CONFIG_HOME = os.path.join(CLIMABM_HOME, "etc")

TRUE_VALUES = ("on", "true", "t", "yes", "y")
FALSE_VALUES = ("off", "false", "f", "no", "n")


class ConfigError(ValueError):
    """Raised for unknown keys, unparsable values and invalid settings."""


def get_config(filename, base_dir=None):
    '''
    _function_: `climabm.config.get_config(filename, base_dir=None)`

    Parses `$CLIMABM_HOME/etc/default/$filename` and
    `$CLIMABM_HOME/etc/local/$filename` and returns a
    `configparser.ConfigParser` instance containing the results.
    Missing files are silently skipped.

    Parameters:

    * `filename`: The filename of the configuration to look for
    * `base_dir`: Overrides `$CLIMABM_HOME/etc`

    Usage:

        :::python
        from climabm.config import get_config

        config = get_config("logging.conf")
        level = config.get("logging", "level")
    '''
    base_dir = CONFIG_HOME if base_dir is None else base_dir
    config = configparser.ConfigParser(strict=False)
    config.read(os.path.join(base_dir, 'default', filename))
    config.read(os.path.join(base_dir, 'local', filename))
    return config


def coerce(value):
    """
    _function_: `climabm.config.coerce(value)`

    Converts a raw configuration string into `True`, `False` or an
    `int` where it unambiguously looks like one, otherwise returns
    the string unchanged.
    """
    if value.lower() in TRUE_VALUES:
        return True
    elif value.lower() in FALSE_VALUES:
        return False
    elif value.isdigit():
        return int(value)
    return value


def get_config_dict(filename, base_dir=None):
    """
    _function_: `climabm.config.get_config_dict(filename, base_dir=None)`

    Parses `$CLIMABM_HOME/etc/default/$filename` and
    `$CLIMABM_HOME/etc/local/$filename` and returns a
    `dict` containing the results, values passed through `coerce`.

    Usage:

        :::python
        from climabm.config import get_config_dict

        config = get_config_dict("logging.conf")
        level = config["logging"]["level"]
    """
    config = get_config(filename, base_dir=base_dir)
    _config = {}
    for section in config.sections():
        _config[section] = {}
        for k, v in config.items(section):
            _config[section][k] = coerce(v)
    return _config


def get_configs_dict(base_dir=CONFIG_HOME):
    """
    _function_: `climabm.config.get_configs_dict(base_dir=CONFIG_HOME)`

    Searches `base_dir/default` for files ending in `.conf`, merges
    each with its counterpart in `base_dir/local` and returns a `dict`
    keyed by filename. A missing `default` directory yields an empty
    `dict`.

    Usage:

        :::python
        from climabm.config import get_configs_dict

        config = get_configs_dict()
        option = config["scenario.conf"]["scenario"]["steps"]
    """
    _configs = {}
    _dir = os.path.join(base_dir, "default")
    if not os.path.isdir(_dir):
        return _configs
    for filename in sorted(os.listdir(_dir)):
        if filename.endswith(".conf"):
            _configs[filename] = get_config_dict(filename, base_dir=base_dir)
    return _configs
