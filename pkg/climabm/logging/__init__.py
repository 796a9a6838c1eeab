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
_module_: `climabm.logging`

Per-component loggers for climabm.

`make_logger(name)` returns the `climabm.<name>` logger with one
rotating file handler writing to
`$CLIMABM_HOME/var/log/<user>/<run>/<name>.log`, where `<run>` is the
process start time and pid so concurrent runs never share a file. The
directory is only created when the first record is written.

`logged(name)` wraps a function so each call, its arguments, its
result and any exception end up in that component's log.

Settings come from the `[logging]` section of `logging.conf` (see
`climabm.config`); `DEFAULTS` fills whatever the site does not set.

    :::python
    from climabm.logging import make_logger, logged

    logger = make_logger("engine")
    logger.info("step %d of %d", 10, 320)
"""
import os
import logging
import getpass
from functools import wraps
from climabm import __version__
from climabm.timestamp import Timestamp
from logging.handlers import RotatingFileHandler
from climabm.config import CLIMABM_HOME, get_configs_dict

DEFAULTS = {
    "level": logging.INFO,
    "max_bytes": 10 * 1024 * 1024,
    "backup_count": 5,
    "delay": True,
    "propagate": False,
}
FORMAT = ("%(asctime)s %(levelname)-7s %(name)s "
          "[%(threadName)s] %(module)s:%(lineno)d %(message)s")
RUN_ID = "{}-{}".format(Timestamp().timestamp, os.getpid())


def settings(configs=None):
    """
    _function_: `climabm.logging.settings(configs=None)`

    Merge the `[logging]` section of `logging.conf` over `DEFAULTS`.
    `configs` is the output of `climabm.config.get_configs_dict()`
    and is read from `$CLIMABM_HOME/etc` when omitted.
    """
    if configs is None:
        configs = get_configs_dict()
    merged = dict(DEFAULTS)
    merged.update(configs.get("logging.conf", {}).get("logging", {}))
    return {
        "level": int(merged["level"]),
        "max_bytes": int(merged["max_bytes"]),
        "backup_count": int(merged["backup_count"]),
        "delay": bool(merged["delay"]),
        "propagate": bool(merged["propagate"]),
    }


class _LazyDirHandler(RotatingFileHandler):
    def _open(self):
        os.makedirs(os.path.dirname(self.baseFilename), exist_ok=True)
        return super()._open()


def log_directory():
    return os.path.join(CLIMABM_HOME, "var", "log", getpass.getuser(), RUN_ID)


def make_logger(name, **overrides):
    """
    _function_: `climabm.logging.make_logger(name, **overrides)`

    Return the `climabm.<name>` logger, configuring it on first use.
    Keyword arguments override the values of `settings()` (`level`,
    `max_bytes`, `backup_count`, `delay`, `propagate`). Later calls
    return the configured logger unchanged.
    """
    logger = logging.getLogger("climabm.{}".format(name))
    if logger.handlers:
        return logger

    options = settings()
    options.update(overrides)
    handler = _LazyDirHandler(
        os.path.join(log_directory(), "{}.log".format(name)),
        maxBytes=options["max_bytes"],
        backupCount=options["backup_count"],
        delay=options["delay"],
    )
    handler.setFormatter(logging.Formatter(FORMAT))
    handler.setLevel(options["level"])
    logger.setLevel(options["level"])
    logger.addHandler(handler)
    logger.propagate = options["propagate"]
    return logger


def _escape(string):
    """Strip line breaks and entity-encode quotes so a record stays on one line."""
    for old, new in (("\n", ""), ("\r", ""), ("'", "&apos;"), ('"', "&quot;")):
        string = string.replace(old, new)
    return string


def _short_repr(obj, limit=200):
    text = repr(obj)
    if len(text) > limit:
        text = text[:limit] + "..."
    return _escape(text)


def _signature(func, args, kwargs):
    rendered = ["'{}'".format(_short_repr(arg)) for arg in args]
    rendered.extend(
        "'{}'={}".format(key, _short_repr(value))
        for key, value in kwargs.items())
    return "{}({})".format(func.__name__, ", ".join(rendered))


def logged(name="climabm"):
    """
    _function_: `climabm.logging.logged(name="climabm")`

    Decorator logging calls to the wrapped function in the `name`
    component log: arguments and the abbreviated result at DEBUG,
    exceptions with their traceback at ERROR before re-raising.
    """
    def _decorator(func):
        @wraps(func)
        def _wrapper(*args, **kwargs):
            logger = make_logger(name)
            call = _signature(func, args, kwargs)
            logger.debug("calling %s", call)
            try:
                result = func(*args, **kwargs)
            except Exception:
                logger.exception("%s raised", call)
                raise
            logger.debug("%s returned %s", call, _short_repr(result))
            return result
        return _wrapper
    return _decorator
