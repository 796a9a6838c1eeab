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
_module_: `climabm.cli`

Builds the `climabm` command line from plain functions. Every keyword
parameter of a registered function becomes an option whose type is
taken from its default value:

* `str` or `None`: a string
* `int`, `float`: a number of that type
* `list`: repeatable, values are collected in order
* `bool`: a flag; a `True` default is switched off with `--no-<name>`

Parameters without a default are positional. The function's return
value is the process exit code (`None` is 0).

    :::python
    cli = Cli(prog="climabm")

    @cli.command("run", category="scenarios")
    def run_command(config=None, seed=None, no_hazard=False):
        ...

    raise SystemExit(cli.run())
"""
import inspect
import argparse
from collections import OrderedDict
from climabm import __version__
from climabm.logging import make_logger

_EMPTY = inspect.Parameter.empty


def _flags(parser, name):
    """Pick option strings for `name`: `-x`, then `-X`, then long only."""
    long_flag = "--{}".format(name.replace("_", "-"))
    taken = parser._option_string_actions
    for short in ("-" + name[0], "-" + name[0].upper()):
        if short not in taken:
            return (short, long_flag)
    return (long_flag, )


def _add_option(parser, name, default):
    if isinstance(default, bool):
        if default:
            parser.add_argument(
                "--no-{}".format(name.replace("_", "-")),
                dest=name, action="store_false", default=True)
        else:
            parser.add_argument(
                *_flags(parser, name), dest=name, action="store_true",
                default=False)
    elif isinstance(default, list):
        parser.add_argument(
            *_flags(parser, name), dest=name, action="append", default=None)
    elif isinstance(default, (int, float)):
        parser.add_argument(
            *_flags(parser, name), dest=name, type=type(default),
            default=default)
    elif default is None or isinstance(default, str):
        parser.add_argument(
            *_flags(parser, name), dest=name, type=str, default=default)
    else:
        raise TypeError(
            "unsupported default {!r} for option '{}'".format(default, name))


class Cli(object):
    """
    _class_: `climabm.cli.Cli(description="", main=None, prog=None)`

    With `main` the whole program is that one function and `command`
    cannot be used; otherwise each decorated function is a
    sub-command, listed by category in the `--help` epilog.
    """
    def __init__(self, description="", main=None, prog=None):
        self.main = main
        self.functions = OrderedDict()
        self.categories = OrderedDict()
        self.parser = argparse.ArgumentParser(
            prog=prog,
            description=description,
            formatter_class=argparse.RawDescriptionHelpFormatter)
        if main is None:
            self.parser.add_argument(
                "--version", action="version",
                version="%(prog)s {}".format(__version__))
            self.subparsers = self.parser.add_subparsers(dest="command")
            self.subparsers.required = True
        else:
            self._build(main, self.parser)

    def _build(self, fn, parser):
        parser.set_defaults(func=fn)
        for name, param in inspect.signature(fn).parameters.items():
            if param.default is _EMPTY:
                parser.add_argument(name)
            else:
                _add_option(parser, name, param.default)

    def _epilog(self):
        return "\n".join(
            "{}: {}".format(category or "commands", ", ".join(names))
            for category, names in self.categories.items())

    def command(self, name=None, category=None):
        """
        _method_: `climabm.cli.Cli.command(name=None, category=None)`

        Decorator registering a sub-command, named after the function
        with underscores turned into dashes unless `name` is given.
        """
        def inner(fn):
            if self.main is not None:
                raise TypeError(
                    "sub-commands cannot be added when main is given")
            command = name or fn.__name__.replace("_", "-")
            self.functions[command] = fn
            self.categories.setdefault(category, []).append(command)
            parser = self.subparsers.add_parser(
                command,
                description=fn.__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
            self._build(fn, parser)
            self.parser.epilog = self._epilog()
            return fn
        return inner

    def run(self, argv=None):
        """
        _method_: `climabm.cli.Cli.run(argv=None)`

        Parse `argv` (default `sys.argv[1:]`), call the selected
        function and return its exit code. Bad arguments exit with
        status 2 through argparse.
        """
        log = make_logger("cli")
        args = vars(self.parser.parse_args(argv))
        func = args.pop("func")
        kwargs = {}
        for name, param in inspect.signature(func).parameters.items():
            value = args[name]
            if value is None and isinstance(param.default, list):
                value = []
            kwargs[name] = value
        log.info("Executing %s", func.__name__)
        try:
            result = func(**kwargs)
        except Exception:
            log.exception("%s failed", func.__name__)
            raise
        return 0 if result is None else int(result)
