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
_module_: climabm.pprint

Terminal output helpers for the command line: aligned tables for
scenario summaries and colored status lines.
"""
import sys
import colorama
from climabm import __version__

colorama.init()


def format_cell(value, precision=4):
    """
    _function_: `climabm.pprint.format_cell(value, precision=4)`

    Renders floats with `precision` significant digits and everything
    else with `str`.
    """
    if isinstance(value, float):
        return "{:.{}g}".format(value, precision)
    return str(value)


def print_table(seq, stream=None, title=None):
    """
    _function_: `climabm.pprint.print_table(seq, stream=None, title=None)`

    DESCRIPTION:

    Write a formatted table to `stream` (default `sys.stdout`). `seq`
    should be a sequence of sequences with the first sequence being
    the header. Short rows are padded with empty cells.

    USAGE:

        :::python
        >>> seq = [["seed", "price ratio"], [1, 1.05], [2, 1.02]]
        >>> print_table(seq)

    PARAMETERS:

    * `seq`: a sequence of sequences (ie. a list of lists)
    * `stream`: file-like object to write to
    * `title`: optional line printed above the table
    """
    stream = sys.stdout if stream is None else stream
    _table = [[format_cell(cell) for cell in row] for row in seq]
    _header_row = _table.pop(0)
    _template = ""
    for index, field in enumerate(_header_row):
        column = [field]
        for row in _table:
            if index >= len(row):
                row.append("")
            column.append(row[index])
        column_width = len(max(column, key=len))
        _template += " {%s: <%s} " % (index, column_width)
    if title:
        stream.write(title + "\n\n")
    header_row = _template.format(*_header_row)
    stream.write(header_row + "\n")
    stream.write("-" * len(header_row) + "\n")
    for row in _table:
        stream.write(_template.format(*row) + "\n")


def status_line(text, ok=True, stream=None):
    """
    _function_: `climabm.pprint.status_line(text, ok=True, stream=None)`

    Writes `text` in green (`ok`) or red to `stream` followed by a
    newline.
    """
    stream = sys.stdout if stream is None else stream
    color = colorama.Fore.LIGHTGREEN_EX if ok else colorama.Fore.LIGHTRED_EX
    stream.write("".join([color, text, colorama.Fore.RESET]) + "\n")
