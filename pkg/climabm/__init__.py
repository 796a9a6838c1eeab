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
from importlib.metadata import version, PackageNotFoundError

try:
    __version__ = version("climabm")
except PackageNotFoundError:
    # Running from a source checkout
    __version__ = "0.1.0"
