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
_module_: `climabm.timestamp`

This module provides one class `Timestamp` which captures a moment
and offers the representations climabm needs: compact stamps for log
directories, ISO-8601 strings for run manifests and elapsed seconds
for progress reports.
"""
from time import time
from datetime import datetime, timezone
from climabm import __version__


class Timestamp(object):
    """
    _class_: `climabm.timestamp.Timestamp`

    A Timestamp takes the time at initialization (or accepts an epoch)
    and exposes several formats of that moment.

    Usage:

        :::python
        >>> from climabm.timestamp import Timestamp
        >>> t = Timestamp(0)
        >>> t.timestamp
        '19700101000000'
        >>> t.iso
        '1970-01-01T00:00:00+00:00'
        >>> int(t)
        0
    """
    def __init__(self, epoch=None):
        self._epoch = time() if epoch is None else float(epoch)
        self._timestamp = datetime.fromtimestamp(self._epoch, tz=timezone.utc)

    @property
    def epoch(self):
        """
        _property_: `climabm.timestamp.Timestamp.epoch`

        Returns: The timestamp in whole epoch seconds
        """
        return int(self)

    @property
    def timestamp(self):
        """
        _property_: `climabm.timestamp.Timestamp.timestamp`

        Returns the UTC moment as "YYYYmmddHHMMSS", handy for directory
        and file names.
        """
        return self._timestamp.strftime('%Y%m%d%H%M%S')

    @property
    def iso(self):
        """
        _property_: `climabm.timestamp.Timestamp.iso`

        Returns the UTC moment in ISO-8601 form with seconds precision.
        """
        return self._timestamp.isoformat(timespec="seconds")

    @property
    def friendly(self):
        return self._timestamp.strftime('%A, %B %d, %Y, %X UTC')

    def elapsed(self, later=None):
        """
        _method_: `climabm.timestamp.Timestamp.elapsed(self, later=None)`

        Returns the seconds (float) between this Timestamp and `later`
        (another Timestamp, defaults to now).
        """
        later = Timestamp() if later is None else later
        return later._epoch - self._epoch

    def __str__(self):
        return self.friendly

    def __int__(self):
        return int(self._epoch)
