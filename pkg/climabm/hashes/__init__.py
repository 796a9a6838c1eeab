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
_module_: `climabm.hashes`

Wrappers around [hashlib](https://docs.python.org/3/library/hashlib.html)
used to fingerprint the input files of a run (hazard grids, impact
curves and scenario files) so a run manifest identifies exactly which
data produced a set of results.

* `file_digest(filename, algorithm="sha256")` - hex digest of one file
* `digest_files(filenames, algorithm="sha256")` - `dict` of path to digest
"""
import hashlib
from climabm import __version__

BUFFER_SIZE = 65536


def file_digest(filename, algorithm="sha256"):
    """
    _function_: `climabm.hashes.file_digest(filename, algorithm="sha256")`

    Returns the hexadecimal digest of the file at `filename`. The file
    is read in 64 KiB chunks. `algorithm` is any name accepted by
    `hashlib.new`.
    """
    _hash = hashlib.new(algorithm)
    with open(filename, 'rb') as fin:
        _buffer = fin.read(BUFFER_SIZE)
        while len(_buffer) > 0:
            _hash.update(_buffer)
            _buffer = fin.read(BUFFER_SIZE)
    return _hash.hexdigest()


def digest_files(filenames, algorithm="sha256"):
    """
    _function_: `climabm.hashes.digest_files(filenames, algorithm="sha256")`

    Returns a `dict` mapping each filename to its digest, in the order
    given. Duplicate names are hashed once.
    """
    digests = {}
    for filename in filenames:
        if filename not in digests:
            digests[filename] = file_digest(filename, algorithm=algorithm)
    return digests
