# **************************************************************************
# *
# * Authors:     degenflow developers
# *
# * This program is free software; you can redistribute it and/or modify
# * it under the terms of the GNU General Public License as published by
# * the Free Software Foundation; either version 3 of the License, or
# * (at your option) any later version.
# *
# * This program is distributed in the hope that it will be useful,
# * but WITHOUT ANY WARRANTY; without even the implied warranty of
# * MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# * GNU General Public License for more details.
# *
# * You should have received a copy of the GNU General Public License
# * along with this program; if not, write to the Free Software
# * Foundation, Inc., 59 Temple Place, Suite 330, Boston, MA
# * 02111-1307  USA
# *
# **************************************************************************
"""
Field files, lossless CSV export, region files and JSON summaries.

A field file is one JSON header line {type, nx, ny, lx, ly, neumann} followed by
the little-endian float64 payload in row-major order (x-components first for
vector and corner fields).
"""

# General imports
import csv, hashlib, json, os
from typing import Union

import numpy as np

# Plugin imports
from ..constants import SCALAR, VECTOR, CORNER, FIELD_TYPES
from .grid import Grid2D, ScalarField, VectorField, CornerField

AnyField = Union[ScalarField, VectorField, CornerField]
_PAYLOAD = np.dtype('<f8')


def fieldType(field: AnyField) -> str:
    if isinstance(field, ScalarField):
        return SCALAR
    if isinstance(field, VectorField):
        return VECTOR
    if isinstance(field, CornerField):
        return CORNER
    raise TypeError(f'Not a grid field: {type(field).__name__}')


def _components(field: AnyField):
    if isinstance(field, ScalarField):
        return [field.values]
    return [field.x, field.y]


def writeField(path: str, field: AnyField) -> str:
    header = dict(type=fieldType(field), **field.grid.toDict(), neumann=bool(getattr(field, 'neumann', False)))
    with open(path, 'wb') as fh:
        fh.write((json.dumps(header, sort_keys=True) + '\n').encode('utf-8'))
        for comp in _components(field):
            fh.write(np.ascontiguousarray(comp, dtype=_PAYLOAD).tobytes())
    return path


def readField(path: str) -> AnyField:
    with open(path, 'rb') as fh:
        header = json.loads(fh.readline().decode('utf-8'))
        payload = np.frombuffer(fh.read(), dtype=_PAYLOAD).astype(float)
    if header.get('type') not in FIELD_TYPES:
        raise ValueError(f'{path}: unknown field type {header.get("type")}')
    g = Grid2D.fromDict(header)
    if header['type'] == SCALAR:
        return ScalarField(g, payload.reshape(g.shape))
    if header['type'] == VECTOR:
        nX = g.ny * (g.nx + 1)
        return VectorField(g, payload[:nX].reshape(g.ny, g.nx + 1), payload[nX:].reshape(g.ny + 1, g.nx),
                           neumann=bool(header.get('neumann', False)))
    nC = (g.ny + 1) * (g.nx + 1)
    return CornerField(g, payload[:nC].reshape(g.ny + 1, g.nx + 1), payload[nC:].reshape(g.ny + 1, g.nx + 1))


def _locations(field: AnyField):
    """ Yields (component, array, x coordinates, y coordinates) for every stored component. """
    g = field.grid
    if isinstance(field, ScalarField):
        X, Y = g.centers()
        yield 'value', field.values, X, Y
        return
    if isinstance(field, VectorField):
        xs = [np.arange(g.nx + 1) * g.hx, (np.arange(g.ny) + 0.5) * g.hy]
        ys = [(np.arange(g.nx) + 0.5) * g.hx, np.arange(g.ny + 1) * g.hy]
        for name, comp, (cx, cy) in zip(('x', 'y'), _components(field), (xs, ys)):
            X, Y = np.meshgrid(cx, cy)
            yield name, comp, X, Y
        return
    X, Y = np.meshgrid(np.arange(g.nx + 1) * g.hx, np.arange(g.ny + 1) * g.hy)
    yield 'x', field.x, X, Y
    yield 'y', field.y, X, Y


def exportCsv(field: AnyField, path: str) -> str:
    """ One row per stored value; repr formatting keeps every float bit-exact. """
    with open(path, 'w', newline='') as fh:
        writer = csv.writer(fh)
        writer.writerow(['component', 'j', 'i', 'x', 'y', 'value'])
        for name, comp, X, Y in _locations(field):
            for (j, i), value in np.ndenumerate(comp):
                writer.writerow([name, j, i, repr(float(X[j, i])), repr(float(Y[j, i])), repr(float(value))])
    return path


def writeRegion(path: str, g: Grid2D, mask: np.ndarray) -> str:
    cells = np.argwhere(mask).tolist()
    writeJson(path, {'grid': g.toDict(), 'cells': cells})
    return path


def readRegion(path: str):
    data = readJson(path)
    g = Grid2D.fromDict(data['grid'])
    mask = np.zeros(g.shape, dtype=bool)
    for j, i in data['cells']:
        mask[j, i] = True
    return g, mask


def _jsonDefault(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f'{type(value).__name__} is not JSON serializable')


def writeJson(path: str, data: dict) -> str:
    with open(path, 'w') as fh:
        json.dump(data, fh, indent=2, sort_keys=True, allow_nan=True, default=_jsonDefault)
        fh.write('\n')
    return path


def readJson(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def fileHash(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as fh:
        for block in iter(lambda: fh.read(1 << 20), b''):
            digest.update(block)
    return digest.hexdigest()


def ensureDir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
