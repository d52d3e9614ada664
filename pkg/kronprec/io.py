"""
Readers and writers for everything kronprec puts on disk.

* 8-bit grayscale PGM images through Pillow, scaled to [0, 1] on read and
  clipped to [0, 1] on write.
* RFC 4180 CSV tables whose first column is ``schema``.
* JSON documents with a top-level ``schema`` field.

Schema tags look like ``kronprec.convergence/1``: a kind and a major version.
Readers refuse other kinds and unknown majors with `BundleError`. Output is
written with sorted keys and fixed float formatting, so identical inputs give
byte-identical files.
"""

import csv
import json
import math
import os

import numpy as np
from PIL import Image, UnidentifiedImageError

from kronprec.exceptions import BundleError


SCHEMA_VERSION = 1


def schema_tag(kind):
    return "kronprec.%s/%d" % (kind, SCHEMA_VERSION)


def check_schema(tag, kind):
    """Raise `BundleError` unless ``tag`` names ``kind`` at a known major."""
    prefix, sep, version = str(tag).rpartition('/')
    if not sep or prefix != "kronprec." + kind:
        raise BundleError("expected a %r document, found schema %r"
                          % (kind, tag))
    major = version.split('.')[0]
    if major != str(SCHEMA_VERSION):
        raise BundleError("unsupported %s schema version %r (this is "
                          "version %d)" % (kind, version, SCHEMA_VERSION))


def _cell(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, kind, header, rows):
    """Write ``rows`` under ``header``, prefixing the ``schema`` column."""
    tag = schema_tag(kind)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['schema'] + list(header))
        for row in rows:
            writer.writerow([tag] + [_cell(v) for v in row])
    return path


def read_csv(path, kind):
    """
    Return ``(header, rows)`` from a table written by `write_csv`.

    Cells stay strings; the ``schema`` column is checked and dropped.
    """
    try:
        with open(path, newline='') as f:
            records = list(csv.reader(f))
    except IOError as e:
        raise BundleError("cannot read %s: %s" % (path, e))
    if not records or not records[0] or records[0][0] != 'schema':
        raise BundleError("%s is not a kronprec table (no schema column)"
                          % path)
    header = records[0][1:]
    rows = []
    for record in records[1:]:
        if not record:
            continue
        check_schema(record[0], kind)
        rows.append(record[1:])
    return header, rows


def _jsonable(value):
    if isinstance(value, dict):
        return dict((str(k), _jsonable(v)) for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no NaN/inf
        return value if math.isfinite(value) else None
    return value


def write_json(path, kind, payload):
    document = _jsonable(payload)
    document['schema'] = schema_tag(kind)
    with open(path, 'w') as f:
        json.dump(document, f, sort_keys=True, indent=2)
        f.write('\n')
    return path


def read_json(path, kind):
    try:
        with open(path) as f:
            document = json.load(f)
    except IOError as e:
        raise BundleError("cannot read %s: %s" % (path, e))
    except ValueError as e:
        raise BundleError("corrupt JSON in %s: %s" % (path, e))
    if not isinstance(document, dict) or 'schema' not in document:
        raise BundleError("%s has no schema field" % path)
    check_schema(document['schema'], kind)
    return document


#
# PGM
#

def read_pgm(path):
    """
    Read an 8-bit grayscale PGM as a float64 array scaled to [0, 1].

    Anything Pillow does not open as mode ``L`` (colour, 16-bit, bitmaps) is
    refused with `BundleError`, as are missing or truncated files.
    """
    try:
        with Image.open(path) as img:
            mode = img.mode
            pixels = np.asarray(img, dtype=np.uint8) if mode == 'L' else None
    except (UnidentifiedImageError, OSError) as e:
        raise BundleError("cannot read %s: %s" % (path, e))
    if pixels is None:
        raise BundleError("%s is not an 8-bit grayscale image (mode %s)"
                          % (path, mode))
    return pixels.astype(np.float64) / 255.0


def write_pgm(path, image):
    """Write ``image`` (values in [0, 1], clipped) as an 8-bit binary PGM."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise BundleError("PGM images must be 2-D, got shape %s"
                          % (image.shape,))
    pixels = np.rint(np.clip(np.nan_to_num(image), 0.0, 1.0) * 255)
    Image.fromarray(pixels.astype(np.uint8), 'L').save(path, format='PPM')
    return path


def ensure_dir(path):
    if not os.path.isdir(path):
        os.makedirs(path)
    return path
