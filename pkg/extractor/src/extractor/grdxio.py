"""Minimal standalone GRDX v1 writer.

Deliberately independent of the analysis package: the two sides share only
the wire format. Layout (little-endian): magic ``GRDX``, u32 version (1),
u32 layer count, per layer u16 name length + UTF-8 name + u64 dim, u32
record count, then per record u64 example id + concatenated float32 values.
"""

import struct

import numpy as np

MAGIC = b"GRDX"
VERSION = 1


class GrdxWriteError(ValueError):
    pass


def write_grdx(path, manifest, records):
    """Write ``records`` under ``manifest`` to ``path``.

    manifest: sequence of (name, dim) pairs.
    records: sequence of (example_id, values) with values of total dim.
    """
    manifest = [(str(name), int(dim)) for name, dim in manifest]
    total_dim = sum(dim for _, dim in manifest)
    records = list(records)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<I", len(manifest)))
        for name, dim in manifest:
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<Q", dim))
        fh.write(struct.pack("<I", len(records)))
        for example_id, values in records:
            values = np.asarray(values, dtype="<f4")
            if values.ndim != 1 or values.size != total_dim:
                raise GrdxWriteError(
                    f"example {example_id}: got {values.size} values, "
                    f"manifest requires {total_dim}"
                )
            if not np.all(np.isfinite(values)):
                raise GrdxWriteError(f"example {example_id}: non-finite gradient values")
            fh.write(struct.pack("<Q", int(example_id)))
            fh.write(values.tobytes())
