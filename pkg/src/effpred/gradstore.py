"""GRDX v1: bit-exact binary container for per-example gradient vectors.

Layout (all integers little-endian):

    magic   4 bytes  'GRDX'
    u32     version (= 1)
    u32     n_layers
    per layer:
        u16     name byte length
        bytes   UTF-8 name
        u64     element count (dim)
    u32     n_examples
    per example:
        u64     example_id
        f32[total_dim]  values, layer slices in manifest order

Values are stored as IEEE-754 binary32 little-endian. There is no
compression or checksum; corruption is detected through length validation.
Writing and reading are streaming: a record is never required to be fully
resident unless the caller materializes it.
"""

import struct
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CorruptionError, FormatError, UnsupportedFormatError, ValidationError

MAGIC = b"GRDX"
VERSION = 1

_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")

# Chunk size (elements) for streaming value I/O.
_CHUNK = 1 << 20


@dataclass(frozen=True)
class LayerManifestEntry:
    name: str
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"layer {self.name!r} has dim {self.dim}; must be >= 1")


@dataclass
class GradientRecord:
    """One example's flattened gradient.

    ``values`` is a float32 array for materialized records; the writer also
    accepts an iterable of float32 chunks so huge records can be streamed.
    """

    example_id: int
    values: object

    def __eq__(self, other):
        if not isinstance(other, GradientRecord):
            return NotImplemented
        a = np.asarray(self.values, dtype=np.float32)
        b = np.asarray(other.values, dtype=np.float32)
        return self.example_id == other.example_id and a.tobytes() == b.tobytes()


@dataclass
class GradDump:
    manifest: Sequence[LayerManifestEntry]
    records: list = field(default_factory=list)

    @property
    def total_dim(self):
        return sum(e.dim for e in self.manifest)


def validate_manifest(manifest):
    names = [e.name for e in manifest]
    if len(set(names)) != len(names):
        raise ValidationError("duplicate layer names in manifest")
    total = sum(e.dim for e in manifest)
    if total < 1:
        raise ValidationError("manifest has zero total dim")
    return total


def _iter_value_chunks(values):
    """Yield float32 chunks from an array or an iterable of arrays."""
    if isinstance(values, np.ndarray):
        arr = np.ascontiguousarray(values, dtype=np.float32)
        for start in range(0, arr.size, _CHUNK):
            yield arr.ravel()[start : start + _CHUNK]
        return
    if isinstance(values, (list, tuple)) and values and np.isscalar(values[0]):
        yield np.asarray(values, dtype=np.float32)
        return
    for chunk in values:
        yield np.ascontiguousarray(chunk, dtype=np.float32).ravel()


def write_dump(manifest, records, sink, n_examples=None):
    """Write a GRDX file; returns the byte count written.

    ``records`` is an iterable of ``GradientRecord``. The record count is
    patched into the header after the stream is exhausted, so ``sink`` must
    be seekable unless ``n_examples`` is given up front.
    """
    total_dim = validate_manifest(manifest)

    written = 0

    def put(b):
        nonlocal written
        sink.write(b)
        written += len(b)

    put(MAGIC)
    put(_U32.pack(VERSION))
    put(_U32.pack(len(manifest)))
    for entry in manifest:
        name = entry.name.encode("utf-8")
        if len(name) > 0xFFFF:
            raise FormatError(f"layer name too long: {entry.name[:32]!r}...")
        put(_U16.pack(len(name)))
        put(name)
        put(_U64.pack(entry.dim))

    count_offset = written
    seekable = hasattr(sink, "seek") and getattr(sink, "seekable", lambda: True)()
    if n_examples is None:
        if not seekable:
            raise FormatError("sink is not seekable; pass n_examples explicitly")
        put(_U32.pack(0))  # patched below
    else:
        put(_U32.pack(n_examples))

    seen_ids = set()
    count = 0
    for record in records:
        if record.example_id in seen_ids:
            raise ValidationError(f"duplicate example_id {record.example_id}")
        seen_ids.add(record.example_id)
        put(_U64.pack(record.example_id))
        length = 0
        for chunk in _iter_value_chunks(record.values):
            if not np.isfinite(chunk).all():
                raise ValidationError(
                    f"non-finite value in example {record.example_id}"
                )
            length += chunk.size
            if length > total_dim:
                break
            put(chunk.tobytes())
        if length != total_dim:
            raise FormatError(
                f"example {record.example_id} has {length} values; "
                f"manifest requires {total_dim}"
            )
        count += 1

    if n_examples is None:
        end = sink.tell()
        sink.seek(count_offset)
        sink.write(_U32.pack(count))
        sink.seek(end)
    elif count != n_examples:
        raise FormatError(f"declared n_examples={n_examples} but wrote {count} records")
    return written


class DumpReader:
    """Streaming GRDX reader.

    Iterating yields ``GradientRecord`` objects with materialized float32
    values, in file order. ``read_values_chunked`` is available for records
    too large to materialize.
    """

    def __init__(self, source):
        self._source = source
        header = source.read(4)
        if header != MAGIC:
            raise UnsupportedFormatError(f"bad magic {header!r}; expected {MAGIC!r}")
        version = _U32.unpack(self._read_exact(4, "header"))[0]
        if version != VERSION:
            raise UnsupportedFormatError(f"unsupported GRDX version {version}")
        n_layers = _U32.unpack(self._read_exact(4, "header"))[0]
        manifest = []
        for _ in range(n_layers):
            name_len = _U16.unpack(self._read_exact(2, "header"))[0]
            name = self._read_exact(name_len, "header").decode("utf-8")
            dim = _U64.unpack(self._read_exact(8, "header"))[0]
            manifest.append(LayerManifestEntry(name, dim))
        self.manifest = manifest
        self.total_dim = validate_manifest(manifest)
        self.n_examples = _U32.unpack(self._read_exact(4, "header"))[0]
        self._cursor = 0

    def _read_exact(self, n, where):
        data = self._source.read(n)
        if len(data) != n:
            raise CorruptionError(f"truncated GRDX file in {where}")
        return data

    def __iter__(self) -> Iterator[GradientRecord]:
        for index in range(self.n_examples):
            yield self._read_record(index)

    def _read_record(self, index):
        try:
            example_id = _U64.unpack(self._read_exact(8, f"record {index}"))[0]
            raw = self._read_exact(4 * self.total_dim, f"record {index}")
        except CorruptionError as err:
            raise CorruptionError(
                f"truncated record at index {index}", record_index=index
            ) from err
        values = np.frombuffer(raw, dtype="<f4").astype(np.float32, copy=False)
        return GradientRecord(example_id, values)

    def read_all(self) -> GradDump:
        records = list(self)
        ids = [r.example_id for r in records]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate example_ids in dump")
        return GradDump(self.manifest, records)


def read_dump(source) -> DumpReader:
    """Open a GRDX byte stream for streaming record access."""
    return DumpReader(source)


def load_dump(path) -> GradDump:
    with open(path, "rb") as fh:
        return read_dump(fh).read_all()


def save_dump(dump: GradDump, path) -> int:
    with open(path, "wb") as fh:
        return write_dump(dump.manifest, dump.records, fh)


def file_size(manifest, n_examples):
    """Exact byte size of a GRDX file with this manifest and record count."""
    header = 4 + 4 + 4 + sum(2 + len(e.name.encode("utf-8")) + 8 for e in manifest) + 4
    total_dim = sum(e.dim for e in manifest)
    return header + n_examples * (8 + 4 * total_dim)
