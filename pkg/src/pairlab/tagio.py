"""PTT1 binary time-tag files and CSV export.

Layout (little-endian)::

    header   4s   magic "PTT1"
             u16  version (1)
             u16  channel_count
             u64  resolution_ps
             u32  metadata_len
             ...  metadata, UTF-8 JSON
    records  u64  timestamp (ticks)
             u8   channel
             3x   reserved, zero

Records are ordered by (timestamp, channel).
"""

from __future__ import annotations

import csv
import json
import os
import struct

import numpy as np

from .errors import CorruptionError, DataError, FormatError
from .stream import TimeTagStream

MAGIC = b"PTT1"
VERSION = 1
HEADER = struct.Struct("<4sHHQI")
RECORD_DTYPE = np.dtype([("timestamp", "<u8"), ("channel", "u1"), ("reserved", "V3")])
RECORD_SIZE = RECORD_DTYPE.itemsize
assert RECORD_SIZE == 12

_BLOCK_RECORDS = 1 << 20
_INT64_MAX = np.iinfo(np.int64).max


def _merge(streams):
    if isinstance(streams, TimeTagStream):
        return streams
    streams = list(streams)
    if not streams:
        raise DataError("no streams to write")
    res = {s.resolution_ps for s in streams}
    if len(res) != 1:
        raise DataError(f"streams have different resolutions: {sorted(res)}")
    ts = np.concatenate([s.timestamps for s in streams])
    ch = np.concatenate([s.channels for s in streams])
    order = np.lexsort((ch, ts))
    meta = {}
    for s in streams:
        meta.update(s.metadata)
    return TimeTagStream(res.pop(), ts[order], ch[order],
                         max(s.channel_count for s in streams), meta)


def encode_metadata(metadata):
    return json.dumps(metadata or {}, sort_keys=True, separators=(",", ":")).encode("utf-8")


def write_streams(path, streams, metadata=None):
    """Write one stream, or several sharing a resolution, to ``path``.

    ``metadata`` defaults to the stream's own metadata dict.
    """
    stream = _merge(streams)
    meta = encode_metadata(stream.metadata if metadata is None else metadata)
    rec = np.zeros(len(stream), dtype=RECORD_DTYPE)
    rec["timestamp"] = stream.timestamps
    rec["channel"] = stream.channels
    header = HEADER.pack(MAGIC, VERSION, stream.channel_count, stream.resolution_ps, len(meta))
    tmp = f"{os.fspath(path)}.part"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(meta)
        fh.write(rec.tobytes())
    os.replace(tmp, path)


def read_header(fh):
    raw = fh.read(HEADER.size)
    if len(raw) < 4 and MAGIC.startswith(raw):
        raise CorruptionError(f"file truncated at byte {len(raw)}", offset=len(raw))
    if raw[:4] != MAGIC:
        raise FormatError(f"bad magic {raw[:4]!r}, not a PTT1 file")
    if len(raw) < HEADER.size:
        raise CorruptionError(f"header truncated at byte {len(raw)}", offset=len(raw))
    _, version, channel_count, resolution_ps, meta_len = HEADER.unpack(raw)
    if version != VERSION:
        raise FormatError(f"unsupported PTT1 version {version}")
    if channel_count < 1:
        raise FormatError("channel_count must be >= 1")
    if resolution_ps < 1:
        raise FormatError("resolution_ps must be >= 1")
    meta_raw = fh.read(meta_len)
    if len(meta_raw) < meta_len:
        raise CorruptionError(f"metadata truncated at byte {HEADER.size + len(meta_raw)}",
                              offset=HEADER.size + len(meta_raw))
    try:
        metadata = json.loads(meta_raw.decode("utf-8")) if meta_len else {}
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"metadata is not UTF-8 JSON: {exc}") from None
    return channel_count, resolution_ps, metadata, HEADER.size + meta_len


def iter_records(fh, channel_count, data_offset, block_records=_BLOCK_RECORDS):
    """Yield validated (timestamps, channels) blocks from an open file."""
    offset = data_offset
    index = 0
    last = -1
    last_ch = -1
    while True:
        buf = fh.read(block_records * RECORD_SIZE)
        if not buf:
            return
        whole = len(buf) // RECORD_SIZE
        if len(buf) % RECORD_SIZE:
            bad = offset + whole * RECORD_SIZE
            raise CorruptionError(f"truncated record at byte offset {bad}", offset=bad)
        rec = np.frombuffer(buf, dtype=RECORD_DTYPE)
        ts = rec["timestamp"]
        ch = rec["channel"]
        if len(ts) and int(ts.max()) > _INT64_MAX:
            raise DataError("timestamp exceeds the signed 64-bit range",
                            index=index + int(np.argmax(ts > _INT64_MAX)))
        ts = ts.astype(np.int64)
        if (ch >= channel_count).any():
            i = index + int(np.argmax(ch >= channel_count))
            raise DataError(f"record {i}: channel outside 0..{channel_count - 1}", index=i)
        reserved = np.frombuffer(rec["reserved"].tobytes(), dtype=np.uint8)
        if reserved.any():
            i = index + int(np.argmax(reserved.reshape(-1, 3).any(axis=1)))
            raise DataError(f"record {i}: reserved bytes are not zero", index=i)
        prev_t = np.concatenate(([last], ts[:-1]))
        prev_c = np.concatenate(([last_ch], ch[:-1].astype(np.int64)))
        bad = (ts < prev_t) | ((ts == prev_t) & (ch < prev_c))
        if bad.any():
            i = index + int(np.argmax(bad))
            raise DataError(f"record {i}: timestamps not in (timestamp, channel) order", index=i)
        last, last_ch = int(ts[-1]), int(ch[-1])
        yield ts, ch.copy()
        index += whole
        offset += len(buf)


def read_streams(path):
    """Read a PTT1 file; returns the merged stream (metadata attached)."""
    with open(path, "rb") as fh:
        channel_count, resolution_ps, metadata, data_offset = read_header(fh)
        blocks = list(iter_records(fh, channel_count, data_offset))
    if blocks:
        ts = np.concatenate([b[0] for b in blocks])
        ch = np.concatenate([b[1] for b in blocks])
    else:
        ts = np.empty(0, np.int64)
        ch = np.empty(0, np.uint8)
    return TimeTagStream(resolution_ps, ts, ch, channel_count, metadata)


def export_csv(streams, path):
    """One row per event: timestamp in ps and channel."""
    stream = _merge(streams)
    ps = stream.timestamps * stream.resolution_ps
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp_ps", "channel"])
        w.writerows(zip(ps.tolist(), stream.channels.tolist()))
