"""In-memory container for time-tagged detection events."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ParameterError

# channel numbers used by the simulator
APD1, APD2, APD3, APD4 = 0, 1, 2, 3
CHANNEL_NAMES = {APD1: "APD1", APD2: "APD2", APD3: "APD3", APD4: "APD4"}


@dataclass
class TimeTagStream:
    """Merged event list ordered by (timestamp, channel).

    ``timestamps`` are integer ticks of ``resolution_ps`` picoseconds.
    """

    resolution_ps: int
    timestamps: np.ndarray
    channels: np.ndarray
    channel_count: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.resolution_ps = int(self.resolution_ps)
        if self.resolution_ps < 1:
            raise ParameterError("resolution_ps must be >= 1")
        if self.channel_count < 1:
            raise ParameterError("channel_count must be >= 1")
        self.timestamps = np.ascontiguousarray(self.timestamps, dtype=np.int64)
        self.channels = np.ascontiguousarray(self.channels, dtype=np.uint8)
        if self.timestamps.shape != self.channels.shape or self.timestamps.ndim != 1:
            raise DataError("timestamps and channels must be 1-D arrays of equal length")
        if len(self.channels) and int(self.channels.max()) >= self.channel_count:
            raise DataError("channel outside the declared channel set")
        if len(self.timestamps) and self.timestamps[0] < 0:
            raise DataError("negative timestamp")
        if len(self.timestamps) > 1:
            dt = np.diff(self.timestamps)
            bad = (dt < 0) | ((dt == 0) & (np.diff(self.channels.astype(np.int16)) < 0))
            if bad.any():
                raise DataError("events not ordered by (timestamp, channel)",
                                index=int(np.argmax(bad)) + 1)

    @classmethod
    def from_channels(cls, per_channel, resolution_ps=1, channel_count=None, metadata=None):
        """Merge per-channel tick arrays ``{channel: ticks}``."""
        if channel_count is None:
            channel_count = max(per_channel, default=-1) + 1
        ts, ch = [], []
        for c, t in per_channel.items():
            t = np.asarray(t, dtype=np.int64)
            ts.append(t)
            ch.append(np.full(len(t), c, dtype=np.uint8))
        if ts:
            ts = np.concatenate(ts)
            ch = np.concatenate(ch)
            order = np.lexsort((ch, ts))
            ts, ch = ts[order], ch[order]
        else:
            ts = np.empty(0, np.int64)
            ch = np.empty(0, np.uint8)
        return cls(resolution_ps, ts, ch, max(channel_count, 1), dict(metadata or {}))

    def __len__(self):
        return len(self.timestamps)

    def channel(self, ch):
        """Ticks of one channel, sorted."""
        return self.timestamps[self.channels == ch]

    def times_ps(self, ch):
        """Timestamps of one channel in picoseconds."""
        return self.channel(ch) * self.resolution_ps

    def counts(self):
        return np.bincount(self.channels, minlength=self.channel_count)

    @property
    def duration_s(self):
        """Acquisition time: metadata value if recorded, else the span of the tags."""
        if "duration_s" in self.metadata:
            return float(self.metadata["duration_s"])
        if len(self.timestamps) == 0:
            return 0.0
        return float(self.timestamps[-1] - self.timestamps[0]) * self.resolution_ps * 1e-12

    def __eq__(self, other):
        if not isinstance(other, TimeTagStream):
            return NotImplemented
        return (self.resolution_ps == other.resolution_ps
                and self.channel_count == other.channel_count
                and np.array_equal(self.timestamps, other.timestamps)
                and np.array_equal(self.channels, other.channels))
