"""Loading, band-pass filtering, channel selection and segmentation of recordings.

Input format is CSV with one column per channel and a single header row of
channel names; the sampling rate comes from configuration, never from the
file.  Filtering is zero-phase (forward-backward Butterworth), so the
stated attenuation doubles in dB and phase structure survives embedding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import butter, filtfilt


@dataclass
class RawRecording:
    """Multichannel sampled signal: channel names, (n_channels, n_samples) data, rate."""

    channels: list[str]
    data: np.ndarray
    rate: float
    source_id: str = "recording"

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[0] != len(self.channels):
            raise ValueError("data must be (n_channels, n_samples) matching channel names")
        if len(set(self.channels)) != len(self.channels):
            raise ValueError("channel names must be unique")
        if self.rate <= 0:
            raise ValueError("sampling rate must be positive")

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]


@dataclass
class Segment:
    """One fixed-length window cut from a recording (channels x window samples)."""

    data: np.ndarray
    source_id: str
    index: int
    channels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2:
            raise ValueError("segment data must be (n_channels, window)")

    @property
    def window(self) -> int:
        return self.data.shape[1]


def load_recording(path, channels: list[str] | None = None, rate: float = 128.0,
                   source_id: str | None = None) -> RawRecording:
    """Parse a header+columns CSV into a recording.

    ``channels``, when given, declares the expected channel set and the
    output order; names absent from the file are an error.
    """
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such recording: {p}")
    lines = [ln for ln in p.read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"empty recording file: {p}")
    header = [h.strip() for h in lines[0].split(",")]
    width = len(header)
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        cells = ln.split(",")
        if len(cells) != width:
            raise ValueError(f"ragged rows: line {lineno} has {len(cells)} cells, expected {width}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ValueError(f"non-numeric cell at line {lineno}: {exc}") from None
    data = np.asarray(rows, dtype=float).T.reshape(width, -1)
    if not np.all(np.isfinite(data)):
        raise ValueError("recording contains non-finite values")
    rec = RawRecording(header, data, rate, source_id=source_id or p.stem)
    if channels is not None:
        if len(channels) != width:
            raise ValueError(f"declared channel count {len(channels)} does not match {width} columns")
        rec = select_channels(rec, list(channels))
    return rec


def bandpass_filter(rec: RawRecording, low_hz: float, high_hz: float, order: int = 4) -> RawRecording:
    """Zero-phase Butterworth band-pass, per channel.

    The signal is reflect-padded by 3x the filter order at each end, run
    forward and backward, then trimmed, so length is preserved and edge
    transients stay out of the segments.
    """
    if order not in (2, 4, 6, 8):
        raise ValueError("filter order must be one of 2, 4, 6, 8")
    nyq = rec.rate / 2.0
    if not 0 < low_hz < high_hz < nyq:
        raise ValueError(f"cutoffs must satisfy 0 < low < high < {nyq} Hz")
    b, a = butter(order, [low_hz / nyq, high_hz / nyq], btype="band")
    out = filtfilt(b, a, rec.data, axis=1, padtype="even", padlen=3 * order)
    return RawRecording(list(rec.channels), out, rec.rate, source_id=rec.source_id)


def select_channels(rec: RawRecording, names: list[str]) -> RawRecording:
    """Restrict to the requested channels, in the requested order."""
    pos = {c: i for i, c in enumerate(rec.channels)}
    missing = [n for n in names if n not in pos]
    if missing:
        raise ValueError(f"unknown channel name(s): {missing}")
    idx = [pos[n] for n in names]
    return RawRecording(list(names), rec.data[idx], rec.rate, source_id=rec.source_id)


def segment(rec: RawRecording, window_samples: int) -> list[Segment]:
    """Cut floor(N / window) non-overlapping windows; the remainder is dropped."""
    if window_samples < 1:
        raise ValueError("window must be at least one sample")
    n_full = rec.n_samples // window_samples
    return [
        Segment(
            rec.data[:, k * window_samples:(k + 1) * window_samples].copy(),
            source_id=rec.source_id,
            index=k,
            channels=list(rec.channels),
        )
        for k in range(n_full)
    ]


def save_segments(segments: list[Segment], out_dir, rate: float) -> Path:
    """Write one CSV per segment plus a manifest; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for seg in segments:
        fname = f"{seg.source_id}_seg{seg.index:04d}.csv"
        lines = [",".join(seg.channels)]
        for row in seg.data.T:
            lines.append(",".join(repr(float(v)) for v in row))
        (out / fname).write_text("\n".join(lines) + "\n")
        entries.append({
            "source_id": seg.source_id,
            "index": seg.index,
            "window": seg.window,
            "channels": seg.channels,
            "file": fname,
        })
    manifest = {"rate": rate, "segments": entries}
    mpath = out / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return mpath


def load_segments(manifest_path) -> tuple[list[Segment], float]:
    mpath = Path(manifest_path)
    manifest = json.loads(mpath.read_text())
    segs = []
    for entry in manifest["segments"]:
        rec = load_recording(mpath.parent / entry["file"], rate=manifest["rate"])
        segs.append(Segment(rec.data, entry["source_id"], entry["index"], entry["channels"]))
    return segs, float(manifest["rate"])
