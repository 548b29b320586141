import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.signal import butter, freqz

from topofeat.ingest import (RawRecording, bandpass_filter, load_recording,
                             load_segments, save_segments, segment, select_channels)

TEN_TWENTY = ["Fz", "Cz", "Pz", "C3", "T3", "C4", "T4", "Fp1", "Fp2", "F3",
              "F4", "F7", "F8", "P3", "P4", "T5", "T6", "O1", "O2"]


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")


class TestLoadRecording:
    def test_two_channel_csv(self, tmp_path):
        p = tmp_path / "rec.csv"
        write_csv(p, ["a", "b"], [[1, 2], [3, 4], [5, 6], [7, 8]])
        rec = load_recording(p, rate=128.0)
        assert rec.channels == ["a", "b"]
        assert rec.data.shape == (2, 4)
        assert rec.data[1].tolist() == [2.0, 4.0, 6.0, 8.0]

    def test_ragged_rows(self, tmp_path):
        p = tmp_path / "rec.csv"
        p.write_text("a,b\n1,2\n3\n")
        with pytest.raises(ValueError, match="ragged rows"):
            load_recording(p)

    def test_non_numeric_cell(self, tmp_path):
        p = tmp_path / "rec.csv"
        p.write_text("a,b\n1,x\n")
        with pytest.raises(ValueError, match="non-numeric"):
            load_recording(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_recording(tmp_path / "nope.csv")

    def test_declared_layout_orders_channels(self, tmp_path, rng):
        p = tmp_path / "rec.csv"
        shuffled = list(TEN_TWENTY)
        rng.shuffle(shuffled)
        write_csv(p, shuffled, rng.normal(size=(5, 19)).tolist())
        rec = load_recording(p, channels=TEN_TWENTY, rate=128.0)
        assert rec.channels == TEN_TWENTY

    def test_unknown_declared_channel(self, tmp_path):
        p = tmp_path / "rec.csv"
        write_csv(p, ["a", "b"], [[1, 2]])
        with pytest.raises(ValueError, match="unknown channel"):
            load_recording(p, channels=["a", "XX"])


class TestBandpass:
    RATE = 128.0

    def run_sine(self, freq, seconds=20):
        t = np.arange(int(self.RATE * seconds)) / self.RATE
        sig = np.sin(2 * np.pi * freq * t)
        rec = RawRecording(["c"], sig.reshape(1, -1), self.RATE)
        out = bandpass_filter(rec, 0.5, 50.0, 4).data[0]
        mid = out[len(out) // 4: 3 * len(out) // 4]
        return (mid.max() - mid.min()) / 2

    def analytic_gain_sq(self, freq):
        # zero-phase application squares the one-pass magnitude response
        b, a = butter(4, [0.5 / 64, 50.0 / 64], btype="band")
        _, h = freqz(b, a, worN=[2 * np.pi * freq / self.RATE])
        return float(np.abs(h[0]) ** 2)

    def test_dc_rejected(self):
        rec = RawRecording(["c"], np.ones((1, 2560)), self.RATE)
        out = bandpass_filter(rec, 0.5, 50.0, 4).data[0]
        assert np.abs(out[256:-256]).max() < 1e-3

    def test_passband_10hz(self):
        assert self.analytic_gain_sq(10.0) == pytest.approx(1.0, abs=1e-6)
        assert self.run_sine(10.0) == pytest.approx(1.0, rel=0.02)

    def test_stopband_60hz(self):
        analytic_db = -10 * np.log10(self.analytic_gain_sq(60.0))
        assert analytic_db >= 10.0
        measured_db = -20 * np.log10(self.run_sine(60.0))
        assert measured_db >= 10.0

    def test_length_preserved(self, rng):
        rec = RawRecording(["c"], rng.normal(size=(1, 700)), self.RATE)
        assert bandpass_filter(rec, 0.5, 50.0, 4).data.shape == (1, 700)

    def test_linearity(self, rng):
        x = rng.normal(size=(1, 1000))
        y = rng.normal(size=(1, 1000))
        a, b = 2.5, -1.25
        fx = bandpass_filter(RawRecording(["c"], x, self.RATE), 0.5, 50.0, 4).data
        fy = bandpass_filter(RawRecording(["c"], y, self.RATE), 0.5, 50.0, 4).data
        fxy = bandpass_filter(RawRecording(["c"], a * x + b * y, self.RATE), 0.5, 50.0, 4).data
        scale = np.abs(fxy).max()
        assert np.abs(fxy - (a * fx + b * fy)).max() / scale < 1e-9

    def test_bad_cutoffs(self):
        rec = RawRecording(["c"], np.zeros((1, 100)), self.RATE)
        with pytest.raises(ValueError):
            bandpass_filter(rec, 0.5, 70.0, 4)
        with pytest.raises(ValueError):
            bandpass_filter(rec, 50.0, 0.5, 4)

    def test_odd_order(self):
        rec = RawRecording(["c"], np.zeros((1, 100)), self.RATE)
        with pytest.raises(ValueError, match="order"):
            bandpass_filter(rec, 0.5, 50.0, 3)


class TestSelectChannels:
    def make(self, rng):
        return RawRecording(TEN_TWENTY, rng.normal(size=(19, 30)), 128.0)

    def test_relevant_six(self, rng):
        rec = self.make(rng)
        out = select_channels(rec, ["Fz", "F8", "F3", "C4", "C3", "F7"])
        assert out.channels == ["Fz", "F8", "F3", "C4", "C3", "F7"]
        assert np.array_equal(out.data[0], rec.data[0])
        assert np.array_equal(out.data[1], rec.data[12])

    def test_identity(self, rng):
        rec = self.make(rng)
        out = select_channels(rec, TEN_TWENTY)
        assert out.channels == rec.channels
        assert np.array_equal(out.data, rec.data)

    def test_unknown_name(self, rng):
        with pytest.raises(ValueError, match="unknown channel"):
            select_channels(self.make(rng), ["Fz", "XX"])

    def test_idempotent(self, rng):
        rec = self.make(rng)
        names = ["Pz", "O1", "Fz"]
        once = select_channels(rec, names)
        twice = select_channels(once, names)
        assert once.channels == twice.channels
        assert np.array_equal(once.data, twice.data)


class TestSegment:
    def test_window_samples_at_128hz(self):
        assert int(round(4.0 * 128.0)) == 512

    def test_floor_division(self, rng):
        rec = RawRecording(["a"], rng.normal(size=(1, 1100)), 128.0)
        segs = segment(rec, 512)
        assert len(segs) == 2
        assert all(s.window == 512 for s in segs)

    def test_too_short(self, rng):
        rec = RawRecording(["a"], rng.normal(size=(1, 511)), 128.0)
        assert segment(rec, 512) == []

    @given(n=st.integers(1, 400), w=st.integers(1, 97))
    def test_reconstruction(self, n, w):
        data = np.arange(2 * n, dtype=float).reshape(2, n)
        rec = RawRecording(["a", "b"], data, 10.0)
        segs = segment(rec, w)
        used = n - n % w
        if segs:
            rebuilt = np.concatenate([s.data for s in segs], axis=1)
            assert np.array_equal(rebuilt, data[:, :used])
        assert len(segs) == n // w

    def test_segment_metadata(self, rng):
        rec = RawRecording(["a"], rng.normal(size=(1, 100)), 128.0, source_id="s7")
        segs = segment(rec, 30)
        assert [s.index for s in segs] == [0, 1, 2]
        assert all(s.source_id == "s7" for s in segs)


class TestSegmentIO:
    def test_roundtrip(self, tmp_path, rng):
        rec = RawRecording(["a", "b"], rng.normal(size=(2, 64)), 32.0, source_id="subj")
        segs = segment(rec, 32)
        manifest = save_segments(segs, tmp_path, 32.0)
        loaded, rate = load_segments(manifest)
        assert rate == 32.0
        assert len(loaded) == 2
        assert np.allclose(loaded[0].data, segs[0].data)
        assert loaded[1].source_id == "subj"
