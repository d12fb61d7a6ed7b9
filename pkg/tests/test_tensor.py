import numpy as np
import pytest

from mmchar.errors import InvalidInputError
from mmchar.geometry import canonical_numbering
from mmchar.tensor import ChannelTensor, TimeWindow, segment_windows, select_antennas

from conftest import make_tensor


class TestChannelTensor:
    def test_shape_and_counts(self, rng):
        t = make_tensor(rng, n=5, f=2, m=3)
        assert (t.num_snapshots, t.num_freqs, t.num_antennas) == (5, 2, 3)

    def test_rejects_non_finite(self):
        data = np.ones((2, 1, 2), dtype=complex)
        data[0, 0, 0] = np.nan
        with pytest.raises(InvalidInputError):
            ChannelTensor("p", data)

    def test_rejects_wrong_ndim(self):
        with pytest.raises(InvalidInputError):
            ChannelTensor("p", np.ones((2, 2), dtype=complex))

    def test_immutable(self, rng):
        t = make_tensor(rng)
        with pytest.raises(ValueError):
            t.data[0, 0, 0] = 0


class TestSelectAntennas:
    def test_full_selection_is_identity(self, rng):
        t = make_tensor(rng, m=8)
        geom = canonical_numbering("ula", 1, 8)
        sel = select_antennas(t, geom, count=8, start_index=0)
        np.testing.assert_array_equal(sel.data, t.data)

    def test_ula_subsequent_slice(self, rng):
        t = make_tensor(rng, m=32)
        geom = canonical_numbering("ula", 1, 32)
        sel = select_antennas(t, geom, count=8, start_index=3)
        np.testing.assert_array_equal(sel.data, t.data[:, :, 3:11])

    def test_ura_selection_spans_columns(self, rng):
        # 8 subsequent elements starting at 4 on a 4x8 URA cover columns 1 and 2
        t = make_tensor(rng, m=32)
        geom = canonical_numbering("ura", 4, 8)
        sel = select_antennas(t, geom, count=8, start_index=4)
        cols = {geom.position_of(i)[1] for i in range(4, 12)}
        assert cols == {1, 2}
        np.testing.assert_array_equal(sel.data, t.data[:, :, 4:12])

    def test_out_of_bounds(self, rng):
        t = make_tensor(rng, m=4)
        geom = canonical_numbering("ula", 1, 4)
        with pytest.raises(IndexError):
            select_antennas(t, geom, count=3, start_index=2)
        with pytest.raises(IndexError):
            select_antennas(t, geom, count=0, start_index=0)

    def test_composition(self, rng):
        # selecting (a..b) then (0..c) equals selecting (a..a+c) directly
        t = make_tensor(rng, m=16)
        geom16 = canonical_numbering("ula", 1, 16)
        geom6 = canonical_numbering("ula", 1, 6)
        once = select_antennas(select_antennas(t, geom16, 6, 5), geom6, 4, 0)
        direct = select_antennas(t, geom16, 4, 5)
        np.testing.assert_array_equal(once.data, direct.data)

    def test_does_not_mutate(self, rng):
        t = make_tensor(rng, m=8)
        before = t.data.copy()
        select_antennas(t, canonical_numbering("ula", 1, 8), 3, 1)
        np.testing.assert_array_equal(t.data, before)


class TestSegmentWindows:
    def test_paper_scale_segmentation(self, rng):
        t = make_tensor(rng, n=6000, f=1, m=2)
        windows = segment_windows(t, 600)
        assert len(windows) == 10
        assert [w.start for w in windows] == [600 * i for i in range(10)]

    def test_exact_fit_single_window(self, rng):
        t = make_tensor(rng, n=100, f=1, m=2)
        assert segment_windows(t, 100) == [TimeWindow(0, 100)]

    def test_insufficient_data_gives_empty(self, rng):
        t = make_tensor(rng, n=599, f=1, m=2)
        assert segment_windows(t, 600) == []

    def test_windows_disjoint_and_cover_prefix(self, rng):
        t = make_tensor(rng, n=57, f=1, m=2)
        windows = segment_windows(t, 10)
        covered = []
        for w in windows:
            covered.extend(range(w.start, w.stop))
        assert covered == list(range(50))

    def test_invalid_window_length(self, rng):
        with pytest.raises(InvalidInputError):
            segment_windows(make_tensor(rng), 0)
