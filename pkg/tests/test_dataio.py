"""TSV/CSV readers and writers, class mapping, line-numbered errors."""

import numpy as np
import pytest

from sedtk.dataio import (
    DEFAULT_CLASS_MAP,
    apply_class_map,
    read_annotations,
    read_class_map,
    read_durations,
    read_scores,
    write_durations,
    write_events,
    write_scores,
)
from sedtk.errors import (
    InvalidIntervalError,
    InvalidParameterError,
    NonContiguousFramesError,
    ParseError,
    ScoreOutOfRangeError,
)
from sedtk.metrics import Event
from sedtk.sebb import ScoreTrack


class TestAnnotations:
    def test_basic_row(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("filename\tonset\toffset\tevent_label\na.wav\t1.0\t2.5\tdog\n")
        annos = read_annotations(path)
        assert annos.events == [Event("a.wav", "dog", 1.0, 2.5)]

    def test_invalid_interval_carries_line(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text(
            "filename\tonset\toffset\tevent_label\n"
            "a.wav\t1.0\t2.5\tdog\n"
            "a.wav\t3.0\t3.0\tcat\n"
        )
        with pytest.raises(InvalidIntervalError) as err:
            read_annotations(path)
        assert err.value.line == 3

    def test_bad_header(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("file,onset,offset,label\n")
        with pytest.raises(ParseError):
            read_annotations(path)

    def test_bad_float_carries_line(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("filename\tonset\toffset\tevent_label\na.wav\tx\t2.0\tdog\n")
        with pytest.raises(ParseError) as err:
            read_annotations(path)
        assert err.value.line == 2

    def test_round_trip(self, tmp_path):
        events = [
            Event("b.wav", "cat", 0.123456, 4.5),
            Event("a.wav", "dog", 1.0, 2.5),
            Event("a.wav", "dog", 0.25, 0.75),
        ]
        path = tmp_path / "e.tsv"
        write_events(events, path)
        back = read_annotations(path).events
        assert len(back) == 3
        # sorted by (clip, onset, class); values preserved to 1e-6
        assert [e.clip_id for e in back] == ["a.wav", "a.wav", "b.wav"]
        for got, want in zip(
            back, sorted(events, key=lambda e: (e.clip_id, e.onset_s, e.class_name))
        ):
            assert got.class_name == want.class_name
            assert got.onset_s == pytest.approx(want.onset_s, abs=1e-6)
            assert got.offset_s == pytest.approx(want.offset_s, abs=1e-6)
        # second write is byte-stable
        path2 = tmp_path / "e2.tsv"
        write_events(back, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_empty_list_gives_header_only(self, tmp_path):
        path = tmp_path / "e.tsv"
        write_events([], path)
        assert path.read_text() == "filename\tonset\toffset\tevent_label\n"

    def test_three_events_make_four_lines(self, tmp_path):
        events = [Event("a", "dog", float(i), i + 0.5) for i in range(3)]
        path = tmp_path / "e.tsv"
        write_events(events, path)
        assert len(path.read_text().splitlines()) == 4


class TestDurations:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "d.tsv"
        write_durations({"b": 12.5, "a": 600.0}, path)
        assert read_durations(path) == {"a": 600.0, "b": 12.5}

    def test_rejects_nonpositive(self, tmp_path):
        path = tmp_path / "d.tsv"
        path.write_text("a\t0.0\n")
        with pytest.raises(ParseError) as err:
            read_durations(path)
        assert err.value.line == 1


class TestClassMap:
    def test_named_pairs(self):
        events = [
            Event("a", "dog_bark", 0.0, 1.0),
            Event("a", "cutlery_and_dishes", 1.0, 2.0),
            Event("a", "blender", 2.0, 3.0),
        ]
        mapped = apply_class_map(events, DEFAULT_CLASS_MAP)
        assert [e.class_name for e in mapped] == ["Dog", "Dishes", "blender"]

    def test_speech_superclass(self):
        names = ["people_talking", "children_voices", "announcements", "car"]
        assert apply_class_map(names, DEFAULT_CLASS_MAP) == [
            "Speech", "Speech", "Speech", "car",
        ]

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "map.tsv"
        path.write_text("# comment\ndog_bark\tDog\ncutlery_and_dishes\tDishes\n")
        assert read_class_map(path) == {
            "dog_bark": "Dog", "cutlery_and_dishes": "Dishes",
        }

    def test_chain_rejected(self):
        with pytest.raises(InvalidParameterError):
            apply_class_map(["a"], {"a": "b", "b": "c"})

    def test_bad_line(self, tmp_path):
        path = tmp_path / "map.tsv"
        path.write_text("only_one_field\n")
        with pytest.raises(ParseError) as err:
            read_class_map(path)
        assert err.value.line == 1


class TestScores:
    def _tracks(self):
        rng = np.random.default_rng(0)
        return [
            ScoreTrack(
                scores=rng.uniform(size=(3, 5)),
                hop_seconds=0.016,
                class_names=("dog", "cat", "speech"),
                clip_id=f"clip{i}",
            )
            for i in range(2)
        ]

    def test_round_trip(self, tmp_path):
        tracks = self._tracks()
        path = tmp_path / "s.csv"
        write_scores(tracks, path)
        back = read_scores(path)
        assert len(back) == 2
        for got, want in zip(back, tracks):
            assert got.clip_id == want.clip_id
            assert got.class_names == want.class_names
            assert got.hop_seconds == pytest.approx(want.hop_seconds)
            assert got.scores.shape == (3, 5)
            np.testing.assert_allclose(got.scores, want.scores, atol=1e-6)

    def test_out_of_range_score(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text(
            "# hop_seconds=0.016\nclip_id,frame,dog\nc0,0,1.2\n"
        )
        with pytest.raises(ScoreOutOfRangeError) as err:
            read_scores(path)
        assert err.value.line == 3

    def test_non_contiguous_frames(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text(
            "# hop_seconds=0.016\nclip_id,frame,dog\nc0,0,0.5\nc0,2,0.5\n"
        )
        with pytest.raises(NonContiguousFramesError) as err:
            read_scores(path)
        assert err.value.line == 4

    def test_missing_hop(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("clip_id,frame,dog\nc0,0,0.5\n")
        with pytest.raises(ParseError):
            read_scores(path)

    def test_field_count_checked(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("# hop_seconds=0.02\nclip_id,frame,dog\nc0,0\n")
        with pytest.raises(ParseError) as err:
            read_scores(path)
        assert err.value.line == 3
