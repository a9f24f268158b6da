import json

import pytest

from svageval.ingest import (
    DatasetSplit,
    GroundTruthBundle,
    IngestError,
    VideoGroundTruth,
    compute_stats,
    load_ground_truth,
    parse_prediction_bundle,
    parse_query_json,
    parse_track_csv,
    validate_split,
)
from svageval.model import (
    BoundingBox,
    Detection,
    PredictionSet,
    Query,
    Referent,
    TemporalSegment,
    Track,
)
from svageval.synth import generate_count_bundle


class TestParseTrackCsv:
    def test_single_line(self, tmp_path):
        path = tmp_path / "gt.txt"
        path.write_text("1,3,10,20,30,40\n")
        tracks = parse_track_csv(path)
        assert len(tracks) == 1
        assert tracks[0].track_id == 3
        assert tracks[0].detections[0] == Detection(
            1, 3, BoundingBox(10, 20, 30, 40))

    def test_non_positive_width(self, tmp_path):
        path = tmp_path / "gt.txt"
        path.write_text("1,3,10,20,0,40\n")
        with pytest.raises(IngestError, match="non-positive width at line 1"):
            parse_track_csv(path)

    def test_duplicate_frame(self, tmp_path):
        path = tmp_path / "gt.txt"
        path.write_text("1,3,10,20,30,40\n1,3,11,21,31,41\n")
        with pytest.raises(IngestError, match="duplicate"):
            parse_track_csv(path)

    def test_crlf_and_no_trailing_newline(self, tmp_path):
        path = tmp_path / "gt.txt"
        path.write_text("1,3,10,20,30,40\r\n2,3,10,20,30,40")
        tracks = parse_track_csv(path)
        assert tracks[0].frames == (1, 2)

    def test_field_count_error_carries_line(self, tmp_path):
        path = tmp_path / "gt.txt"
        path.write_text("1,3,10,20,30,40\n1,4,10,20\n")
        with pytest.raises(IngestError, match="line 2"):
            parse_track_csv(path)

    def test_with_score(self, tmp_path):
        path = tmp_path / "pred.txt"
        path.write_text("1,3,10,20,30,40,0.75\n")
        tracks = parse_track_csv(path, with_score=True)
        assert tracks[0].detections[0].score == 0.75

    def test_missing_file(self, tmp_path):
        with pytest.raises(IngestError, match="cannot read"):
            parse_track_csv(tmp_path / "nope.txt")


def _write_queries(tmp_path, doc):
    path = tmp_path / "queries.json"
    path.write_text(json.dumps(doc))
    return path


class TestParseQueryJson:
    def test_single_query_single_referent(self, tmp_path):
        path = _write_queries(tmp_path, {
            "video_id": "v1",
            "queries": [{"query_id": "q1", "text": "a person is dancing",
                         "referents": [{"track_id": 4,
                                        "segments": [[2543, 2782]]}]}]})
        queries = parse_query_json(path)
        assert queries == [Query("q1", "v1", "a person is dancing",
                                 (Referent(4, (TemporalSegment(2543, 2782),)),))]

    def test_start_exceeds_end(self, tmp_path):
        path = _write_queries(tmp_path, {
            "video_id": "v1",
            "queries": [{"query_id": "q1", "text": "t",
                         "referents": [{"track_id": 4,
                                        "segments": [[10, 5]]}]}]})
        with pytest.raises(IngestError, match="segment start exceeds end"):
            parse_query_json(path)

    def test_duplicate_referent(self, tmp_path):
        path = _write_queries(tmp_path, {
            "video_id": "v1",
            "queries": [{"query_id": "q1", "text": "t",
                         "referents": [
                             {"track_id": 4, "segments": [[1, 5]]},
                             {"track_id": 4, "segments": [[7, 9]]}]}]})
        with pytest.raises(IngestError, match="duplicate referent track_id"):
            parse_query_json(path)

    def test_missing_field_names_json_path(self, tmp_path):
        path = _write_queries(tmp_path, {
            "video_id": "v1",
            "queries": [{"query_id": "q1",
                         "referents": [{"track_id": 4,
                                        "segments": [[1, 2]]}]}]})
        with pytest.raises(IngestError, match=r"queries\[0\]"):
            parse_query_json(path)

    def test_unknown_fields_ignored(self, tmp_path):
        path = _write_queries(tmp_path, {
            "video_id": "v1", "extra": 42,
            "queries": [{"query_id": "q1", "text": "t", "rank": 7,
                         "referents": [{"track_id": 4, "segments": [[1, 2]],
                                        "color": "red"}]}]})
        assert len(parse_query_json(path)) == 1


class TestParsePredictionBundle:
    def _write(self, tmp_path, csv_text, doc):
        csv_path = tmp_path / "pred.txt"
        csv_path.write_text(csv_text)
        json_path = tmp_path / "pred_temporal.json"
        json_path.write_text(json.dumps(doc))
        return csv_path, json_path

    def test_dangling_temporal_reference_dropped(self, tmp_path):
        csv_path, json_path = self._write(
            tmp_path, "1,5,10,20,30,40,1.0\n",
            {"query_id": "q1", "video_id": "v1",
             "tracks": [{"track_id": 7,
                         "segments": [{"start": 1, "end": 5, "score": 0.9}]}]})
        predset, warnings = parse_prediction_bundle(csv_path, json_path)
        assert predset.temporal == {}
        assert len(warnings) == 1

    def test_empty_segments_accepted(self, tmp_path):
        csv_path, json_path = self._write(
            tmp_path, "1,5,10,20,30,40,1.0\n",
            {"query_id": "q1", "video_id": "v1",
             "tracks": [{"track_id": 5, "segments": []}]})
        predset, warnings = parse_prediction_bundle(csv_path, json_path)
        assert predset.temporal == {5: ()}
        assert warnings == []

    def test_round_trip_identity(self, tmp_path):
        csv_path, json_path = self._write(
            tmp_path, "1,5,10,20,30,40,1.0\n2,5,11,21,30,40,0.5\n",
            {"query_id": "q1", "video_id": "v1",
             "tracks": [{"track_id": 5,
                         "segments": [{"start": 1, "end": 2, "score": 0.8}]}]})
        predset, warnings = parse_prediction_bundle(csv_path, json_path)
        assert warnings == []
        assert len(predset.tracks) == 1
        assert predset.tracks[0].frames == (1, 2)
        assert predset.temporal[5][0].segment == TemporalSegment(1, 2)


def _toy_split():
    box = BoundingBox(0, 0, 10, 10)
    track = Track(1, (Detection(1, 1, box), Detection(2, 1, box)))
    query = Query("q1", "v1", "toy", (Referent(1, (TemporalSegment(1, 2),)),))
    bundle = GroundTruthBundle(videos={"v1": VideoGroundTruth(
        "v1", {1: track}, [query])})
    predset = PredictionSet("q1", "v1", (track,), {})
    return DatasetSplit("ovis", bundle, [predset])


class TestValidateSplit:
    def test_clean(self):
        assert validate_split(_toy_split()) == []

    def test_unresolved_referent(self):
        split = _toy_split()
        bad_query = Query("q2", "v1", "bad",
                          (Referent(99, (TemporalSegment(1, 2),)),))
        split.bundle.videos["v1"].queries.append(bad_query)
        diags = validate_split(split)
        assert any("unresolved referent" in d.message for d in diags)

    def test_orphan_prediction(self):
        split = _toy_split()
        split.predictions.append(
            PredictionSet("q9", "v1", (), {}))
        diags = validate_split(split)
        assert any("orphan prediction" in d.message for d in diags)

    def test_segment_past_track_end_warns(self):
        split = _toy_split()
        long_query = Query("q3", "v1", "long",
                           (Referent(1, (TemporalSegment(1, 50),)),))
        split.bundle.videos["v1"].queries.append(long_query)
        diags = validate_split(split)
        assert any(d.severity == "warning" and "extends past" in d.message
                   for d in diags)


class TestComputeStats:
    def test_benchmark_density(self):
        bundle = generate_count_bundle(videos=688, queries=19590, tracks=9781)
        stats = compute_stats(bundle)
        assert stats["videos"] == 688
        assert stats["queries"] == 19590
        assert stats["tracks"] == 9781
        assert stats["queries_per_video"] == 28.47
        assert stats["tracks_per_video"] == 14.22

    def test_single_video(self):
        bundle = generate_count_bundle(videos=1, queries=1, tracks=1)
        stats = compute_stats(bundle)
        assert stats["queries_per_video"] == 1.0
        assert stats["tracks_per_video"] == 1.0

    def test_zero_videos(self):
        with pytest.raises(ValueError):
            compute_stats(GroundTruthBundle())


class TestLoadRoundTrip:
    def test_write_then_load_then_write_is_fixpoint(self, tmp_path):
        from svageval.synth import ScenarioSpec, generate, write_split
        bundle, preds = generate(ScenarioSpec(seed=5, queries=3))
        write_split(tmp_path / "a", "ovis", bundle, preds)
        loaded = load_ground_truth(tmp_path / "a" / "gt", "ovis")
        assert set(loaded.videos) == set(bundle.videos)
        video = loaded.videos["video0001"]
        orig = bundle.videos["video0001"]
        assert list(video.tracks) == list(orig.tracks)
        assert video.queries == orig.queries
        # serialize the reloaded bundle: bytes must match the first write
        write_split(tmp_path / "b", "ovis", loaded)
        first = (tmp_path / "a" / "gt" / "ovis" / "video0001" /
                 "gt.txt").read_bytes()
        second = (tmp_path / "b" / "gt" / "ovis" / "video0001" /
                  "gt.txt").read_bytes()
        assert first == second
