import random

import pytest

from svageval.model import BoundingBox, Detection, ScoredSegment, \
    TemporalSegment, Track
from svageval.idmap import TemporalPair


def make_track(tid, boxes):
    """boxes: iterable of (frame, BoundingBox)."""
    return Track(tid, tuple(Detection(f, tid, b) for f, b in boxes))


def constant_track(tid, box, frames):
    return make_track(tid, [(f, box) for f in frames])


def random_tracks(rng: random.Random, max_tracks, max_frames, id_base):
    """Small random tracks on an integer grid (ties are common on purpose)."""
    n_frames = rng.randint(1, max_frames)
    tracks = []
    for t in range(rng.randint(0, max_tracks)):
        tid = id_base + t
        dets = []
        for f in range(1, n_frames + 1):
            if rng.random() < 0.75:
                dets.append(Detection(f, tid, BoundingBox(
                    x=rng.randint(0, 12), y=rng.randint(0, 12),
                    w=rng.randint(3, 8), h=rng.randint(3, 8))))
        if dets:
            tracks.append(Track(tid, tuple(dets)))
    return tracks


def random_pairs(rng: random.Random, max_pairs=6, max_candidates=12):
    pairs = []
    for _ in range(rng.randint(1, max_pairs)):
        gts = []
        pos = 1
        for _ in range(rng.randint(1, 3)):
            start = pos + rng.randint(0, 5)
            end = start + rng.randint(0, 10)
            gts.append(TemporalSegment(start, end))
            pos = end + 2
        cands = []
        for _ in range(rng.randint(0, max_candidates)):
            start = rng.randint(1, 40)
            cands.append(ScoredSegment(
                TemporalSegment(start, start + rng.randint(0, 12)),
                round(rng.random(), 2)))
        pairs.append(TemporalPair("q", 1, tuple(gts), tuple(cands)))
    return pairs


@pytest.fixture
def unit_box():
    return BoundingBox(0, 0, 10, 10)
