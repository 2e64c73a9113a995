"""Stage-2 transform: merge per-second pings into STOP/MOVE segments and per-zone dwell."""

import logging
from datetime import date, timedelta
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from models.errors import TrajectoryError
from models.ping import SUS, Ping
from models.segment import MOVE, STOP, Segment, SegmentationParams, SegmentationResult, ZoneDwell
from models.zone import UNZONED_KEY, StoreMap
from pipeline.storemap import locate

logger = logging.getLogger(__name__)


def order_track(pings: Sequence[Ping]) -> List[Ping]:
    """
    Sort one customer-day's pings by time.

    Raises:
        TrajectoryError: NON_MONOTONIC_AFTER_SORT if two pings share a second
    """
    series = sorted(pings, key=lambda p: p.ts)
    for prev, cur in zip(series, series[1:]):
        if cur.ts <= prev.ts:
            raise TrajectoryError('NON_MONOTONIC_AFTER_SORT',
                                  f"customer {cur.customer_id} has two fixes at {cur.ts.isoformat()}")
    return series


def kinematics(series: Sequence[Ping]) -> List[Tuple[float, float]]:
    """
    Per-interval (distance_m, speed_m_s) between consecutive fixes.

    Raises:
        TrajectoryError: SERIES_TOO_SHORT for fewer than two pings
    """
    if len(series) < 2:
        raise TrajectoryError('SERIES_TOO_SHORT', f"kinematics needs at least 2 pings, got {len(series)}")
    t, xy = _arrays(series)
    distance, dt = _steps(t, xy)
    speed = distance / dt
    return [(float(d), float(s)) for d, s in zip(distance, speed)]


def segment(series: Sequence[Ping], params: SegmentationParams,
            statuses_present: Optional[bool] = None) -> SegmentationResult:
    """
    Split an ordered series into STOP and MOVE segments.

    With statuses present the segments are the runs of SUS/MIG labels (unlabelled
    pings take the threshold label); otherwise STOPs come from the radius/duration
    rule and the time between them becomes MOVE. Gaps longer than max_gap_s cut
    the track into independent sub-tracks.

    Args:
        series: pings of one customer-day in strictly increasing time order
        params: segmentation thresholds
        statuses_present: None means "use labels when every ping carries one"

    Returns:
        SegmentationResult with segments in time order and diagnostics
    """
    result = SegmentationResult()
    if not series:
        return result
    if statuses_present is None:
        statuses_present = all(p.status for p in series)

    t, xy = _arrays(series)
    result.span_s = float(t[-1] - t[0])
    tracks = _sub_tracks(t, params.max_gap_s)
    for lo, hi in tracks:
        if hi - lo == 1:
            result.orphan_pings += 1
            continue
        sub = series[lo:hi]
        sub_t, sub_xy = t[lo:hi], xy[lo:hi]
        windows = stop_windows(sub_t, sub_xy, params)
        if statuses_present:
            threshold_labels = _labels_from_windows(len(sub), windows)
            labels = [STOP if p.status == SUS else MOVE if p.status else threshold_labels[k]
                      for k, p in enumerate(sub)]
            conflicts = sum(1 for a, b in zip(labels, threshold_labels) if a != b)
            result.status_conflicts += conflicts
            result.segments.extend(_run_segments(sub, sub_xy, labels))
        else:
            result.segments.extend(_threshold_segments(sub, sub_t, sub_xy, windows))
    for (_, hi), (lo, _) in zip(tracks, tracks[1:]):
        result.gap_split_s += float(t[lo] - t[hi - 1])

    if result.status_conflicts:
        logger.warning("customer %s: %d pings labelled against the threshold rule; source labels kept",
                       series[0].customer_id, result.status_conflicts)
    if result.orphan_pings:
        logger.warning("customer %s: %d orphan pings produce no segment", series[0].customer_id, result.orphan_pings)
    return result


def stop_windows(t: np.ndarray, xy: np.ndarray, params: SegmentationParams) -> List[Tuple[int, int]]:
    """
    Inclusive index windows (i, j) that qualify as STOPs on one sub-track.

    From i the window grows while every prefix fits inside stop_radius_m of its
    own centroid. A window lasting at least min_stop_duration_s is a STOP, except
    that while dropping its first ping lets a still qualifying window reach
    further, the start slides forward. The scan then resumes after the STOP;
    a window that is too short moves the scan to i + 1.
    """
    windows = []
    n = len(t)
    i = 0
    while i < n - 1:
        j = _reach(xy, i, params.stop_radius_m)
        if t[j] - t[i] < params.min_stop_duration_s:
            i += 1
            continue
        while j + 1 < n and _fits(xy[i + 1:j + 2], params.stop_radius_m):
            k = _reach(xy, i + 1, params.stop_radius_m)
            if k <= j or t[k] - t[i + 1] < params.min_stop_duration_s:
                break
            i, j = i + 1, k
        windows.append((i, j))
        i = j + 1
    return windows


def attribute_zones(segments: Sequence[Segment], store_map: StoreMap) -> List[Segment]:
    """Set each segment's area_key to the zone holding its anchor (None in unzoned space)."""
    return [s.with_area(locate(store_map, s.anchor_x, s.anchor_y)) for s in segments]


def visit_starts(segments: Sequence[Segment]) -> List[bool]:
    """True where a segment opens a new maximal run of consecutive segments in one zone."""
    flags = []
    previous = object()
    for seg in segments:
        area = _area(seg)
        flags.append(area != previous)
        previous = area
    return flags


def zone_dwell(segments: Sequence[Segment], day: date) -> List[ZoneDwell]:
    """
    Aggregate one customer-day's attributed segments per zone.

    Unzoned time is reported under the reserved UNZONED key 0. Rows are ordered by area key.
    """
    dwell: Dict[int, ZoneDwell] = {}
    for seg, starts in zip(segments, visit_starts(segments)):
        area = _area(seg)
        row = dwell.setdefault(area, ZoneDwell(customer_id=seg.customer_id, date=day, area_key=area))
        row.dwell_s += seg.duration_s
        if seg.kind == STOP:
            row.stop_s += seg.duration_s
        if starts:
            row.visit_count += 1
    return [dwell[key] for key in sorted(dwell)]


def check_time_conservation(series: Sequence[Ping], result: SegmentationResult, max_gap_s: float) -> None:
    """
    Segment durations must cover the day's span minus the gap-split time, exactly.

    Raises:
        TrajectoryError: INVARIANT_VIOLATION
    """
    if not series:
        return
    covered = sum((s.t_end - s.t_start for s in result.segments), timedelta())
    span = series[-1].ts - series[0].ts
    gaps = sum((cur.ts - prev.ts for prev, cur in zip(series, series[1:])
                if (cur.ts - prev.ts).total_seconds() > max_gap_s), timedelta())
    if covered != span - gaps:
        raise TrajectoryError('INVARIANT_VIOLATION',
                              f"customer {series[0].customer_id}: segments cover {covered.total_seconds()} s "
                              f"but the track spans {(span - gaps).total_seconds()} s outside gaps")


def _area(seg: Segment) -> int:
    return UNZONED_KEY if seg.area_key is None else seg.area_key


def _arrays(series: Sequence[Ping]) -> Tuple[np.ndarray, np.ndarray]:
    origin = series[0].ts
    t = np.array([(p.ts - origin).total_seconds() for p in series], dtype=float)
    xy = np.array([(p.x, p.y) for p in series], dtype=float).reshape(-1, 2)
    return t, xy


def _steps(t: np.ndarray, xy: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    delta = np.diff(xy, axis=0)
    return np.hypot(delta[:, 0], delta[:, 1]), np.diff(t)


def _sub_tracks(t: np.ndarray, max_gap_s: float) -> List[Tuple[int, int]]:
    """Half-open index ranges [lo, hi) separated by gaps longer than max_gap_s."""
    cuts = [int(k) + 1 for k in np.flatnonzero(np.diff(t) > max_gap_s)]
    bounds = [0] + cuts + [len(t)]
    return list(zip(bounds[:-1], bounds[1:]))


def _fits(window: np.ndarray, radius: float) -> bool:
    centroid = window.mean(axis=0)
    return bool(np.all(np.hypot(window[:, 0] - centroid[0], window[:, 1] - centroid[1]) <= radius))


def _reach(xy: np.ndarray, i: int, radius: float) -> int:
    """Last index j such that every window i..k with k <= j fits."""
    j = i
    while j + 1 < len(xy) and _fits(xy[i:j + 2], radius):
        j += 1
    return j


def _labels_from_windows(n: int, windows: List[Tuple[int, int]]) -> List[str]:
    labels = [MOVE] * n
    for i, j in windows:
        labels[i:j + 1] = [STOP] * (j - i + 1)
    return labels


def _path_length_and_anchor(path: np.ndarray) -> Tuple[float, float, float]:
    """Total length of a polyline and the point halfway along it."""
    if len(path) < 2:
        return 0.0, float(path[0, 0]), float(path[0, 1])
    delta = np.diff(path, axis=0)
    legs = np.hypot(delta[:, 0], delta[:, 1])
    cumulative = np.concatenate(([0.0], np.cumsum(legs)))
    total = float(cumulative[-1])
    if total == 0.0:
        return 0.0, float(path[0, 0]), float(path[0, 1])
    half = total / 2.0
    k = int(np.searchsorted(cumulative, half, side='right')) - 1
    k = min(max(k, 0), len(legs) - 1)
    frac = (half - cumulative[k]) / legs[k] if legs[k] > 0 else 0.0
    point = path[k] + frac * (path[k + 1] - path[k])
    return total, float(point[0]), float(point[1])


def _stop(customer_id, t_start, t_end, members: np.ndarray) -> Segment:
    cx, cy = members.mean(axis=0)
    return Segment(customer_id, STOP, t_start, t_end, 0.0, float(cx), float(cy))


def _move(customer_id, t_start, t_end, path: np.ndarray) -> Segment:
    distance, ax, ay = _path_length_and_anchor(path)
    return Segment(customer_id, MOVE, t_start, t_end, distance, ax, ay)


def _threshold_segments(sub: Sequence[Ping], t: np.ndarray, xy: np.ndarray,
                        windows: List[Tuple[int, int]]) -> List[Segment]:
    customer_id = sub[0].customer_id
    segments = []
    cursor = 0
    for i, j in windows:
        if i > cursor:
            segments.append(_move(customer_id, sub[cursor].ts, sub[i].ts, xy[cursor:i + 1]))
        segments.append(_stop(customer_id, sub[i].ts, sub[j].ts, xy[i:j + 1]))
        cursor = j
    if cursor < len(sub) - 1:
        segments.append(_move(customer_id, sub[cursor].ts, sub[-1].ts, xy[cursor:]))
    return segments


def _run_segments(sub: Sequence[Ping], xy: np.ndarray, labels: List[str]) -> List[Segment]:
    customer_id = sub[0].customer_id
    runs = []
    start = 0
    for k in range(1, len(sub) + 1):
        if k == len(sub) or labels[k] != labels[start]:
            runs.append((start, k - 1, labels[start]))
            start = k

    segments = []
    t_start, p_start = sub[0].ts, None
    for n, (lo, hi, label) in enumerate(runs):
        if n + 1 < len(runs):
            nxt = hi + 1
            t_end = sub[hi].ts + (sub[nxt].ts - sub[hi].ts) / 2
            p_end = (xy[hi] + xy[nxt]) / 2.0
        else:
            t_end, p_end = sub[hi].ts, None
        if label == STOP:
            segments.append(_stop(customer_id, t_start, t_end, xy[lo:hi + 1]))
        else:
            parts = ([p_start] if p_start is not None else []) + list(xy[lo:hi + 1]) + \
                    ([p_end] if p_end is not None else [])
            segments.append(_move(customer_id, t_start, t_end, np.array(parts, dtype=float)))
        t_start, p_start = t_end, p_end
    return segments
