import math
import unittest
from datetime import date, datetime, timedelta, timezone

import numpy as np

from models.errors import TrajectoryError
from models.ping import MIG, SUS, Ping
from models.segment import MOVE, STOP, SegmentationParams
from models.zone import UNZONED_KEY
from pipeline.trajectory import (
    attribute_zones, check_time_conservation, kinematics, order_track, segment, stop_windows, visit_starts,
    zone_dwell,
)

from tests import sample_data

START = datetime(2024, 3, 4, 10, 0, 0, tzinfo=timezone.utc)


class TrajectoryTestCase(unittest.TestCase):

    def setUp(self):
        self.params = SegmentationParams()

    def make_series(self, points, customer_id='C1'):
        """Helper method to build pings from (seconds, x, y[, status]) tuples."""
        pings = []
        for point in points:
            t, x, y = point[:3]
            status = point[3] if len(point) > 3 else None
            pings.append(Ping(customer_id, START + timedelta(seconds=t), float(x), float(y), status))
        return pings


class TestOrderAndKinematics(TrajectoryTestCase):

    def test_order_track_sorts_by_time(self):
        series = order_track(self.make_series([(2, 0, 0), (0, 0, 0), (1, 0, 0)]))
        self.assertEqual([p.ts for p in series], [START + timedelta(seconds=s) for s in (0, 1, 2)])

    def test_order_track_rejects_shared_second(self):
        with self.assertRaises(TrajectoryError) as ctx:
            order_track(self.make_series([(0, 0, 0), (0, 1, 1)]))
        self.assertEqual(ctx.exception.code, 'NON_MONOTONIC_AFTER_SORT')

    def test_three_four_five(self):
        self.assertEqual(kinematics(self.make_series([(0, 0, 0), (1, 3, 4)])), [(5.0, 5.0)])

    def test_speed_uses_elapsed_time(self):
        self.assertEqual(kinematics(self.make_series([(0, 0, 0), (2, 3, 4)])), [(5.0, 2.5)])

    def test_speed_times_interval_is_distance(self):
        rng = np.random.default_rng(7)
        steps = np.cumsum(rng.integers(1, 5, size=40))
        coords = rng.uniform(0, 30, size=(40, 2))
        series = self.make_series([(int(t), x, y) for t, (x, y) in zip(steps, coords)])
        for k, (distance, speed) in enumerate(kinematics(series)):
            dt = (series[k + 1].ts - series[k].ts).total_seconds()
            self.assertAlmostEqual(speed * dt, distance, places=9)

    def test_kinematics_needs_two_pings(self):
        with self.assertRaises(TrajectoryError) as ctx:
            kinematics(self.make_series([(0, 0, 0)]))
        self.assertEqual(ctx.exception.code, 'SERIES_TOO_SHORT')

    def test_params_must_be_positive(self):
        with self.assertRaises(TrajectoryError) as ctx:
            SegmentationParams(stop_radius_m=0)
        self.assertEqual(ctx.exception.code, 'INVALID_CONFIG')


class TestThresholdSegmentation(TrajectoryTestCase):

    def make_c1(self):
        return self.make_series(sample_data.c1_track())

    def test_stop_move_stop(self):
        result = segment(self.make_c1(), self.params)
        self.assertEqual([s.kind for s in result.segments], [STOP, MOVE, STOP])
        self.assertEqual([s.duration_s for s in result.segments], [20.0, 8.0, 20.0])
        move = result.segments[1]
        self.assertAlmostEqual(move.distance_m, 20.0)
        self.assertAlmostEqual(move.mean_speed_m_s, 2.5)
        self.assertEqual((move.anchor_x, move.anchor_y), (10.0, 7.5))
        self.assertEqual((result.segments[0].anchor_x, result.segments[0].anchor_y), (5.0, 2.5))

    def test_segments_tile_the_track(self):
        series = self.make_c1()
        result = segment(series, self.params)
        for prev, cur in zip(result.segments, result.segments[1:]):
            self.assertEqual(prev.t_end, cur.t_start)
        self.assertEqual(result.covered_s, result.span_s)
        check_time_conservation(series, result, self.params.max_gap_s)

    def test_stop_windows_on_c1(self):
        series = self.make_c1()
        t = np.array([(p.ts - START).total_seconds() for p in series])
        xy = np.array([(p.x, p.y) for p in series])
        self.assertEqual(stop_windows(t, xy, self.params), [(0, 20), (28, 48)])

    def test_jitter_inside_radius_is_one_stop(self):
        series = self.make_series([(t, 0.5 * (t % 2), 0) for t in range(16)])
        result = segment(series, self.params)
        self.assertEqual(result.counts(), {STOP: 1, MOVE: 0})
        self.assertEqual(result.segments[0].duration_s, 15.0)

    def test_short_pause_is_not_a_stop(self):
        points = [(t, 0, 0) for t in range(5)] + [(5 + k, 2 * (k + 1), 0) for k in range(5)]
        result = segment(self.make_series(points), self.params)
        self.assertEqual(result.counts(), {STOP: 0, MOVE: 1})
        self.assertEqual(result.segments[0].duration_s, 9.0)
        self.assertAlmostEqual(result.segments[0].distance_m, 10.0)

    def test_gap_cuts_track_and_leaves_orphan(self):
        points = [(t, 5, 2.5) for t in range(16)] + [(75, 15, 2.5)]
        series = self.make_series(points, 'C2')
        result = segment(series, self.params)
        self.assertEqual(result.counts(), {STOP: 1, MOVE: 0})
        self.assertEqual(result.orphan_pings, 1)
        self.assertEqual(result.gap_split_s, 60.0)
        self.assertEqual(result.span_s, 75.0)
        check_time_conservation(series, result, self.params.max_gap_s)

    def test_gap_at_threshold_does_not_split(self):
        points = [(0, 0, 0), (30, 0, 0)]
        result = segment(self.make_series(points), self.params)
        self.assertEqual(result.orphan_pings, 0)
        self.assertEqual(result.covered_s, 30.0)

    def test_single_ping_day(self):
        result = segment(self.make_series([(0, 1, 1)]), self.params)
        self.assertEqual(result.segments, [])
        self.assertEqual(result.orphan_pings, 1)

    def test_empty_series(self):
        result = segment([], self.params)
        self.assertEqual(result.segments, [])
        self.assertEqual(result.span_s, 0.0)

    def test_partial_labels_fall_back_to_threshold(self):
        points = [(t, 0, 0, SUS if t == 0 else None) for t in range(12)]
        result = segment(self.make_series(points), self.params)
        self.assertEqual(result.status_conflicts, 0)
        self.assertEqual(result.counts(), {STOP: 1, MOVE: 0})


class TestRunLengthSegmentation(TrajectoryTestCase):

    def make_labelled(self):
        points = [(t, 0, 0, SUS) for t in range(5)]
        points += [(5 + k, 2 * (k + 1), 0, MIG) for k in range(5)]
        points += [(10 + k, 12, 0, SUS) for k in range(5)]
        return self.make_series(points)

    def test_runs_meet_at_midpoints(self):
        result = segment(self.make_labelled(), self.params)
        self.assertEqual([s.kind for s in result.segments], [STOP, MOVE, STOP])
        self.assertEqual([s.duration_s for s in result.segments], [4.5, 5.0, 4.5])
        self.assertAlmostEqual(result.segments[1].distance_m, 10.0)
        self.assertEqual(result.covered_s, 14.0)

    def test_labels_win_over_threshold(self):
        result = segment(self.make_labelled(), self.params)
        self.assertEqual(result.status_conflicts, 10)

    def test_labels_can_be_ignored(self):
        result = segment(self.make_labelled(), self.params, statuses_present=False)
        self.assertEqual(result.counts(), {STOP: 0, MOVE: 1})
        self.assertEqual(result.status_conflicts, 0)


class TestZoneDwell(TrajectoryTestCase):

    def setUp(self):
        super().setUp()
        self.store_map = sample_data.store_map()

    def attributed_c1(self):
        result = segment(self.make_series(sample_data.c1_track()), self.params)
        return attribute_zones(result.segments, self.store_map)

    def test_attribution_by_anchor(self):
        self.assertEqual([s.area_key for s in self.attributed_c1()], [1, None, 2])

    def test_dwell_per_zone(self):
        rows = zone_dwell(self.attributed_c1(), date(2024, 3, 4))
        self.assertEqual([(r.area_key, r.dwell_s, r.visit_count, r.stop_s) for r in rows], [
            (UNZONED_KEY, 8.0, 1, 0.0),
            (1, 20.0, 1, 20.0),
            (2, 20.0, 1, 20.0),
        ])
        self.assertEqual(sum(r.dwell_s for r in rows), 48.0)

    def test_consecutive_segments_in_one_zone_are_one_visit(self):
        segments = self.attributed_c1()
        same_zone = [segments[0], segments[0].with_area(1), segments[2]]
        self.assertEqual(visit_starts(same_zone), [True, False, True])

    def test_returning_to_a_zone_counts_again(self):
        segments = self.attributed_c1()
        back_and_forth = [segments[0], segments[1], segments[0]]
        rows = zone_dwell(back_and_forth, date(2024, 3, 4))
        produce = [r for r in rows if r.area_key == 1][0]
        self.assertEqual(produce.visit_count, 2)
        self.assertEqual(produce.dwell_s, 40.0)


class TestAgainstBruteForce(TrajectoryTestCase):
    """Threshold stops checked against every candidate window of the track."""

    def fits(self, points, i, k):
        """Helper method: do pings i..k all lie within the radius of their own centroid?"""
        window = points[i:k + 1]
        cx = math.fsum(x for _, x, _ in window) / len(window)
        cy = math.fsum(y for _, _, y in window) / len(window)
        return all(math.hypot(x - cx, y - cy) <= self.params.stop_radius_m for _, x, y in window)

    def reach(self, points, i):
        """Helper method: the last j such that every window i..k with k <= j fits."""
        j = i
        while j + 1 < len(points) and self.fits(points, i, j + 1):
            j += 1
        return j

    def lasts(self, points, i, j):
        return points[j][0] - points[i][0] >= self.params.min_stop_duration_s

    def assert_stop_rule(self, points, windows):
        """Helper method checking found windows against the rule evaluated from every start."""
        covered = set()
        previous_end = -1
        for i, j in windows:
            self.assertGreater(i, previous_end)
            previous_end = j
            self.assertEqual(self.reach(points, i), j, (i, j))
            self.assertTrue(self.lasts(points, i, j), (i, j))
            if j + 1 < len(points):
                k = self.reach(points, i + 1)
                self.assertFalse(k > j and self.lasts(points, i + 1, k), f"stop {(i, j)} could run to {k}")
            covered.update(range(i, j + 1))
        for s in range(len(points)):
            if s in covered:
                continue
            j = self.reach(points, s)
            if self.lasts(points, s, j):
                later = [w for w in windows if w[0] > s]
                self.assertTrue(later, f"window {(s, j)} is not a stop")
                self.assertGreater(later[0][1], j, f"window {(s, j)} is not a stop")

    def random_walk(self, rng):
        """Helper method: 1-2 s sampled pings alternating jittered lingering and striding."""
        points = []
        t, x, y = 0, 0.0, 0.0
        n = int(rng.integers(2, 201))
        while len(points) < n:
            length = int(rng.integers(1, 60))
            if rng.random() < 0.5:
                jitter = float(rng.uniform(0.05, 0.7))
                for _ in range(length):
                    dx, dy = rng.uniform(-jitter, jitter, size=2)
                    points.append((t, x + float(dx), y + float(dy)))
                    t += int(rng.integers(1, 3))
            else:
                heading = float(rng.uniform(0.0, 2 * math.pi))
                for _ in range(length):
                    step = float(rng.uniform(0.3, 1.6))
                    x, y = x + step * math.cos(heading), y + step * math.sin(heading)
                    points.append((t, x, y))
                    t += int(rng.integers(1, 3))
        return points[:n]

    def as_arrays(self, points):
        return np.array([p[0] for p in points], dtype=float), np.array([p[1:] for p in points], dtype=float)

    def test_stop_windows_follow_the_rule(self):
        rng = np.random.default_rng(42)
        for _ in range(500):
            points = self.random_walk(rng)
            self.assert_stop_rule(points, stop_windows(*self.as_arrays(points), self.params))

    def test_approach_ping_does_not_cut_a_stop_short(self):
        # the 0.95 m ping fits until the drifting centroid pushes it out at second 23
        points = [(0, 0.95, 0.0)] + [(t, 0.0, 0.0) for t in range(1, 13)] + [(t, -0.2, 0.0) for t in range(13, 41)]
        points += [(40 + k, 1.5 * k, 0.0) for k in range(1, 6)]
        windows = stop_windows(*self.as_arrays(points), self.params)
        self.assertEqual(windows, [(1, 40)])
        self.assert_stop_rule(points, windows)

    def test_stop_segments_follow_the_windows(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            points = self.random_walk(rng)
            series = self.make_series(points)
            result = segment(series, self.params, statuses_present=False)
            stops = [(s.t_start, s.t_end) for s in result.segments if s.kind == STOP]
            windows = stop_windows(*self.as_arrays(points), self.params)
            self.assertEqual(stops, [(series[i].ts, series[j].ts) for i, j in windows])
            check_time_conservation(series, result, self.params.max_gap_s)


if __name__ == '__main__':
    unittest.main()
