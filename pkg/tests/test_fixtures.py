import math

import numpy as np
import pytest

from blockembed.fixtures import (
    DisconnectedGraph,
    grid_net_cloud,
    path_metric,
    random_graph_metric,
    random_lp_cloud,
    star_metric,
)
from blockembed.lp_coarse import SizeCapExceeded


class TestDeterministicShapes:
    def test_path_distances(self):
        space = path_metric(4)
        assert space.d(0, 3) == 3.0
        assert space.d(1, 2) == 1.0

    def test_star_leaf_to_leaf(self):
        space = star_metric(3)
        assert space.n_points == 4
        assert space.d(0, 1) == 1.0
        assert space.d(1, 2) == 2.0

    def test_grid_cloud_matches_grid_net(self):
        cloud = grid_net_cloud(1, 2)
        assert cloud.n_points == 9
        assert math.isinf(cloud.p)
        assert list(cloud.points[cloud.basepoint]) == [0.0]


class TestRandomGraph:
    def test_connected_unit_shortest_paths(self):
        space = random_graph_metric(24, seed=5)
        d = space.dist
        assert np.all(d[~np.eye(24, dtype=bool)] >= 1.0)
        assert np.array_equal(d, np.round(d))  # hop counts
        assert np.isfinite(d).all()

    def test_seed_deterministic(self):
        a = random_graph_metric(16, seed=9)
        b = random_graph_metric(16, seed=9)
        assert np.array_equal(a.dist, b.dist)

    def test_different_seeds_differ(self):
        a = random_graph_metric(16, seed=1)
        b = random_graph_metric(16, seed=2)
        assert not np.array_equal(a.dist, b.dist)

    def test_disconnected_after_retries(self):
        with pytest.raises(DisconnectedGraph):
            random_graph_metric(12, edge_prob=0.0, seed=3, max_retries=3)


class TestRandomCloud:
    def test_valid_and_deterministic(self):
        a = random_lp_cloud(20, 3, p=1.0, seed=11)
        b = random_lp_cloud(20, 3, p=1.0, seed=11)
        assert np.array_equal(a.points, b.points)
        a.metric_space  # validated l_1 metric despite tight triangles

    def test_box_bounds(self):
        cloud = random_lp_cloud(15, 2, seed=4, box=2.5)
        assert cloud.points.min() >= 0.0
        assert cloud.points.max() <= 2.5

    def test_size_caps(self):
        with pytest.raises(SizeCapExceeded):
            random_lp_cloud(100_000, 2, seed=0)
        with pytest.raises(SizeCapExceeded):
            random_graph_metric(100_000, seed=0)
