"""
Unit tests for grids, domain classification and fill distance
"""

import os
import sys

import numpy as np
import pandas as pd
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from backend.benchmarks.domains import circle_boundary_sample, circle_membership
from backend.exceptions import ConfigurationError, InputError, ParameterError
from backend.grid import (
    UniformAxis,
    build_grid,
    classify_box,
    classify_region,
    collocation_fill_distance,
    dump_grid_csv,
    fill_distance,
)


class TestGrid:
    """Test suite for Grid and build_grid"""

    def test_uniform_axes(self):
        grid = build_grid((5, 0.0, 1.0), UniformAxis(3, -1.0, 1.0))
        assert grid.shape == (5, 3)
        assert grid.size == 15
        assert grid.spacing == pytest.approx((0.25, 1.0))
        assert grid.bounds == ((0.0, 1.0), (-1.0, 1.0))
        assert grid.is_uniform()

    def test_explicit_coordinates_are_kept(self):
        grid = build_grid([0.0, 0.1, 0.5, 1.0], (3, 0.0, 1.0))
        np.testing.assert_array_equal(grid.axes[0], [0.0, 0.1, 0.5, 1.0])
        assert not grid.is_uniform()

    def test_points_follow_row_major_order(self):
        grid = build_grid((2, 0.0, 1.0), (3, 0.0, 2.0))
        points = grid.points()
        assert points.shape == (6, 2)
        np.testing.assert_array_equal(points[1], [0.0, 1.0])
        np.testing.assert_array_equal(points[3], [1.0, 0.0])
        assert grid.flat_index((1, 2)) == 5
        assert grid.multi_index(4) == (1, 1)

    def test_axes_are_read_only(self, small_grid):
        with pytest.raises(ValueError):
            small_grid.axes[0][0] = 3.0

    @pytest.mark.parametrize("spec", [(1, 0.0, 1.0), (4, 1.0, 1.0), (4, 2.0, 1.0)])
    def test_rejects_bad_uniform_axis(self, spec):
        with pytest.raises(ParameterError):
            build_grid(spec)

    def test_rejects_unsorted_coordinates(self):
        with pytest.raises(InputError):
            build_grid([0.0, 0.5, 0.2])

    def test_refine_inserts_points(self):
        fine = build_grid((3, 0.0, 1.0)).refine(4)
        np.testing.assert_allclose(fine.axes[0], np.linspace(0.0, 1.0, 9))

    def test_refine_rejects_zero_factor(self, small_grid):
        with pytest.raises(ParameterError):
            small_grid.refine(0)

    def test_contains_uses_bounding_box(self, small_grid):
        inside = small_grid.contains([[0.5, 0.5], [1.0, 0.0], [1.2, 0.5]])
        np.testing.assert_array_equal(inside, [True, True, False])


class TestClassification:
    """Test suite for box and region classification"""

    def test_box_marks_every_face(self):
        grid = build_grid((5, 0.0, 1.0), (5, 0.0, 1.0))
        classification = classify_box(grid)
        assert classification.num_boundary == 16
        assert classification.num_interior == 9
        assert classification.num_sites == 25

    def test_box_faces_subset_leaves_final_time_interior(self):
        grid = build_grid((5, -1.0, 1.0), (4, 0.0, 1.0))
        faces = [(0, "lower"), (0, "upper"), (1, "lower")]
        classification = classify_box(grid, faces)
        assert not classification.boundary_mask[2, -1]
        assert classification.interior_mask[2, -1]
        assert classification.boundary_mask[2, 0]
        assert classification.num_boundary == 5 + 2 * 3

    def test_box_rejects_bad_face(self, small_grid):
        with pytest.raises(ParameterError):
            classify_box(small_grid, [(0, "middle")])
        with pytest.raises(ParameterError):
            classify_box(small_grid, [(2, "lower")])

    def test_region_uses_membership_and_sample(self):
        grid = build_grid((9, 0.0, 1.0), (9, 0.0, 1.0))
        sample = circle_boundary_sample(64)
        classification = classify_region(grid, circle_membership, sample)
        expected = circle_membership(grid.points()).reshape(grid.shape)
        np.testing.assert_array_equal(classification.interior_mask, expected)
        assert not classification.boundary_mask.any()
        assert classification.num_boundary == 64
        assert classification.boundary_points.shape == (64, 2)

    def test_region_over_open_box_matches_box_classification(self, small_grid):
        def open_square(points):
            return np.all((points > 0.0) & (points < 1.0), axis=1)

        box = classify_box(small_grid)
        region = classify_region(small_grid, open_square, box.boundary_grid_points)
        np.testing.assert_array_equal(region.interior_mask, box.interior_mask)
        assert region.num_boundary == box.num_boundary
        assert sorted(map(tuple, region.boundary_points)) == sorted(
            map(tuple, box.boundary_points)
        )
        assert sorted(map(tuple, region.collocation_points)) == sorted(
            map(tuple, box.collocation_points)
        )

    def test_region_with_closed_box_keeps_faces_interior(self, small_grid):
        def closed_square(points):
            return np.all((points >= 0.0) & (points <= 1.0), axis=1)

        box = classify_box(small_grid)
        region = classify_region(small_grid, closed_square, box.boundary_grid_points)
        assert region.interior_mask.all()
        assert not region.boundary_mask.any()
        assert region.num_boundary == box.num_boundary

    def test_region_without_interior_points_is_rejected(self, small_grid):
        def nowhere(points):
            return np.zeros(len(points), dtype=bool)

        with pytest.raises(ConfigurationError):
            classify_region(small_grid, nowhere, circle_boundary_sample(16))

    def test_region_without_sample_is_rejected(self, small_grid):
        with pytest.raises(ConfigurationError):
            classify_region(small_grid, circle_membership, np.empty((0, 2)))


class TestFillDistance:
    """Test suite for fill distance estimates"""

    def test_midpoint_distance(self):
        assert fill_distance([[0.0], [1.0]], [[0.5], [0.25]]) == pytest.approx(0.5)

    def test_sample_equal_to_collocation_gives_zero(self, small_grid):
        points = small_grid.points()
        assert fill_distance(points, points) == 0.0

    def test_empty_inputs_are_rejected(self):
        with pytest.raises(ParameterError):
            fill_distance(np.empty((0, 2)), [[0.0, 0.0]])

    def test_box_fill_distance_is_half_cell_diagonal(self):
        grid = build_grid((5, 0.0, 1.0), (5, 0.0, 1.0))
        expected = 0.5 * np.hypot(0.25, 0.25)
        assert collocation_fill_distance(classify_box(grid)) == pytest.approx(expected)

    def test_fill_distance_shrinks_with_refinement(self):
        coarse = classify_box(build_grid((9, 0.0, 1.0), (9, 0.0, 1.0)))
        fine = classify_box(build_grid((17, 0.0, 1.0), (17, 0.0, 1.0)))
        assert collocation_fill_distance(fine) < collocation_fill_distance(coarse)


class TestGridDump:
    """Test suite for dump_grid_csv"""

    def test_roles_and_off_grid_rows(self, tmp_path):
        grid = build_grid((9, 0.0, 1.0), (9, 0.0, 1.0))
        classification = classify_region(
            grid, circle_membership, circle_boundary_sample(12)
        )
        path = dump_grid_csv(grid, classification, tmp_path / "grid.csv")
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["index", "x0", "x1", "role"]
        assert len(frame) == grid.size + 12
        counts = frame["role"].value_counts()
        assert counts["interior"] == classification.num_interior
        assert counts["boundary_sample"] == 12
        assert (frame.loc[frame["role"] == "boundary_sample", "index"] == -1).all()

    def test_rejects_foreign_classification(self, small_grid, tmp_path):
        other = classify_box(build_grid((4, 0.0, 1.0), (4, 0.0, 1.0)))
        with pytest.raises(ConfigurationError):
            dump_grid_csv(small_grid, other, tmp_path / "grid.csv")
