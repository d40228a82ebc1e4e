import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apfnav.scene import AxisAlignedBox, LidarModel, Scene, VerticalCylinder, raycast

WORLD = AxisAlignedBox([-50, -50, -50], [50, 50, 50])


def single_ray_lidar():
    return LidarModel(range_max=100.0, fov_h=1.0, fov_v=1.0, rays_h=1, channels_v=1)


class TestPrimitives:
    def test_box_requires_min_below_max(self):
        with pytest.raises(ValueError):
            AxisAlignedBox([0, 0, 0], [1, -1, 1])

    def test_box_distance_zero_inside_positive_outside(self):
        box = AxisAlignedBox([0, 0, 0], [2, 2, 2])
        assert box.distance([1, 1, 1]) == 0.0
        assert box.distance([3, 1, 1]) == pytest.approx(1.0)
        assert box.distance([3, 3, 1]) == pytest.approx(np.sqrt(2.0))

    def test_box_surface_distance_inside(self):
        box = AxisAlignedBox([0, 0, 0], [4, 4, 4])
        assert box.surface_distance([1, 2, 2]) == pytest.approx(1.0)

    def test_cylinder_validation(self):
        with pytest.raises(ValueError):
            VerticalCylinder([0, 0], -1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            VerticalCylinder([0, 0], 1.0, 2.0, 1.0)

    def test_cylinder_distance(self):
        cyl = VerticalCylinder([0, 0], 1.0, 0.0, 2.0)
        assert cyl.distance([0, 0, 1]) == 0.0
        assert cyl.distance([3, 0, 1]) == pytest.approx(2.0)
        assert cyl.distance([0, 0, 5]) == pytest.approx(3.0)
        assert cyl.distance([3, 0, 4]) == pytest.approx(np.hypot(2.0, 2.0))

    def test_scene_rejects_obstacle_outside_world(self):
        with pytest.raises(ValueError):
            Scene((AxisAlignedBox([40, 0, 0], [60, 1, 1]),), WORLD)

    def test_scene_clearance_empty(self):
        assert Scene((), WORLD).clearance([0, 0, 0]) == float("inf")


class TestRaycast:
    def test_empty_scene_gives_empty_cloud(self):
        cloud = raycast(Scene((), WORLD), {"position": [0, 0, 0], "yaw": 0.0},
                        LidarModel())
        assert cloud.shape == (0, 3)

    def test_single_ray_hits_box_face(self):
        scene = Scene((AxisAlignedBox([5, -2, -2], [6, 2, 2]),), WORLD)
        cloud = raycast(scene, {"position": [0, 0, 0], "yaw": 0.0}, single_ray_lidar())
        assert cloud.shape == (1, 3)
        np.testing.assert_allclose(cloud[0], [5.0, 0.0, 0.0], atol=1e-9)

    def test_face_beyond_range_is_a_miss(self):
        scene = Scene((AxisAlignedBox([11, -2, -2], [12, 2, 2]),), WORLD)
        lidar = LidarModel(range_max=10.0, fov_h=1.0, fov_v=1.0, rays_h=1, channels_v=1)
        cloud = raycast(scene, {"position": [0, 0, 0], "yaw": 0.0}, lidar)
        assert cloud.shape == (0, 3)

    def test_pose_outside_world_rejected(self):
        with pytest.raises(ValueError):
            raycast(Scene((), WORLD), {"position": [99, 0, 0], "yaw": 0.0}, LidarModel())

    def test_cylinder_side_hit(self):
        scene = Scene((VerticalCylinder([5, 0], 1.0, -2.0, 2.0),), WORLD)
        cloud = raycast(scene, {"position": [0, 0, 0], "yaw": 0.0}, single_ray_lidar())
        np.testing.assert_allclose(cloud[0], [4.0, 0.0, 0.0], atol=1e-9)

    def test_points_on_surface_and_within_range(self):
        scene = Scene((AxisAlignedBox([4, -3, -1], [6, 3, 3]),
                       VerticalCylinder([-5, 2, ], 1.5, -2.0, 4.0)), WORLD)
        pose = {"position": np.array([0.0, 0.0, 1.0]), "yaw": 0.3}
        lidar = LidarModel(rays_h=90, channels_v=8)
        cloud = raycast(scene, pose, lidar)
        assert cloud.shape[0] > 0
        ranges = np.linalg.norm(cloud - pose["position"], axis=1)
        assert np.all(ranges <= lidar.range_max + 1e-9)
        for p in cloud:
            assert scene.surface_distance(p) < 1e-6

    def test_deterministic(self):
        scene = Scene((AxisAlignedBox([4, -3, -1], [6, 3, 3]),), WORLD)
        pose = {"position": [0, 0, 1], "yaw": 0.1}
        a = raycast(scene, pose, LidarModel())
        b = raycast(scene, pose, LidarModel())
        assert a.shape == b.shape
        assert np.array_equal(a, b)

    def test_full_revolution_has_no_duplicate_azimuth(self):
        lidar = LidarModel(fov_h=360.0, rays_h=8, channels_v=1, fov_v=1.0)
        az = lidar.azimuths(0.0)
        assert len(az) == 8
        wrapped = np.mod(az, 2 * np.pi)
        assert len(np.unique(np.round(wrapped, 12))) == 8

    def test_partial_fov_includes_endpoints(self):
        lidar = LidarModel(fov_h=90.0, rays_h=3, channels_v=1, fov_v=1.0)
        az = lidar.azimuths(0.0)
        np.testing.assert_allclose(az, [-np.pi / 4, 0.0, np.pi / 4], atol=1e-12)

    def test_elevation_major_ordering(self):
        # A wall covering the whole FOV: consecutive blocks of rays_h points
        # share an elevation, so z is non-decreasing block to block.
        scene = Scene((AxisAlignedBox([5, -40, -40], [6, 40, 40]),), WORLD)
        lidar = LidarModel(fov_h=10.0, fov_v=20.0, rays_h=5, channels_v=4)
        cloud = raycast(scene, {"position": [0, 0, 0], "yaw": 0.0}, lidar)
        assert cloud.shape == (20, 3)
        z_blocks = cloud[:, 2].reshape(4, 5)
        assert np.all(np.diff(z_blocks.mean(axis=1)) > 0)

    @given(yaw=st.floats(-3.1, 3.1), x=st.floats(-8, 8), y=st.floats(-8, 8))
    @settings(max_examples=25, deadline=None)
    def test_surface_property_random_poses(self, yaw, x, y):
        scene = Scene((AxisAlignedBox([10, -5, -2], [12, 5, 4]),), WORLD)
        lidar = LidarModel(rays_h=24, channels_v=4)
        cloud = raycast(scene, {"position": [x, y, 1.0], "yaw": yaw}, lidar)
        for p in cloud:
            assert scene.surface_distance(p) < 1e-6

    def test_range_noise_is_seeded(self):
        scene = Scene((AxisAlignedBox([5, -2, -2], [6, 2, 2]),), WORLD)
        lidar_a = LidarModel(noise_std=0.05, seed=7, rays_h=36, channels_v=4)
        lidar_b = LidarModel(noise_std=0.05, seed=7, rays_h=36, channels_v=4)
        lidar_c = LidarModel(noise_std=0.05, seed=8, rays_h=36, channels_v=4)
        pose = {"position": [0, 0, 0], "yaw": 0.0}
        a = raycast(scene, pose, lidar_a)
        b = raycast(scene, pose, lidar_b)
        c = raycast(scene, pose, lidar_c)
        assert np.array_equal(a, b)
        assert a.shape != c.shape or not np.array_equal(a, c)
