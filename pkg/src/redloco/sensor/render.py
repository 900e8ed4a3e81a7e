"""Raycast depth rendering against heightfields.

Rays march cell boundaries exactly (piecewise-constant columns), so flat
ground matches the closed-form ray-plane distance to float precision. The
image's column axis fans rays across a horizontal FOV over the same sagittal
profile; a yawed ray sees the profile stretched by 1/cos(yaw). Void cells
are bottomless: rays pass over them and may hit the far wall, otherwise they
run out at max range.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractError
from ..world.robot import PlanarWorld
from ..world.terrain import Heightfield
from .camera import STAGE_RANDOMIZED, STAGE_RAW, CameraModel, DepthImage, validate_camera


def march_rays(heights: np.ndarray, void: np.ndarray, cell_size: float,
               x0: np.ndarray, z0: np.ndarray, dx: np.ndarray, dz: np.ndarray,
               max_range: float, env_ids: np.ndarray | None = None) -> np.ndarray:
    """Distance to first heightfield intersection for each ray.

    ``heights``/``void`` may be (cells,) for one field or (envs, cells) with
    ``env_ids`` giving each ray's field. Rays must advance forward (dx > 0).
    Returns max_range where nothing is hit within range.
    """
    heights = np.asarray(heights, dtype=np.float64)
    single = heights.ndim == 1
    n_cells = heights.shape[-1]
    if single:
        heights = heights[None, :]
        void = np.asarray(void)[None, :]
        env_ids = np.zeros(x0.shape, dtype=np.intp)
    else:
        void = np.asarray(void)
        if env_ids is None:
            raise ContractError("env_ids required with per-env heightfields")
    solid_h = np.where(void, -np.inf, heights)

    dx = np.maximum(np.asarray(dx, dtype=np.float64), 1e-9)
    dz = np.asarray(dz, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    z0 = np.asarray(z0, dtype=np.float64)

    idx = np.clip(np.floor(x0 / cell_size).astype(np.intp), 0, n_cells - 1)
    t_cur = np.zeros_like(x0)
    depth = np.full(x0.shape, max_range)
    active = np.ones(x0.shape, dtype=bool)
    falling = dz < 0
    safe_dz = np.where(dz == 0, 1.0, dz)

    max_iters = int(np.ceil(max_range / cell_size)) + 2
    for _ in range(max_iters):
        if not active.any():
            break
        h_here = solid_h[env_ids, idx]
        t_b = ((idx + 1) * cell_size - x0) / dx
        # floor hit inside the current cell segment [t_cur, t_b]
        t_h = np.where(falling, (h_here - z0) / safe_dz, np.inf)
        hit_floor = (active & falling & (t_h >= t_cur - 1e-12)
                     & (t_h <= t_b + 1e-12) & (t_h <= max_range))
        depth = np.where(hit_floor, t_h, depth)
        active &= ~hit_floor
        # wall hit at the boundary into the next cell
        nidx = idx + 1
        in_grid = nidx < n_cells
        h_next = solid_h[env_ids, np.minimum(nidx, n_cells - 1)]
        z_b = z0 + t_b * dz
        hit_wall = active & in_grid & (z_b < h_next) & (t_b <= max_range)
        depth = np.where(hit_wall, t_b, depth)
        active &= ~hit_wall
        idx = np.minimum(nidx, n_cells - 1)
        t_cur = t_b
        active &= in_grid & (t_cur < max_range)
    return depth


def _ray_geometry(cam: CameraModel, body_x: float, body_z: float, body_pitch: float,
                  d_pos: tuple[float, float] = (0.0, 0.0), d_pitch: float = 0.0,
                  d_yaw: float = 0.0):
    cp, sp = np.cos(body_pitch), np.sin(body_pitch)
    cam_x = body_x + cp * cam.mount_forward - sp * cam.mount_up + d_pos[0]
    cam_z = body_z + sp * cam.mount_forward + cp * cam.mount_up + d_pos[1]
    depression = cam.mount_pitch - body_pitch + d_pitch
    rows = depression + np.linspace(-cam.fov_v / 2, cam.fov_v / 2, cam.height)
    cols = d_yaw + np.linspace(-cam.fov_h / 2, cam.fov_h / 2, cam.width)
    dz = -np.sin(rows)[:, None] * np.ones(cam.width)[None, :]
    dx = np.cos(rows)[:, None] * np.cos(cols)[None, :]
    return cam_x, cam_z, depression, dx, dz


def render(world: PlanarWorld, camera: CameraModel, rng: np.random.Generator | None = None,
           randomize: bool = False) -> DepthImage:
    """Render one depth frame from the robot's current pose.

    With ``randomize``: uniform pose jitter (position, pitch, yaw) before
    casting, then proportional range noise, then additive Gaussian noise,
    then a re-clip into (0, max_range]. That composition order is pinned.
    """
    validate_camera(camera)
    if randomize and rng is None:
        raise ContractError("randomized render requires an rng")
    d_pos = (0.0, 0.0)
    d_pitch = d_yaw = 0.0
    if randomize:
        d_pos = (float(rng.uniform(-camera.pos_jitter, camera.pos_jitter)),
                 float(rng.uniform(-camera.pos_jitter, camera.pos_jitter)))
        d_pitch = float(rng.uniform(-camera.ang_jitter, camera.ang_jitter))
        d_yaw = float(rng.uniform(-camera.ang_jitter, camera.ang_jitter))
    r = world.robot
    cam_x, cam_z, depression, dx, dz = _ray_geometry(
        camera, r.x, r.z, r.pitch, d_pos, d_pitch, d_yaw)
    hf = world.heightfield
    flat_depth = march_rays(hf.heights, hf.void, hf.cell_size,
                            np.full(dx.size, cam_x), np.full(dx.size, cam_z),
                            dx.ravel(), dz.ravel(), camera.max_range)
    data = flat_depth.reshape(camera.height, camera.width)
    if randomize:
        data = data * (1.0 + camera.prop_noise_std * rng.standard_normal(data.shape))
        data = data + camera.add_noise_std * rng.standard_normal(data.shape)
    data = np.clip(data, camera.min_depth, camera.max_range)
    stage = STAGE_RANDOMIZED if randomize else STAGE_RAW
    return DepthImage(data, (cam_x, cam_z, depression, d_yaw), stage)


def render_batch(worlds: list[PlanarWorld], camera: CameraModel,
                 rngs: list[np.random.Generator], randomize: bool = True
                 ) -> list[DepthImage]:
    """One frame per world with a single shared ray march."""
    validate_camera(camera)
    n = len(worlds)
    per = camera.height * camera.width
    x0 = np.empty(n * per)
    z0 = np.empty(n * per)
    dxs = np.empty(n * per)
    dzs = np.empty(n * per)
    env_ids = np.repeat(np.arange(n, dtype=np.intp), per)
    poses = []
    for i, (w, rng) in enumerate(zip(worlds, rngs)):
        d_pos = (0.0, 0.0)
        d_pitch = d_yaw = 0.0
        if randomize:
            d_pos = (float(rng.uniform(-camera.pos_jitter, camera.pos_jitter)),
                     float(rng.uniform(-camera.pos_jitter, camera.pos_jitter)))
            d_pitch = float(rng.uniform(-camera.ang_jitter, camera.ang_jitter))
            d_yaw = float(rng.uniform(-camera.ang_jitter, camera.ang_jitter))
        r = w.robot
        cam_x, cam_z, depression, dx, dz = _ray_geometry(
            camera, r.x, r.z, r.pitch, d_pos, d_pitch, d_yaw)
        sl = slice(i * per, (i + 1) * per)
        x0[sl] = cam_x
        z0[sl] = cam_z
        dxs[sl] = dx.ravel()
        dzs[sl] = dz.ravel()
        poses.append((cam_x, cam_z, depression, d_yaw))
    heights = np.stack([w.heightfield.heights for w in worlds])
    void = np.stack([w.heightfield.void for w in worlds])
    cell = worlds[0].heightfield.cell_size
    depth = march_rays(heights, void, cell, x0, z0, dxs, dzs, camera.max_range,
                       env_ids=env_ids)
    out = []
    for i, (w, rng) in enumerate(zip(worlds, rngs)):
        data = depth[i * per:(i + 1) * per].reshape(camera.height, camera.width)
        if randomize:
            data = data * (1.0 + camera.prop_noise_std * rng.standard_normal(data.shape))
            data = data + camera.add_noise_std * rng.standard_normal(data.shape)
        data = np.clip(data, camera.min_depth, camera.max_range)
        out.append(DepthImage(data, poses[i],
                              STAGE_RANDOMIZED if randomize else STAGE_RAW))
    return out


def edge_truncate_resize(image: DepthImage, border: int) -> DepthImage:
    """Crop a pixel border, then bilinearly resample the interior back to the
    original resolution. Border 0 is an exact identity."""
    h, w = image.data.shape
    if border < 0 or 2 * border >= min(h, w):
        raise ContractError(f"border {border} too large for {h}x{w} frame")
    if border == 0:
        return DepthImage(image.data.copy(), image.pose_used, image.stage)
    inner = image.data[border:h - border, border:w - border]
    return DepthImage(_bilinear_resize(inner, h, w), image.pose_used, image.stage)


def _bilinear_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    in_h, in_w = src.shape
    ys = np.linspace(0.0, in_h - 1.0, out_h) if out_h > 1 else np.zeros(1)
    xs = np.linspace(0.0, in_w - 1.0, out_w) if out_w > 1 else np.zeros(1)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    a = src[np.ix_(y0, x0)]
    b = src[np.ix_(y0, x1)]
    c = src[np.ix_(y1, x0)]
    d = src[np.ix_(y1, x1)]
    top = a + (b - a) * fx
    bot = c + (d - c) * fx
    return top + (bot - top) * fy
