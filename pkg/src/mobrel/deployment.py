"""Hexagonal 7-site / 21-cell layout and straight-line UE mobility."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig

SECTOR_ORIENTATIONS = (30.0, 150.0, 270.0)


@dataclass(frozen=True)
class CellPlan:
    cell_id: int
    site_id: int
    site_position: tuple[float, float]
    sector_orientation: float  # boresight azimuth, degrees
    bs_height: float = 10.0


@dataclass(frozen=True)
class UeKinematics:
    ue_id: int
    position: tuple[float, float]
    heading: float  # radians
    speed: float  # m/s
    ue_height: float = 1.5


def site_positions(isd: float) -> np.ndarray:
    """Centre site plus one hexagonal ring, shape (7, 2)."""
    angles = np.deg2rad(np.arange(6) * 60.0)
    ring = isd * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return np.vstack([np.zeros((1, 2)), ring])


def build_grid(cfg: ScenarioConfig) -> list[CellPlan]:
    if cfg.n_sites != 7:
        raise ValueError(f"unsupported n_sites={cfg.n_sites}; only 7 is supported")
    sites = site_positions(cfg.isd)
    cells = []
    for s, (x, y) in enumerate(sites):
        for k, orient in enumerate(SECTOR_ORIENTATIONS[: cfg.cells_per_site]):
            cells.append(CellPlan(
                cell_id=s * cfg.cells_per_site + k,
                site_id=s,
                site_position=(float(x), float(y)),
                sector_orientation=orient,
                bs_height=cfg.bs_height,
            ))
    return cells


def drop_ues(cfg: ScenarioConfig, rng: np.random.Generator) -> list[UeKinematics]:
    """Drop ``n_ue`` UEs uniformly over the deployment disc with uniform headings."""
    n = cfg.n_ue
    r = cfg.region_radius * np.sqrt(rng.random(n))
    phi = rng.random(n) * 2 * math.pi
    heading = rng.random(n) * 2 * math.pi
    x, y = r * np.cos(phi), r * np.sin(phi)
    return [
        UeKinematics(i, (float(x[i]), float(y[i])), float(heading[i]), cfg.speed_mps, cfg.ue_height)
        for i in range(n)
    ]


def move_in_disc(pos: np.ndarray, heading: np.ndarray, dist: np.ndarray | float,
                 radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Move points ``dist`` along ``heading``, reflecting specularly off the disc edge.

    ``pos`` is (n, 2); returns new (pos, heading). Path length is preserved exactly.
    """
    pos = np.array(pos, dtype=float, copy=True)
    heading = np.array(heading, dtype=float, copy=True)
    if np.ndim(dist) == 0:
        # fast path: nobody reaches the boundary this step
        step = np.stack([np.cos(heading), np.sin(heading)], axis=1) * dist
        moved = pos + step
        if np.einsum("ij,ij->i", moved, moved).max(initial=0.0) < radius * radius:
            return moved, heading
    remaining = np.broadcast_to(np.asarray(dist, dtype=float), heading.shape).copy()
    active = remaining > 0
    for _ in range(16):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        p = pos[idx]
        u = np.stack([np.cos(heading[idx]), np.sin(heading[idx])], axis=1)
        pu = np.einsum("ij,ij->i", p, u)
        pp = np.einsum("ij,ij->i", p, p)
        # distance to the boundary along u (p is inside, so the root is >= 0)
        s_hit = -pu + np.sqrt(np.maximum(pu * pu - pp + radius * radius, 0.0))
        s_hit = np.maximum(s_hit, 0.0)
        rem = remaining[idx]
        inside = rem < s_hit
        # no crossing
        i_in = idx[inside]
        pos[i_in] = p[inside] + rem[inside, None] * u[inside]
        remaining[i_in] = 0.0
        # crossing: reflect at hit point
        hit = ~inside
        if hit.any():
            i_h = idx[hit]
            h = p[hit] + s_hit[hit, None] * u[hit]
            n = h / np.linalg.norm(h, axis=1, keepdims=True)
            uh = u[hit]
            un = np.einsum("ij,ij->i", uh, n)
            # only reflect outward-going motion
            un = np.maximum(un, 0.0)
            ur = uh - 2 * un[:, None] * n
            pos[i_h] = n * radius
            heading[i_h] = np.arctan2(ur[:, 1], ur[:, 0])
            remaining[i_h] = rem[hit] - s_hit[hit]
        active = remaining > 0
    heading = np.mod(heading, 2 * math.pi)
    heading[heading >= 2 * math.pi] = 0.0  # mod of a tiny negative rounds up to 2 pi
    return pos, heading


def advance(ue: UeKinematics, dt: float, radius: float = math.inf) -> UeKinematics:
    """Move one UE for ``dt`` seconds inside a disc of ``radius``."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    dist = ue.speed * dt
    if math.isinf(radius):
        x = ue.position[0] + dist * math.cos(ue.heading)
        y = ue.position[1] + dist * math.sin(ue.heading)
        return UeKinematics(ue.ue_id, (x, y), ue.heading, ue.speed, ue.ue_height)
    pos, heading = move_in_disc(np.array([ue.position]), np.array([ue.heading]), dist, radius)
    return UeKinematics(ue.ue_id, (float(pos[0, 0]), float(pos[0, 1])), float(heading[0]),
                        ue.speed, ue.ue_height)
