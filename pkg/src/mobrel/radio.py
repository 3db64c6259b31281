"""Link-level radio abstraction: path loss, LOS, shadowing, fast fading, antenna
gains, raw RSRP and average downlink SINR.

Composition law for one (UE, cell, beam, panel) link, all in dB::

    gain = -path_loss - shadow + beam_gain + panel_gain - blockage_loss + fast_fade
    rsrp = tx_power_per_beam + gain

Panel gain (including blockage) is folded into ``panel_gain`` arrays below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ScenarioConfig, to_us
from .deployment import CellPlan, UeKinematics

SPEED_OF_LIGHT = 3.0e8
N_PANELS = 3
# panel boresight offsets from the UE heading: P1 top, P2 left, P3 right
PANEL_OFFSETS = (0.0, 90.0, -90.0)


def wrap_deg(a):
    """Wrap angles to [-180, 180)."""
    return (np.asarray(a) + 180.0) % 360.0 - 180.0


def path_loss(d3d, fc: float, los, h_bs: float = 10.0, h_ue: float = 1.5):
    """3GPP UMi street-canyon path loss in dB.

    ``d3d`` and ``los`` broadcast; ``fc`` in GHz.
    """
    d3d = np.asarray(d3d, dtype=float)
    if np.any(d3d < 1.0):
        raise ValueError("path_loss requires d3d >= 1 m")
    los = np.asarray(los, dtype=bool)
    log_fc = math.log10(fc)
    d_bp = 4 * (h_bs - 1.0) * (h_ue - 1.0) * fc * 1e9 / SPEED_OF_LIGHT
    pl1 = 32.4 + 21.0 * np.log10(d3d) + 20.0 * log_fc
    pl2 = (32.4 + 40.0 * np.log10(d3d) + 20.0 * log_fc
           - 9.5 * math.log10(d_bp**2 + (h_bs - h_ue) ** 2))
    pl_los = np.where(d3d <= d_bp, pl1, pl2)
    pl_nlos = 35.3 * np.log10(d3d) + 22.4 + 21.3 * log_fc - 0.3 * (h_ue - 1.5)
    out = np.where(los, pl_los, np.maximum(pl_los, pl_nlos))
    return float(out) if out.ndim == 0 else out


def los_probability(d2d):
    """UMi LOS probability as a function of 2D distance."""
    d = np.maximum(np.asarray(d2d, dtype=float), 1e-9)
    e = np.exp(-d / 36.0)
    p = np.minimum(18.0 / d, 1.0) * (1.0 - e) + e
    return float(p) if p.ndim == 0 else p


def los_state(ue_pos, cell: CellPlan, rng: np.random.Generator) -> bool:
    """One Bernoulli LOS draw. Freezing per (UE, cell) is the caller's job; see :class:`LosMap`."""
    d = math.dist(ue_pos, cell.site_position)
    return bool(rng.random() < los_probability(d))


class LosMap:
    """LOS state drawn once per (UE, cell) and then frozen for the run."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self._states: dict[tuple[int, int], bool] = {}

    def state(self, ue_id: int, ue_pos, cell: CellPlan) -> bool:
        key = (ue_id, cell.cell_id)
        if key not in self._states:
            self._states[key] = los_state(ue_pos, cell, self.rng)
        return self._states[key]


def draw_los(d2d: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vectorized frozen LOS draw for an (n_ue, n_cells) distance table."""
    return rng.random(d2d.shape) < los_probability(d2d)


@dataclass(frozen=True)
class BeamPattern:
    beam_id: int  # 1-based
    boresight_azimuth: float  # deg, relative to sector orientation
    elevation_tilt: float  # deg below horizon
    azimuth_beamwidth: float
    elevation_beamwidth: float
    peak_gain: float
    front_to_back: float = 30.0


def make_beam_grid(cfg: ScenarioConfig) -> list[BeamPattern]:
    """Outer beams (narrow, high gain, small tilt) then inner beams, tiling the 120 deg sector."""
    n_outer = 2 * cfg.n_beams // 3
    n_inner = cfg.n_beams - n_outer
    beams = []
    for i in range(n_outer):
        step = 120.0 / n_outer
        beams.append(BeamPattern(i + 1, -60.0 + step * (i + 0.5), cfg.outer_beam_tilt,
                                 cfg.outer_beam_width, cfg.outer_beam_vwidth,
                                 cfg.outer_beam_gain, cfg.front_to_back))
    for i in range(n_inner):
        step = 120.0 / n_inner
        beams.append(BeamPattern(n_outer + i + 1, -60.0 + step * (i + 0.5), cfg.inner_beam_tilt,
                                 cfg.inner_beam_width, cfg.inner_beam_vwidth,
                                 cfg.inner_beam_gain, cfg.front_to_back))
    return beams


def lobe_attenuation(d_az, bw_az, d_el=0.0, bw_el=1.0, floor=30.0):
    """Parabolic main-lobe attenuation, clamped at ``floor`` dB."""
    a = 12.0 * (wrap_deg(d_az) / bw_az) ** 2 + 12.0 * (np.asarray(d_el) / bw_el) ** 2
    return np.minimum(a, floor)


def beam_gain(pattern: BeamPattern, azimuth_offset, elevation_offset):
    """Gain in dBi at the given offsets from the beam boresight."""
    g = pattern.peak_gain - lobe_attenuation(azimuth_offset, pattern.azimuth_beamwidth,
                                             elevation_offset, pattern.elevation_beamwidth,
                                             pattern.front_to_back)
    return float(g) if np.ndim(g) == 0 else g


def panel_gain(ue: UeKinematics | float, panel_id: int, arrival_azimuth, blocked: bool,
               peak: float = 5.0, width: float = 90.0, front_to_back: float = 30.0,
               blockage_loss: float = 25.0):
    """Gain of UE panel ``panel_id`` (1..3) for a signal arriving from ``arrival_azimuth`` deg.

    ``ue`` may be a :class:`UeKinematics` or a heading in radians.
    """
    heading = ue.heading if isinstance(ue, UeKinematics) else ue
    boresight = math.degrees(heading) + PANEL_OFFSETS[panel_id - 1]
    g = peak - lobe_attenuation(np.asarray(arrival_azimuth) - boresight, width, floor=front_to_back)
    if blocked:
        g = g - blockage_loss
    return float(g) if np.ndim(g) == 0 else g


def thermal_noise_dbm(bandwidth_hz: float, noise_figure_db: float) -> float:
    return -174.0 + 10 * math.log10(bandwidth_hz) + noise_figure_db


def _exp_cov_eigs(ny: int, nx: int, res: float, decorr: float) -> np.ndarray:
    """Eigenvalues of the torus-embedded exponential covariance exp(-r/decorr)."""
    iy = np.minimum(np.arange(ny), ny - np.arange(ny)) * res
    ix = np.minimum(np.arange(nx), nx - np.arange(nx)) * res
    r = np.hypot(iy[:, None], ix[None, :])
    lam = np.fft.fft2(np.exp(-r / decorr)).real
    return np.maximum(lam, 0.0)


class ShadowField:
    """Per-cell, spatially correlated, unit-variance Gaussian fields on a square grid.

    Values are scaled by the link's LOS/NLOS sigma on lookup. Generated by
    circulant embedding of an exponential covariance with the given
    decorrelation distance.
    """

    def __init__(self, values: np.ndarray, origin: tuple[float, float], res: float,
                 decorr: float):
        self.values = values  # (n_cells, ny, nx)
        self.origin = origin
        self.res = res
        self.decorr = decorr

    @classmethod
    def generate(cls, n_cells: int, half_width: float, res: float, decorr: float,
                 rng: np.random.Generator) -> "ShadowField":
        n = int(math.ceil(2 * half_width / res)) + 2
        pad = int(math.ceil(8 * decorr / res))
        m = n + pad
        sqrt_lam = np.sqrt(_exp_cov_eigs(m, m, res, decorr))
        out = np.empty((n_cells, n, n))
        for c in range(n_cells):
            w = rng.standard_normal((m, m))
            z = np.fft.ifft2(sqrt_lam * np.fft.fft2(w)).real
            out[c] = z[:n, :n]
        origin = (-half_width - res, -half_width - res)
        return cls(out, origin, res, decorr)

    def sample(self, xy: np.ndarray) -> np.ndarray:
        """Bilinear lookup for points ``xy`` (n, 2); returns (n, n_cells)."""
        _, ny, nx = self.values.shape
        fx = (xy[:, 0] - self.origin[0]) / self.res
        fy = (xy[:, 1] - self.origin[1]) / self.res
        fx = np.clip(fx, 0, nx - 1.000001)
        fy = np.clip(fy, 0, ny - 1.000001)
        ix, iy = fx.astype(int), fy.astype(int)
        ax, ay = fx - ix, fy - iy
        v = self.values
        out = ((1 - ax) * (1 - ay) * v[:, iy, ix] + ax * (1 - ay) * v[:, iy, ix + 1]
               + (1 - ax) * ay * v[:, iy + 1, ix] + ax * ay * v[:, iy + 1, ix + 1])
        return out.T

    def export(self, out_dir: str | Path, sigma: float = 1.0) -> list[Path]:
        """Write one ``shadow_<cell>.csv`` grid dump per cell (values in dB)."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for c, grid in enumerate(self.values):
            p = out_dir / f"shadow_{c}.csv"
            np.savetxt(p, grid * sigma, delimiter=",", fmt="%.4f")
            paths.append(p)
        return paths


class FastFading:
    """Per-link log-domain AR(1) fading, stationary with std ``sigma`` dB."""

    def __init__(self, shape: tuple[int, ...], sigma: float, rng: np.random.Generator):
        self.sigma = sigma
        self.rng = rng
        self.state = sigma * rng.standard_normal(shape)
        self._w = np.empty(shape)

    @staticmethod
    def correlation(speed: float, dt: float, coherence_dist: float) -> float:
        return math.exp(-speed * dt / coherence_dist)

    def step(self, rho: float) -> np.ndarray:
        if self.sigma > 0 and rho < 1.0:
            self.rng.standard_normal(out=self._w)
            self.state *= rho
            self._w *= math.sqrt(1 - rho * rho) * self.sigma
            self.state += self._w
        return self.state


@dataclass
class RadioSnapshot:
    """Radio state of all UEs at one instant.

    ``rsrp``: (n_ue, n_cells, n_beams) raw RSRP in dBm through the best panel.
    ``sinr``: same shape, average downlink SINR in dB of each link if it were serving.
    """

    t_us: int
    rsrp: np.ndarray
    sinr: np.ndarray
    best_panel: np.ndarray  # (n_ue, n_cells), 0-based
    ssb_us: int

    def rsrp_raw(self, ue: int, cell: int, beam: int) -> float:
        if self.t_us % self.ssb_us:
            raise ValueError(f"t={self.t_us / 1e6}s is not an SSB instant")
        return float(self.rsrp[ue, cell, beam])

    def avg_sinr(self, ue: int, serving_cell: int | None, serving_beam: int | None) -> float:
        if serving_cell is None or serving_beam is None or serving_cell < 0:
            raise ValueError(f"UE {ue} has no serving link")
        return float(self.sinr[ue, serving_cell, serving_beam])


class RadioModel:
    """Vectorized link budget for a fleet of UEs against a fixed set of cells."""

    def __init__(self, cfg: ScenarioConfig, cells: Sequence[CellPlan],
                 beams: Sequence[BeamPattern], shadow: ShadowField | None,
                 los: np.ndarray, fading: FastFading | None):
        self.cfg = cfg
        self.cells = list(cells)
        self.beams = list(beams)
        self.shadow = shadow
        self.los = np.asarray(los, dtype=bool)  # (n_ue, n_cells), frozen
        self.fading = fading
        self.site_xy = np.array([c.site_position for c in self.cells])
        self.uniq_site_xy, self.cell_site = np.unique(self.site_xy, axis=0, return_inverse=True)
        self.cell_site = self.cell_site.reshape(-1).astype(np.int64)
        self.orient = np.array([c.sector_orientation for c in self.cells])
        self.beam_az = np.array([b.boresight_azimuth for b in self.beams])
        self.beam_tilt = np.array([b.elevation_tilt for b in self.beams])
        self.beam_bw = np.array([b.azimuth_beamwidth for b in self.beams])
        self.beam_vbw = np.array([b.elevation_beamwidth for b in self.beams])
        self.beam_peak = np.array([b.peak_gain for b in self.beams])
        self.beam_ftb = np.array([b.front_to_back for b in self.beams])
        self._k_az = 12.0 / self.beam_bw**2
        self._k_el = 12.0 / self.beam_vbw**2
        h_bs, h_ue, fc = cfg.bs_height, cfg.ue_height, cfg.carrier_freq
        self._d_bp = 4 * (h_bs - 1.0) * (h_ue - 1.0) * fc * 1e9 / SPEED_OF_LIGHT
        if self._d_bp <= 0:
            self._d_bp = np.inf
        self._pl_los_const = 32.4 + 20.0 * math.log10(fc)
        self._pl_far_const = (32.4 + 20.0 * math.log10(fc)
                              - 9.5 * math.log10(self._d_bp**2 + (h_bs - h_ue) ** 2))
        self._pl_nlos_const = 22.4 + 21.3 * math.log10(fc) - 0.3 * (h_ue - 1.5)
        self.tx_per_beam = cfg.tx_power - 10 * math.log10(cfg.k_sched)
        self.noise_mw = 10 ** (thermal_noise_dbm(cfg.bandwidth, cfg.noise_figure) / 10)
        self.sched_frac = cfg.k_sched / cfg.n_beams
        self.sigma_sh = np.where(self.los, cfg.shadow_sigma_los, cfg.shadow_sigma_nlos)
        block = np.zeros(N_PANELS)
        if cfg.hand_blockage:
            for p in cfg.blocked_panels:
                block[p - 1] = cfg.blockage_loss
        self.panel_block = block

    @classmethod
    def build(cls, cfg: ScenarioConfig, cells: Sequence[CellPlan], ue_xy: np.ndarray,
              los_rng: np.random.Generator, shadow_rng: np.random.Generator,
              fade_rng: np.random.Generator) -> "RadioModel":
        site_xy = np.array([c.site_position for c in cells])
        d2d = np.linalg.norm(ue_xy[:, None, :] - site_xy[None, :, :], axis=2)
        los = draw_los(d2d, los_rng)
        shadow = ShadowField.generate(len(cells), cfg.region_radius, cfg.shadow_grid_res,
                                      cfg.shadow_decorr_dist, shadow_rng)
        fading = FastFading((len(ue_xy), len(cells), cfg.n_beams), cfg.fast_fade_sigma, fade_rng)
        return cls(cfg, cells, make_beam_grid(cfg), shadow, los, fading)

    def link_terms(self, xy: np.ndarray, heading: np.ndarray):
        """Panel-independent link power (dBm) and per-panel gain (dBi incl. blockage).

        Returns ``base`` (n, C, B) and ``gp`` (n, C, 3). Geometry is computed
        once per site and shared by that site's cells.
        """
        cfg = self.cfg
        dxy = xy[:, None, :] - self.uniq_site_xy[None, :, :]  # (n, S, 2)
        d2d = np.maximum(np.hypot(dxy[..., 0], dxy[..., 1]), 1.0)
        dh = cfg.bs_height - cfg.ue_height
        log_d3d = 0.5 * np.log10(d2d * d2d + dh * dh)
        pl_los = self._pl_los_const + 21.0 * log_d3d
        if self._d_bp < np.inf:
            far = log_d3d > np.log10(self._d_bp)
            if far.any():
                pl_los = np.where(far, self._pl_far_const + 40.0 * log_d3d, pl_los)
        pl_nlos = np.maximum(pl_los, self._pl_nlos_const + 35.3 * log_d3d)
        site = self.cell_site
        pl = np.where(self.los, pl_los[:, site], pl_nlos[:, site])  # (n, C)
        az = np.degrees(np.arctan2(dxy[..., 1], dxy[..., 0]))  # BS -> UE, (n, S)
        el = np.degrees(np.arctan2(dh, d2d))
        rel = wrap_deg(az[:, site] - self.orient)  # (n, C)
        d_az = _abs_wrap(rel[..., None] - self.beam_az)
        d_el = el[:, site, None] - self.beam_tilt
        att = np.minimum(self._k_az * d_az * d_az + self._k_el * d_el * d_el, self.beam_ftb)
        base = (self.tx_per_beam - pl)[..., None] + (self.beam_peak - att)
        if self.shadow is not None:
            base -= (self.shadow.sample(xy) * self.sigma_sh)[..., None]
        if self.fading is not None:
            base += self.fading.state
        arrival = az + 180.0  # UE -> BS
        bores = np.degrees(heading)[:, None] + np.array(PANEL_OFFSETS)  # (n, 3)
        d_p = _abs_wrap(arrival[..., None] - bores[:, None, :])  # (n, S, 3)
        gp = cfg.panel_gain - np.minimum(12.0 * (d_p / cfg.panel_width) ** 2,
                                         cfg.front_to_back) - self.panel_block
        return base, gp[:, site, :]

    def snapshot(self, xy: np.ndarray, heading: np.ndarray, t_us: int = 0) -> RadioSnapshot:
        """Fused (compiled) evaluation of every link; see :meth:`snapshot_reference`."""
        from ._kernel import link_kernel

        cfg = self.cfg
        n, C, B = len(xy), len(self.cells), len(self.beams)
        rsrp = np.empty((n, C, B))
        sinr = np.empty((n, C, B))
        best = np.empty((n, C), dtype=np.int64)
        sh = self.shadow
        sh_vals = sh.values if sh is not None else np.zeros((C, 2, 2))
        x0, y0 = sh.origin if sh is not None else (0.0, 0.0)
        fade = self.fading.state if self.fading is not None else np.zeros((1, 1, 1))
        link_kernel(np.ascontiguousarray(xy, dtype=float), np.ascontiguousarray(heading, dtype=float),
                    self.uniq_site_xy, self.cell_site, self.orient, self.los, self.sigma_sh,
                    sh_vals, x0, y0, sh.res if sh is not None else 1.0, sh is not None,
                    fade, self.fading is not None,
                    self.beam_az, self.beam_tilt, self._k_az, self._k_el, self.beam_peak,
                    self.beam_ftb, self.tx_per_beam, cfg.bs_height - cfg.ue_height,
                    self._pl_los_const, self._pl_far_const, math.log10(self._d_bp),
                    self._pl_nlos_const, cfg.panel_gain, 12.0 / cfg.panel_width**2,
                    cfg.front_to_back, self.panel_block, self.sched_frac, self.noise_mw,
                    rsrp, sinr, best)
        return RadioSnapshot(t_us, rsrp, sinr, best, to_us(cfg.ssb_period))

    def snapshot_reference(self, xy: np.ndarray, heading: np.ndarray,
                           t_us: int = 0) -> RadioSnapshot:
        """Plain numpy evaluation; the independent reference for :meth:`snapshot`."""
        base, gp = self.link_terms(xy, heading)
        n = base.shape[0]
        best = np.argmax(gp, axis=2)  # (n, C)
        gbest = np.take_along_axis(gp, best[..., None], axis=2)[..., 0]
        rsrp = base + gbest[..., None]
        lin_base = np.exp(base * _DB_TO_NEPER)
        lin_gp = np.exp(gp * _DB_TO_NEPER)
        expected = self.sched_frac * lin_base.sum(axis=2)  # (n, C)
        i_panel = np.einsum("nc,ncp->np", expected, lin_gp)  # (n, 3)
        own = expected * np.take_along_axis(lin_gp, best[..., None], axis=2)[..., 0]
        interf = np.maximum(np.take_along_axis(i_panel, best, axis=1) - own, 0.0)
        sinr = rsrp - (10.0 * np.log10(interf + self.noise_mw))[..., None]
        return RadioSnapshot(t_us, rsrp, sinr, best, to_us(self.cfg.ssb_period))


_DB_TO_NEPER = math.log(10.0) / 10.0


def _abs_wrap(a: np.ndarray) -> np.ndarray:
    """|a| wrapped onto [0, 180] for angles in (-540, 540)."""
    a = np.abs(a)
    a = np.where(a > 180.0, np.abs(360.0 - a), a)
    return a
