"""Fused per-tick link-budget kernel (numba). Mirrors ``RadioModel.snapshot_reference``."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_K = math.log(10.0) / 10.0
_PANEL_OFFSETS = np.array([0.0, 90.0, -90.0])


@njit(cache=True, inline="always")
def _wrap(a):
    return (a + 180.0) % 360.0 - 180.0


@njit(cache=True, fastmath=True)
def link_kernel(xy, heading, site_xy, cell_site, orient, los, sigma_sh,
                sh_vals, sh_x0, sh_y0, sh_res, has_shadow, fade, has_fade,
                beam_az, beam_tilt, k_az, k_el, beam_peak, beam_ftb,
                tx_per_beam, dh, pl_los_c, pl_far_c, log_dbp, pl_nlos_c,
                panel_peak, panel_k, panel_ftb, panel_block, sched_frac, noise_mw,
                rsrp, sinr, best):
    n = xy.shape[0]
    n_sites = site_xy.shape[0]
    n_cells = cell_site.shape[0]
    n_beams = beam_az.shape[0]
    pl_los = np.empty(n_sites)
    pl_nlos = np.empty(n_sites)
    az = np.empty(n_sites)
    el = np.empty(n_sites)
    gp = np.empty((n_sites, 3))
    glin = np.empty((n_sites, 3))
    expected = np.empty(n_cells)
    ipanel = np.empty(3)
    ny = sh_vals.shape[1]
    nx = sh_vals.shape[2]
    for u in range(n):
        hdeg = math.degrees(heading[u])
        for s in range(n_sites):
            dx = xy[u, 0] - site_xy[s, 0]
            dy = xy[u, 1] - site_xy[s, 1]
            d2 = max(math.hypot(dx, dy), 1.0)
            ld = 0.5 * math.log10(d2 * d2 + dh * dh)
            pl = pl_los_c + 21.0 * ld
            if ld > log_dbp:
                pl = pl_far_c + 40.0 * ld
            pl_los[s] = pl
            pl_nlos[s] = max(pl, pl_nlos_c + 35.3 * ld)
            az[s] = math.degrees(math.atan2(dy, dx))
            el[s] = math.degrees(math.atan2(dh, d2))
            arrival = az[s] + 180.0
            for p in range(3):
                d = abs(_wrap(arrival - (hdeg + _PANEL_OFFSETS[p])))
                g = panel_peak - min(panel_k * d * d, panel_ftb) - panel_block[p]
                gp[s, p] = g
                glin[s, p] = math.exp(g * _K)
        if has_shadow:
            fx = min(max((xy[u, 0] - sh_x0) / sh_res, 0.0), nx - 1.000001)
            fy = min(max((xy[u, 1] - sh_y0) / sh_res, 0.0), ny - 1.000001)
            ix = int(fx)
            iy = int(fy)
            ax = fx - ix
            ay = fy - iy
        for c in range(n_cells):
            s = cell_site[c]
            pl = pl_los[s] if los[u, c] else pl_nlos[s]
            sh = 0.0
            if has_shadow:
                v = ((1 - ax) * (1 - ay) * sh_vals[c, iy, ix] + ax * (1 - ay) * sh_vals[c, iy, ix + 1]
                     + (1 - ax) * ay * sh_vals[c, iy + 1, ix] + ax * ay * sh_vals[c, iy + 1, ix + 1])
                sh = v * sigma_sh[u, c]
            pb = 0
            for p in range(1, 3):
                if gp[s, p] > gp[s, pb]:
                    pb = p
            best[u, c] = pb
            gb = gp[s, pb]
            rel = _wrap(az[s] - orient[c])
            tot = 0.0
            for b in range(n_beams):
                # rel in [-180, 180) and |beam_az| <= 60, so one fold suffices
                d = abs(rel - beam_az[b])
                if d > 180.0:
                    d = 360.0 - d
                de = el[s] - beam_tilt[b]
                att = min(k_az[b] * d * d + k_el[b] * de * de, beam_ftb[b])
                base = tx_per_beam - pl - sh + beam_peak[b] - att
                if has_fade:
                    base += fade[u, c, b]
                rsrp[u, c, b] = base + gb
                tot += math.exp(base * _K)
            expected[c] = sched_frac * tot
        for p in range(3):
            acc = 0.0
            for c in range(n_cells):
                acc += expected[c] * glin[cell_site[c], p]
            ipanel[p] = acc
        for c in range(n_cells):
            s = cell_site[c]
            pb = best[u, c]
            interf = max(ipanel[pb] - expected[c] * glin[s, pb], 0.0)
            denom = 10.0 * math.log10(interf + noise_mw)
            for b in range(n_beams):
                sinr[u, c, b] = rsrp[u, c, b] - denom
