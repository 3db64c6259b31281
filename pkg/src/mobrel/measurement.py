"""L1 moving-average and L3 recursive filtering of raw RSRP (dB domain)."""

from __future__ import annotations

import numpy as np


class FilterBank:
    """L1 ring buffers per (cell, beam) and one L3 register per cell.

    ``batch`` adds leading dimensions so one bank can hold every UE of a run;
    a bank with ``batch=()`` is a single UE's bank.
    """

    def __init__(self, n_cells: int, n_beams: int, window: int, alpha: float,
                 batch: tuple[int, ...] = ()):
        if not 0 < alpha <= 1:
            raise ValueError("l3 alpha must lie in (0, 1]")
        self.window = window
        self.alpha = alpha
        # window axis first so the L1 mean is a sum of contiguous slabs
        self.buf = np.zeros((window,) + batch + (n_cells, n_beams))
        self.count = np.zeros(batch + (n_cells, n_beams), dtype=np.int64)
        self.n_updates = 0  # count of measure_all() calls
        self.l1 = np.full(batch + (n_cells, n_beams), np.nan)
        self.l3 = np.full(batch + (n_cells,), np.nan)

    @classmethod
    def from_config(cls, cfg, batch: tuple[int, ...] = ()) -> "FilterBank":
        return cls(cfg.n_cells, cfg.n_beams, cfg.l1_window, cfg.l3_alpha, batch)


def l1_update(bank: FilterBank, cell: int, beam: int, raw: float) -> float:
    """Push one raw sample for a single link; return the mean of the last ``window`` samples."""
    k = bank.count[cell, beam]
    bank.buf[k % bank.window, cell, beam] = raw
    bank.count[cell, beam] = k + 1
    n = min(k + 1, bank.window)
    out = float(np.sum(bank.buf[:n, cell, beam]) / n)
    bank.l1[cell, beam] = out
    return out


def l3_update(bank: FilterBank, cell: int, l1_out: float) -> float:
    """F <- (1 - a) F + a M, seeded with the first input."""
    prev = bank.l3[cell]
    a = bank.alpha
    f = l1_out if np.isnan(prev) else (1 - a) * prev + a * l1_out
    bank.l3[cell] = f
    return float(f)


def measure_all(bank: FilterBank, raw: np.ndarray) -> np.ndarray:
    """Update every link of the bank with ``raw`` RSRP (shape ``batch + (C, B)``).

    Cell-level L3 input is the best beam's L1 output. Returns the L3 map.
    """
    k = bank.n_updates
    bank.n_updates += 1
    bank.buf[k % bank.window] = raw
    n = min(k + 1, bank.window)
    bank.l1 = bank.buf[:n].sum(axis=0) / n
    m = bank.l1.max(axis=-1)
    if k == 0:
        bank.l3 = m.copy()
    else:
        a = bank.alpha
        bank.l3 = (1 - a) * bank.l3 + a * m
    return bank.l3
