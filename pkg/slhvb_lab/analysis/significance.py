"""Z-test and bootstrap test for a positive difference-in-differences."""

import logging
import math
from typing import Mapping, Sequence, Tuple

import numpy as np
from scipy.special import ndtr

from slhvb_lab.analysis.did import CELLS, CellStats, ObservationTable, cells_by_key
from slhvb_lab.errors import DegenerateVariance

logger = logging.getLogger(__name__)

MIN_BOOTSTRAP_DRAWS = 100


def normal_cdf(x: float) -> float:
    """Standard normal CDF."""
    return float(ndtr(x))


def _did_of_means(means: Mapping[Tuple[str, str], float]) -> float:
    return (means[("treatment", "post")] - means[("control", "post")]) - (
        means[("treatment", "pre")] - means[("control", "pre")]
    )


def did_z_test(cells: Sequence[CellStats]) -> Tuple[float, float]:
    """One-sided Z-test of H1: DID > 0 from four cell summaries.

    Returns (z, p) with p = 1 - Phi(z).
    """
    keyed = cells_by_key(cells)
    delta = _did_of_means({key: cell.mean for key, cell in keyed.items()})
    spread = math.sqrt(sum(cell.se_mean**2 for cell in keyed.values()))
    z = delta / spread
    return z, normal_cdf(-z)


def samples_from_table(table: ObservationTable) -> Mapping[Tuple[str, str], np.ndarray]:
    return {key: table.cell(*key) for key in CELLS}


def bootstrap_did(
    samples: Mapping[Tuple[str, str], Sequence[float]],
    draws_b: int,
    resample_size: int,
    rng: np.random.Generator,
    chunk_bytes: int = 64 * 2**20,
) -> Tuple[float, float]:
    """Bootstrap Z-test of a positive DID.

    Each population is resampled ``draws_b`` times with ``resample_size`` values
    drawn with replacement; the bootstrap means give a point estimate and a
    standard error per population, which feed the Z formula.

    Raises:
        DegenerateVariance: if any bootstrap standard error is zero.
    """
    if draws_b < MIN_BOOTSTRAP_DRAWS:
        raise ValueError(f"need at least {MIN_BOOTSTRAP_DRAWS} draws, got {draws_b}")
    if resample_size < 1:
        raise ValueError(f"resample_size must be positive, got {resample_size}")

    means, variances = {}, {}
    for key in CELLS:
        values = np.asarray(samples[key], dtype=float)
        if values.size == 0:
            raise ValueError(f"population {key} is empty")
        rows_per_chunk = max(1, chunk_bytes // (8 * resample_size))
        boot = np.empty(draws_b)
        for start in range(0, draws_b, rows_per_chunk):
            stop = min(draws_b, start + rows_per_chunk)
            idx = rng.integers(0, values.size, size=(stop - start, resample_size))
            boot[start:stop] = values[idx].mean(axis=1)
        se = float(np.std(boot, ddof=1))
        if se == 0.0:
            raise DegenerateVariance(f"bootstrap SE of population {key} is zero")
        means[key] = float(np.mean(boot))
        variances[key] = se**2

    z = _did_of_means(means) / math.sqrt(sum(variances.values()))
    logger.debug(f"bootstrap DID z={z:.4f} over {draws_b} draws of {resample_size}")
    return z, normal_cdf(-z)
