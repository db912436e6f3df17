"""
Alpha estimation from measured sweeps.
"""
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

import numpy as np
from loguru import logger
from scipy.optimize import lsq_linear

from sparseconv.errors import FitError
from sparseconv.models.profile import PlatformProfile
from sparseconv.services.bench.records import BenchRecord, select
from sparseconv.services.bench.variants import BASELINE

MAX_SELECTION_ROUNDS = 10


@dataclass(frozen=True)
class AlphaFit:
    alpha: float
    points: int
    rounds: int
    residual: float


def _compute_bound(records: List[BenchRecord], profile: PlatformProfile, alpha: float) -> List[BenchRecord]:
    chosen = []
    for r in records:
        cost = r.cost
        t_compute = alpha * r.x * cost.C / profile.F
        t_bw = (cost.S_A + profile.beta * r.x * cost.S_W) / profile.B
        if t_compute > t_bw:
            chosen.append(r)
    return chosen


def _solve(points: List[BenchRecord], profile: PlatformProfile) -> tuple:
    # relative residuals: alpha*x*C/(F*t) - 1
    a = np.array([[r.x * r.cost.C / (profile.F * r.median_seconds)] for r in points])
    b = np.ones(len(points))
    result = lsq_linear(a, b, bounds=(1.0, np.inf))
    return float(result.x[0]), float(np.sqrt(np.mean(result.fun ** 2)))


def fit_alpha(records: Iterable[BenchRecord], profile: PlatformProfile,
              variant: str = "sparse_direct") -> AlphaFit:
    """
    Least-squares alpha for t = alpha * x * C / F over the points the model
    calls compute bound. The selection depends on alpha, so select and fit
    alternate until the selection stops changing.
    """
    records = [r for r in select(records, variant=variant) if r.median_seconds > 0]
    alpha = profile.alpha
    chosen: List[BenchRecord] = []
    for rounds in range(1, MAX_SELECTION_ROUNDS + 1):
        selection = _compute_bound(records, profile, alpha)
        if len(selection) < 2:
            raise FitError(
                f"need at least 2 compute-bound '{variant}' points, found {len(selection)}",
                {"alpha": alpha, "records": len(records)},
            )
        if selection == chosen:
            break
        chosen = selection
        alpha, residual = _solve(chosen, profile)
        logger.debug(f"[FitAlpha] round {rounds}: alpha={alpha:.3f} over {len(chosen)} points")
    logger.info(f"[FitAlpha] alpha={alpha:.3f} from {len(chosen)} compute-bound points (rms {residual:.3g})")
    return AlphaFit(alpha=alpha, points=len(chosen), rounds=rounds, residual=residual)


def fit_profile(records: Iterable[BenchRecord], profile: PlatformProfile,
                variant: str = "sparse_direct") -> PlatformProfile:
    return profile.with_alpha(fit_alpha(records, profile, variant).alpha)


def measured_alpha(records: Iterable[BenchRecord], profile: Optional[PlatformProfile] = None,
                   variant: str = "sparse_direct") -> Dict[str, float]:
    """
    Per layer, the sparse kernel's time at x = 1 over the dense time: C/F
    with a profile, the measured dense baseline without one.
    """
    records = list(records)
    alphas = {}
    for layer in dict.fromkeys(r.layer for r in records):
        full = [r for r in select(records, layer=layer, variant=variant) if math.isclose(r.x, 1.0)]
        if not full:
            continue
        t_sparse = full[0].median_seconds
        if profile is not None:
            t_dense = full[0].cost.C / profile.F
        else:
            dense = select(records, layer=layer, variant=BASELINE["conv"]) \
                or select(records, layer=layer, variant=BASELINE["fc"])
            if not dense:
                continue
            t_dense = dense[0].median_seconds
        alphas[layer] = t_sparse / t_dense
    if not alphas:
        raise FitError(f"no '{variant}' record at x = 1 with a dense reference")
    return alphas
