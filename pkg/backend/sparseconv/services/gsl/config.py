"""
Controller configuration.
"""
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveInt

from sparseconv.config import Config
from sparseconv.models.profile import PlatformProfile


class GslConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    profile: PlatformProfile
    check_period: PositiveInt = Config.GSL_CHECK_PERIOD
    # consecutive checks whose densities must agree before a layer counts as stabilized
    stabilization_window: PositiveInt = Config.GSL_STABILIZATION_WINDOW
    stabilization_epsilon: float = Field(default=Config.GSL_STABILIZATION_EPSILON, gt=0)
    batch: PositiveInt = 1
    manual_exclude: List[str] = Field(default_factory=list)
    exclude_pointwise: bool = False
    count_padding: bool = True
    max_iterations: Optional[PositiveInt] = None
