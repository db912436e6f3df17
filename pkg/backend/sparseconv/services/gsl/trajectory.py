"""
Trajectory CSV (``iteration,layer,density``) and the replay source.
"""
import csv
from itertools import groupby
from pathlib import Path
from typing import Dict, Iterator, List, NamedTuple, Sequence, Tuple, Union

from loguru import logger

from sparseconv.errors import TrajectoryFormatError
from sparseconv.models.layer import NamedLayer
from sparseconv.services.gsl.state import DirectiveKind, LayerStatus

HEADER = ["iteration", "layer", "density"]


class TrajectoryRow(NamedTuple):
    iteration: int
    layer: str
    density: float


def read_trajectory(path: Union[str, Path]) -> List[TrajectoryRow]:
    path = Path(path)
    source = str(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as e:
        raise TrajectoryFormatError(source, 0, f"cannot open: {e}") from e

    rows = []
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != HEADER:
            raise TrajectoryFormatError(source, 1, f"header must be {','.join(HEADER)}, got {header}")
        for line, record in enumerate(reader, start=2):
            if not record or all(not field.strip() for field in record):
                continue
            if len(record) != 3:
                raise TrajectoryFormatError(source, line, f"expected 3 fields, got {len(record)}")
            try:
                iteration = int(record[0])
                density = float(record[2])
            except ValueError:
                raise TrajectoryFormatError(source, line, f"unparseable row {record}") from None
            layer = record[1].strip()
            if iteration < 0 or not layer:
                raise TrajectoryFormatError(source, line, "iteration must be >= 0 and layer non-empty")
            if not (0.0 <= density <= 1.0):
                raise TrajectoryFormatError(source, line, f"density {density} outside [0, 1]")
            rows.append(TrajectoryRow(iteration, layer, density))
    return rows


def write_trajectory(path: Union[str, Path], rows: Sequence[Tuple[int, str, float]]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(HEADER)
        for iteration, layer, density in rows:
            writer.writerow([iteration, layer, f"{density:.6g}"])


class TrajectoryWriter:
    """Appends trajectory rows as they are observed."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._handle = self.path.open("w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._handle)
        self._writer.writerow(HEADER)

    def write(self, iteration: int, densities: Dict[str, float]) -> None:
        for layer, density in densities.items():
            self._writer.writerow([iteration, layer, f"{density:.6g}"])
        self._handle.flush()

    def close(self) -> None:
        if not self._handle.closed:
            self._handle.close()


class ReplayTrajectorySource:
    """Replays a recorded trajectory; directives are logged, not applied."""

    def __init__(self, path: Union[str, Path], layers: Sequence[NamedLayer]):
        self.path = Path(path)
        self._layers = list(layers)
        self._rows = sorted(read_trajectory(path), key=lambda row: row.iteration)
        self.applied = []

    def layers(self) -> List[NamedLayer]:
        return self._layers

    def snapshots(self) -> Dict:
        return {}

    def start(self, states) -> None:
        excluded = [s.layer_id for s in states if s.status is LayerStatus.EXCLUDED]
        logger.debug(f"[Replay] replaying {len(self._rows)} rows, excluded {excluded}")

    def checks(self) -> Iterator[Tuple[int, Dict[str, float]]]:
        for iteration, group in groupby(self._rows, key=lambda row: row.iteration):
            yield iteration, {row.layer: row.density for row in group}

    def apply(self, directives) -> None:
        for directive in directives:
            if directive.kind is not DirectiveKind.CONTINUE:
                logger.info(f"[Replay] iter {directive.iteration}: {directive.kind.value} {directive.layer_id}")
        self.applied.extend(directives)

    def freeze(self, layer_ids) -> None:
        logger.debug(f"[Replay] limit reached with {layer_ids} still active")

    def close(self) -> None:
        logger.debug(f"[Replay] finished {self.path}")

    def final(self) -> None:
        return None
