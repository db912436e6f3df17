"""
Benchmark records and their CSV form.

Columns (fixed order): layer, variant, x, batch, threads, median_seconds
[s], effective_flops [FLOP/s], speedup_vs_dense, flops [FLOP],
activation_bytes [B], weight_bytes [B].
"""
import csv
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, List, Optional, Union

from sparseconv.errors import CodecError
from sparseconv.models.profile import LayerCost


@dataclass(frozen=True)
class BenchRecord:
    layer: str
    variant: str
    x: float
    batch: int
    threads: int
    median_seconds: float
    effective_flops: float
    speedup_vs_dense: float
    flops: float
    activation_bytes: float
    weight_bytes: float

    @property
    def cost(self) -> LayerCost:
        return LayerCost(self.flops, self.activation_bytes, self.weight_bytes)


CSV_COLUMNS = [f.name for f in fields(BenchRecord)]
_INT_COLUMNS = {"batch", "threads"}
_FLOAT_COLUMNS = set(CSV_COLUMNS) - _INT_COLUMNS - {"layer", "variant"}


def write_records_csv(path: Union[str, Path], records: Iterable[BenchRecord]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for record in records:
            writer.writerow(asdict(record))
    return path


def read_records_csv(path: Union[str, Path]) -> List[BenchRecord]:
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as e:
        raise CodecError(str(path), f"cannot open: {e}") from e
    records = []
    with handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != CSV_COLUMNS:
            raise CodecError(str(path), f"columns must be {','.join(CSV_COLUMNS)}")
        for line, row in enumerate(reader, start=2):
            try:
                values = {
                    key: int(val) if key in _INT_COLUMNS else float(val) if key in _FLOAT_COLUMNS else val
                    for key, val in row.items()
                }
            except (TypeError, ValueError):
                raise CodecError(str(path), f"line {line}: unparseable record") from None
            records.append(BenchRecord(**values))
    return records


def select(records: Iterable[BenchRecord], layer: Optional[str] = None,
           variant: Optional[str] = None) -> List[BenchRecord]:
    return [
        r for r in records
        if (layer is None or r.layer == layer) and (variant is None or r.variant == variant)
    ]


def nondecreasing_as_density_drops(records: Iterable[BenchRecord], attribute: str = "effective_flops",
                                   tolerance: float = 0.10) -> bool:
    """True when ``attribute`` never falls by more than ``tolerance`` as x decreases."""
    ordered = sorted(records, key=lambda r: r.x, reverse=True)
    best = None
    for record in ordered:
        value = getattr(record, attribute)
        if best is not None and value < best * (1.0 - tolerance):
            return False
        best = value if best is None else max(best, value)
    return True
