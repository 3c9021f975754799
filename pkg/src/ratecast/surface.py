"""Age-by-year rate surfaces: CSV ingestion, validation and year splits.

The CSV wire format is long form with header ``year,age,rate``, one row
per cell, full rectangular coverage over consecutive years and ages.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Union

import numpy as np

from .exceptions import DataError

PathOrFile = Union[str, Path, IO[str], IO[bytes]]


def _is_consecutive(values: np.ndarray) -> bool:
    return bool(np.all(np.diff(values) == 1))


@dataclass(frozen=True)
class AgeRateSurface:
    """Rectangular grid of strictly positive rates (events per person-year),
    indexed by consecutive calendar years (rows) and consecutive ages
    (columns). Immutable after construction.
    """

    years: np.ndarray
    ages: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        years = np.asarray(self.years, dtype=int)
        ages = np.asarray(self.ages, dtype=int)
        rates = np.asarray(self.rates, dtype=float)
        if years.ndim != 1 or ages.ndim != 1:
            raise ValueError("years and ages must be one-dimensional")
        if years.size < 1 or ages.size < 1:
            raise ValueError("surface needs at least one year and one age")
        if not _is_consecutive(years):
            raise ValueError("years must be consecutive integers with no gaps")
        if not _is_consecutive(ages):
            raise ValueError("ages must be consecutive integers with no gaps")
        if rates.shape != (years.size, ages.size):
            raise ValueError(
                f"rates shape {rates.shape} does not match "
                f"{years.size} years x {ages.size} ages"
            )
        if not np.all(np.isfinite(rates)):
            raise ValueError("rates must be finite")
        if np.any(rates <= 0.0):
            bad = np.argwhere(rates <= 0.0)[0]
            raise ValueError(
                f"rates must be strictly positive; rate at year "
                f"{years[bad[0]]}, age {ages[bad[1]]} is {rates[bad[0], bad[1]]}"
            )
        for arr in (years, ages, rates):
            arr.setflags(write=False)
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "ages", ages)
        object.__setattr__(self, "rates", rates)

    @property
    def n_years(self) -> int:
        return self.years.size

    @property
    def n_ages(self) -> int:
        return self.ages.size

    def through_year(self, year: int) -> "AgeRateSurface":
        """Sub-surface containing all years up to and including ``year``."""
        if year < self.years[0] or year > self.years[-1]:
            raise ValueError(f"year {year} outside surface span "
                             f"{self.years[0]}..{self.years[-1]}")
        n = int(year - self.years[0]) + 1
        return AgeRateSurface(self.years[:n].copy(), self.ages.copy(),
                              self.rates[:n].copy())

    def rates_for_years(self, years: Iterable[int]) -> np.ndarray:
        """Rows of the rate matrix for the given years, in the given order."""
        idx = [int(y - self.years[0]) for y in years]
        for i, y in zip(idx, years):
            if i < 0 or i >= self.n_years:
                raise ValueError(f"year {y} outside surface span")
        return self.rates[idx]


@dataclass(frozen=True)
class SampleSplit:
    """Training / validation / test partition of the year axis, stored as
    the last year of each span. Validation and test spans must be equally
    long.
    """

    training_end_year: int
    validation_end_year: int
    test_end_year: int

    def __post_init__(self):
        if not (self.training_end_year < self.validation_end_year
                < self.test_end_year):
            raise ValueError("split years must be strictly increasing")
        if (self.validation_end_year - self.training_end_year
                != self.test_end_year - self.validation_end_year):
            raise ValueError("validation span must equal test span")

    @property
    def validation_span(self) -> int:
        return self.validation_end_year - self.training_end_year

    @property
    def test_span(self) -> int:
        return self.test_end_year - self.validation_end_year


def split_by_fraction(surface: AgeRateSurface, test_fraction: float) -> SampleSplit:
    """Partition the year axis into training/validation/test spans.

    The test sample holds the last ``round(test_fraction * n_years)``
    years (round half up), the validation sample the same number of years
    immediately before, and the training sample the remainder.
    """
    if not 0.0 < test_fraction < 0.5:
        raise ValueError(f"test_fraction must be in (0, 0.5), got {test_fraction}")
    if surface.n_years < 10:
        raise ValueError(f"need at least 10 years to split, got {surface.n_years}")
    n = surface.n_years
    n_test = int(math.floor(test_fraction * n + 0.5))
    n_train = n - 2 * n_test
    if n_train < 5:
        raise ValueError(
            f"training sample of {n_train} years is shorter than 5 "
            f"(n={n}, test_fraction={test_fraction})"
        )
    last = int(surface.years[-1])
    return SampleSplit(
        training_end_year=last - 2 * n_test,
        validation_end_year=last - n_test,
        test_end_year=last,
    )


def _open_text(source: PathOrFile):
    """Return (text stream, needs_close) for a path, text or byte stream."""
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline=""), True
    if isinstance(source, (io.RawIOBase, io.BufferedIOBase)) or (
            hasattr(source, "read") and isinstance(source.read(0), bytes)):
        return io.TextIOWrapper(source, encoding="utf-8", newline=""), False
    return source, False


def load_rates(source: PathOrFile, floor: float | None = None) -> AgeRateSurface:
    """Read a long-format ``year,age,rate`` CSV into a validated surface.

    Parameters
    ----------
    source : path or open text/byte stream
        UTF-8 CSV with header ``year,age,rate``.
    floor : float, optional
        When given, rates below this value are raised to it. When absent
        (the default) any non-positive rate is an error, so bad data fails
        loudly instead of being silently mutated.

    Raises
    ------
    DataError
        Missing or duplicate cells, non-numeric values, non-positive rates
        with flooring disabled, or a malformed header; each reported with
        its CSV row number.
    """
    if floor is not None and floor <= 0.0:
        raise ValueError(f"floor must be positive, got {floor}")
    stream, needs_close = _open_text(source)
    try:
        reader = csv.reader(stream)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("empty CSV: missing 'year,age,rate' header")
        if [h.strip().lower() for h in header] != ["year", "age", "rate"]:
            raise DataError(f"expected header 'year,age,rate', got {header!r}")
        cells: dict[tuple[int, int], float] = {}
        for rownum, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise DataError(f"row {rownum}: expected 3 fields, got {len(row)}")
            try:
                year = int(row[0])
                age = int(row[1])
            except ValueError:
                raise DataError(f"row {rownum}: non-integer year or age "
                                f"({row[0]!r}, {row[1]!r})")
            try:
                rate = float(row[2])
            except ValueError:
                raise DataError(f"row {rownum}: non-numeric rate {row[2]!r}")
            if not math.isfinite(rate):
                raise DataError(f"row {rownum}: non-finite rate {row[2]!r}")
            if (year, age) in cells:
                raise DataError(f"row {rownum}: duplicate cell "
                                f"(year {year}, age {age})")
            if floor is not None and rate < floor:
                rate = floor
            elif rate <= 0.0:
                raise DataError(
                    f"row {rownum}: non-positive rate {rate} at year {year}, "
                    f"age {age} (flooring disabled)"
                )
            cells[(year, age)] = rate
    finally:
        if needs_close:
            stream.close()

    if not cells:
        raise DataError("CSV contains a header but no data rows")
    years = np.array(sorted({y for y, _ in cells}), dtype=int)
    ages = np.array(sorted({a for _, a in cells}), dtype=int)
    if not _is_consecutive(years):
        raise DataError("years are not consecutive; gaps in coverage")
    if not _is_consecutive(ages):
        raise DataError("ages are not consecutive; gaps in coverage")
    rates = np.empty((years.size, ages.size), dtype=float)
    for i, y in enumerate(years):
        for j, a in enumerate(ages):
            try:
                rates[i, j] = cells[(int(y), int(a))]
            except KeyError:
                raise DataError(f"missing cell for year {y}, age {a}")
    try:
        return AgeRateSurface(years, ages, rates)
    except ValueError as exc:
        raise DataError(str(exc)) from exc


def save_rates(surface: AgeRateSurface, destination: PathOrFile) -> None:
    """Write a surface as a long-format CSV at full stored precision,
    so that ``load_rates`` round-trips exactly."""
    if isinstance(destination, (str, Path)):
        stream = open(destination, "w", encoding="utf-8", newline="")
        needs_close = True
    else:
        stream = destination
        needs_close = False
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["year", "age", "rate"])
        for i, year in enumerate(surface.years):
            for j, age in enumerate(surface.ages):
                writer.writerow([int(year), int(age),
                                 repr(float(surface.rates[i, j]))])
    finally:
        if needs_close:
            stream.close()
