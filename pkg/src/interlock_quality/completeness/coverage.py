"""Register coverage per employee size class against official counts."""

from __future__ import annotations

from collections import Counter
from typing import Iterable

from ..exceptions import MissingAggregates
from ..ingest import SIZE_BANDS, AffiliationTable, CountryAggregate, size_band


def coverage_by_size_class(table: AffiliationTable, aggregates: Iterable[CountryAggregate],
                           countries: Iterable[str] | None = None) -> dict[str, dict[str, float]]:
    """Dataset firm count over official firm count, per country and band.

    Firms without an employee count are not placed in any band. A band with
    an official count of zero yields NaN.
    """
    by_country = {a.country: a for a in aggregates}
    if countries is None:
        wanted = [c for c, a in sorted(by_country.items()) if a.size_class_counts is not None]
        if not wanted:
            raise MissingAggregates("no aggregate row carries size-class counts")
    else:
        wanted = list(countries)
        lacking = [c for c in wanted if c not in by_country or by_country[c].size_class_counts is None]
        if lacking:
            raise MissingAggregates(f"no size-class counts for {', '.join(lacking)}")
    counts: dict[str, Counter] = {c: Counter() for c in wanted}
    for comp in table.companies.values():
        if comp.country in counts and comp.employees is not None:
            counts[comp.country][size_band(comp.employees)] += 1
    out = {}
    for c in wanted:
        official = by_country[c].size_class_counts
        out[c] = {
            label: (counts[c][label] / official[label] if official.get(label) else float("nan"))
            for label, _, _ in SIZE_BANDS
        }
    return out
