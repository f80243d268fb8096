"""Seeded synthetic data with known ground truth.

``make_interlock_fixture`` builds an affiliation table in which some true
firms are registered as several legal entities: administrative groups
(identical boards, same GUO or none) and near-duplicate groups (boards that
differ by one private director each). Economic size drives how many
interlocking directors a firm has, so large firms are hubs of the true
network. ``make_country_panel`` builds per-country firm samples cut to their
largest firms, plus development indicators that predict mean revenue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .completeness.lognormal import DEFAULT_SIGMA
from .ingest import (
    SIZE_BAND_COLUMNS,
    SIZE_BANDS,
    AffiliationRecord,
    AffiliationTable,
    CompanyRecord,
    CountryAggregate,
    IndicatorTable,
    size_band,
)


@dataclass
class InterlockFixture:
    table: AffiliationTable
    admin_groups: list[list[str]]
    near_dup_groups: list[list[str]]
    background: list[str]
    lookalike_pairs: list[tuple[str, str]] = field(default_factory=list)

    @property
    def n_entities(self) -> int:
        return len(self.table.companies)


def _weighted_choice(rng, weights, k):
    p = weights / weights.sum()
    return rng.choice(len(weights), size=k, replace=False, p=p)


def make_interlock_fixture(seed: int = 0, n_background: int = 1000, n_admin_groups: int = 50,
                           n_near_dup_groups: int = 30, admin_size: tuple[int, int] = (3, 8),
                           near_dup_size: tuple[int, int] = (2, 5), n_lookalike_pairs: int = 20,
                           seats_per_firm: float = 2.2, hub_exponent: float = 0.8,
                           planted_size_exponent: float = 0.5, country: str = "SE") -> InterlockFixture:
    """Planted-duplicate interlock table.

    ``n_background`` distinct firms (``n_lookalike_pairs`` of them sister
    firms whose boards overlap by half but whose positions differ) plus
    ``n_admin_groups`` and ``n_near_dup_groups`` firms each registered as
    several entities. Entity ids are shuffled so groups are not contiguous.
    """
    rng = np.random.default_rng(seed)
    n_sisters = n_lookalike_pairs
    n_plain = n_background - n_sisters
    n_true = n_plain + n_admin_groups + n_near_dup_groups
    if n_plain < 2 * n_sisters + 10:
        raise ValueError("too few background firms for the requested sister pairs")

    employees = np.maximum(1, np.rint(rng.lognormal(3.5, 1.6, size=n_true))).astype(np.int64)
    productivity = rng.lognormal(11.5, 0.5, size=n_true)
    revenue = employees * productivity

    # large firms are more often split into administrative entities
    kind = np.zeros(n_true, dtype=np.int8)  # 0 plain, 1 admin, 2 near-dup
    size_w = employees.astype(float) ** planted_size_exponent
    planted = _weighted_choice(rng, size_w, n_admin_groups + n_near_dup_groups)
    kind[planted[:n_admin_groups]] = 1
    kind[planted[n_admin_groups:]] = 2

    # interlocking directors attach preferentially to large firms
    hub_w = employees.astype(float) ** hub_exponent
    interlockers: list[list[int]] = [[] for _ in range(n_true)]
    n_directors = 0
    total_seats = 0
    target = seats_per_firm * n_true
    while total_seats < target:
        k = 2 + int(rng.geometric(0.55)) - 1
        firms = _weighted_choice(rng, hub_w, k)
        for f in firms:
            interlockers[f].append(n_directors)
        n_directors += 1
        total_seats += k
    plain_ids = np.flatnonzero(kind == 0)
    for f in range(n_true):
        if not interlockers[f]:
            other = int(rng.choice(plain_ids[plain_ids != f]))
            interlockers[f].append(n_directors)
            interlockers[other].append(n_directors)
            n_directors += 1

    director_names = {}

    def interlocker_name(d):
        if d not in director_names:
            director_names[d] = f"D{d:06d}"
        return director_names[d]

    private_counter = [0]

    def private(prefix="P"):
        private_counter[0] += 1
        return f"{prefix}{private_counter[0]:07d}"

    guo_pool = [f"G{i:04d}" for i in range(max(50, n_true // 4))]
    entities: list[tuple[CompanyRecord, frozenset[str]]] = []
    admin_groups: list[list[int]] = []
    near_groups: list[list[int]] = []
    background: list[int] = []
    pairs: list[tuple[int, int]] = []

    def add_entity(board, guo, emp, rev, mcap):
        idx = len(entities)
        rec = CompanyRecord("", country, float(round(rev, 2)), int(emp), guo,
                            None if mcap is None else float(round(mcap, 2)))
        entities.append((rec, frozenset(board)))
        return idx

    def mcap_of(f):
        return float(revenue[f] * rng.lognormal(0.0, 0.3)) if employees[f] >= 50 else None

    def split(total, m):
        main = rng.uniform(0.6, 0.9)
        shares = np.full(m, (1 - main) / (m - 1))
        shares[0] = main
        return shares * total

    # sister pairs: firm A with 5 private directors shared with sister B
    sister_sources = rng.choice(plain_ids, size=n_sisters, replace=False)
    sister_set = set(int(s) for s in sister_sources)
    for f in range(n_true):
        links = [interlocker_name(d) for d in interlockers[f]]
        if kind[f] == 0:
            if f in sister_set:
                shared = [private() for _ in range(5)]
                a_links = links
                while len(a_links) < 4:
                    d = n_directors
                    n_directors += 1
                    mates = _weighted_choice(rng, hub_w, 3)
                    a_links = a_links + [interlocker_name(d)]
                    for mt in mates:
                        if mt != f:
                            interlockers[mt].append(d)
                a_links = a_links[:4] if len(a_links) > 4 else a_links
                a = add_entity(shared + a_links, None, employees[f], revenue[f], mcap_of(f))
                # the sister's only outside tie is a two-board director to a plain firm
                mate = int(rng.choice([p for p in plain_ids if p != f and p not in sister_set]))
                d = n_directors
                n_directors += 1
                interlockers[mate].append(d)
                small = max(1, int(employees[f] // 20))
                b = add_entity(shared + [interlocker_name(d)], None, small, revenue[f] / 20, None)
                background.extend([a, b])
                pairs.append((a, b))
            continue
        # plain, admin and near-dup firms are materialised after all interlockers are placed
    for f in range(n_true):
        links = [interlocker_name(d) for d in interlockers[f]]
        if kind[f] == 0:
            if f in sister_set:
                continue
            board = [private() for _ in range(int(rng.integers(3, 7)))] + links
            guo = str(rng.choice(guo_pool)) if rng.random() < 0.4 else None
            background.append(add_entity(board, guo, employees[f], revenue[f], mcap_of(f)))
        elif kind[f] == 1:
            m = int(rng.integers(admin_size[0], admin_size[1] + 1))
            board = [private() for _ in range(int(rng.integers(3, 7)))] + links
            guo = f"GA{f:05d}" if rng.random() < 0.7 else None
            emps = np.maximum(1, np.rint(split(employees[f], m))).astype(int)
            revs = split(revenue[f], m)
            mcap = mcap_of(f)
            group = [add_entity(board, guo, emps[i], revs[i], mcap if i == 0 else None) for i in range(m)]
            admin_groups.append(group)
        else:
            m = int(rng.integers(near_dup_size[0], near_dup_size[1] + 1))
            shared = [private() for _ in range(int(rng.integers(3, 6)))] + links
            guo = f"GN{f:05d}" if rng.random() < 0.5 else None
            emps = np.maximum(1, np.rint(split(employees[f], m))).astype(int)
            revs = split(revenue[f], m)
            mcap = mcap_of(f)
            group = [add_entity(shared + [private("U")], guo, emps[i], revs[i], mcap if i == 0 else None)
                     for i in range(m)]
            near_groups.append(group)

    # shuffled, zero-padded entity ids
    order = rng.permutation(len(entities))
    names = {int(e): f"{country}{int(r):06d}" for r, e in enumerate(order)}
    companies = {}
    positions = []
    for e, (rec, board) in enumerate(entities):
        fid = names[e]
        companies[fid] = CompanyRecord(fid, rec.country, rec.revenue_usd, rec.employees, rec.guo_id, rec.market_cap_usd)
        positions.extend(AffiliationRecord(d, fid) for d in board)
    table = AffiliationTable(dict(sorted(companies.items())), tuple(sorted(positions)))

    def named(group):
        return sorted(names[e] for e in group)

    return InterlockFixture(
        table,
        sorted(named(g) for g in admin_groups),
        sorted(named(g) for g in near_groups),
        sorted(names[e] for e in background),
        sorted((names[a], names[b]) for a, b in pairs),
    )


# -- completeness fixtures ---------------------------------------------------------------

@dataclass
class SyntheticCountry:
    country: str
    mu: float
    C: float
    firm_count: int
    observed: np.ndarray
    indicators: dict[str, float] = field(default_factory=dict)

    @property
    def r_obs_mean(self) -> float:
        return float(self.observed.mean())

    def r_hat_mean(self, sigma: float = DEFAULT_SIGMA) -> float:
        return math.exp(self.mu + sigma ** 2 / 2)


def truncated_sample(mu: float, sigma: float, C: float, population: int, rng) -> np.ndarray:
    """Draw ``population`` lognormal revenues and keep the largest fraction ``C``."""
    x = rng.lognormal(mu, sigma, size=population)
    keep = max(1, int(round(C * population)))
    return np.sort(x)[-keep:]


def country_code(i: int) -> str:
    return chr(ord("A") + i // 26) + chr(ord("A") + i % 26)


def make_truncated_countries(n_countries: int = 20, seed: int = 0, population: int = 1_000_000,
                             mu_range=(9.0, 13.0), c_range=(0.2, 0.95),
                             sigma: float = DEFAULT_SIGMA) -> list[SyntheticCountry]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n_countries):
        mu = float(rng.uniform(*mu_range))
        C = float(rng.uniform(*c_range))
        obs = truncated_sample(mu, sigma, C, population, rng)
        out.append(SyntheticCountry(country_code(i), mu, C, population, obs))
    return out


INDICATOR_CODES = ("NY.GDP.PCAP.KD", "IC.TAX.DURS", "AG.YLD.CREL.KG", "IC.TAX.TOTL.CP.ZS", "SP.RUR.TOTL.ZG")


def make_country_panel(n_countries: int = 40, seed: int = 0, population: int = 20_000, n_noise: int = 8,
                       sigma: float = DEFAULT_SIGMA, c_range=(0.25, 0.95)) -> list[SyntheticCountry]:
    """Countries whose log mean revenue is driven mostly by GDP per capita.

    Raw indicator values are positive (GDP per capita and the tax-time
    indicator are meant to be log-flagged on load). ``population`` firms are
    drawn per country and only the top fraction ``C`` is kept as observed.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n_countries):
        log_gdp = rng.normal(9.5, 1.0)
        log_tax = rng.normal(5.3, 0.5)
        cereal = rng.normal(4000, 1200)
        taxrate = rng.normal(40, 10)
        rural = rng.normal(0.5, 1.0)
        log_r_hat = 2.0 + 0.9 * log_gdp - 0.25 * (log_tax - 5.3) + 0.0001 * (cereal - 4000) + rng.normal(0, 0.1)
        mu = log_r_hat - sigma ** 2 / 2
        C = float(rng.uniform(*c_range))
        obs = truncated_sample(mu, sigma, C, population, rng)
        ind = {
            "NY.GDP.PCAP.KD": float(math.exp(log_gdp)),
            "IC.TAX.DURS": float(math.exp(log_tax)),
            "AG.YLD.CREL.KG": float(max(cereal, 100.0)),
            "IC.TAX.TOTL.CP.ZS": float(max(taxrate, 1.0)),
            "SP.RUR.TOTL.ZG": float(rural),
            "NY.GDP.MKTP.CD": float(math.exp(log_gdp) * population * rng.lognormal(3.0, 0.2)),
        }
        for j in range(n_noise):
            ind[f"NOISE.{j:02d}"] = float(rng.normal())
        out.append(SyntheticCountry(country_code(i), mu, C, population, obs, ind))
    return out


def panel_tables(countries: list[SyntheticCountry], with_revenue_for: int | None = None,
                 sigma: float = DEFAULT_SIGMA, seed: int = 0):
    """Companies, aggregates and indicators for a synthetic panel.

    The first ``with_revenue_for`` countries (all by default) get an
    aggregate total revenue; the rest only a firm count. Employee counts are
    derived from revenue so size-class coverage can be computed.
    """
    rng = np.random.default_rng(seed)
    n_rev = len(countries) if with_revenue_for is None else with_revenue_for
    companies = {}
    aggregates = []
    for ci, c in enumerate(countries):
        for j, r in enumerate(c.observed):
            fid = f"{c.country}{j:07d}"
            emp = int(max(0, round(r / 150_000.0 * rng.lognormal(0, 0.3))))
            companies[fid] = CompanyRecord(fid, c.country, float(round(r, 2)), emp)
        # official size classes from a full population draw of the same law
        full = rng.lognormal(c.mu, sigma, size=c.firm_count)
        emp_full = np.maximum(0, np.rint(full / 150_000.0 * rng.lognormal(0, 0.3, size=len(full)))).astype(int)
        bands = {label: 0 for label, _, _ in SIZE_BANDS}
        for e in emp_full:
            bands[size_band(int(e))] += 1
        total = c.r_hat_mean(sigma) * c.firm_count if ci < n_rev else None
        aggregates.append(CountryAggregate(c.country, c.firm_count, total, bands))
    rows = {c.country: dict(c.indicators) for c in countries}
    return (AffiliationTable(dict(sorted(companies.items())), ()), aggregates, IndicatorTable(rows, frozenset()))


def write_panel_files(countries: list[SyntheticCountry], directory, with_revenue_for: int | None = None,
                      seed: int = 0) -> dict[str, str]:
    """Write companies/affiliations/aggregates/indicators CSVs for a panel."""
    import csv
    import os

    from .ingest import dump_affiliations, dump_companies, format_decimal

    os.makedirs(directory, exist_ok=True)
    table, aggregates, indicators = panel_tables(countries, with_revenue_for, seed=seed)
    paths = {
        "companies": os.path.join(directory, "companies.csv"),
        "affiliations": os.path.join(directory, "affiliations.csv"),
        "aggregates": os.path.join(directory, "aggregates.csv"),
        "indicators": os.path.join(directory, "indicators.csv"),
    }
    dump_companies(table, paths["companies"])
    dump_affiliations(table, paths["affiliations"])
    with open(paths["aggregates"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "firm_count", "total_revenue_usd", *SIZE_BAND_COLUMNS.values()])
        for a in aggregates:
            w.writerow([a.country, a.firm_count, format_decimal(a.total_revenue_usd),
                        *(a.size_class_counts[label] for label in SIZE_BAND_COLUMNS)])
    codes = sorted({k for c in countries for k in c.indicators})
    with open(paths["indicators"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", *codes])
        for c in countries:
            w.writerow([c.country, *(format_decimal(c.indicators.get(k)) for k in codes)])
    return paths
