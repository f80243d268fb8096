import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interlock_quality.exceptions import DuplicateKey, IOFailure, SchemaMismatch
from interlock_quality.ingest import (
    AffiliationTable,
    CompanyRecord,
    CountryAggregate,
    dump_table,
    format_decimal,
    load_table,
    parse_affiliations,
    parse_aggregates,
    parse_companies,
    parse_indicators,
    size_band,
)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_company_row_maps_fields(tmp_path):
    p = write(tmp_path / "c.csv", "firm_id,country,revenue_usd,employees,guo_id\nS1,SE,1000,10,G1\n")
    t = parse_companies(p)
    assert t.companies["S1"] == CompanyRecord("S1", "SE", 1000.0, 10, "G1")


def test_blank_optionals_are_absent_not_zero(tmp_path):
    p = write(tmp_path / "c.csv", "firm_id,country,revenue_usd,employees,guo_id\nS2,SE,,,\n")
    rec = parse_companies(p).companies["S2"]
    assert rec == CompanyRecord("S2", "SE")
    assert rec.revenue_usd is None and rec.employees is None


def test_duplicate_firm_strict_names_lines(tmp_path):
    p = write(tmp_path / "c.csv", "firm_id,country\nS1,SE\nS2,SE\nS1,NO\n")
    with pytest.raises(DuplicateKey) as err:
        parse_companies(p)
    assert "S1" in str(err.value) and "2" in str(err.value) and "4" in str(err.value)


def test_duplicate_firm_lenient_last_wins(tmp_path):
    p = write(tmp_path / "c.csv", "firm_id,country\nS1,SE\nS1,NO\n")
    assert parse_companies(p, lenient=True).companies["S1"].country == "NO"


def test_empty_firm_id_rejected_with_line(tmp_path):
    p = write(tmp_path / "c.csv", "firm_id,country\n,SE\nS1,SE\n")
    t = parse_companies(p)
    assert list(t.companies) == ["S1"]
    assert t.rejected_lines == (2,)


def test_column_mapping(tmp_path):
    p = write(tmp_path / "c.csv", "ID,CTRY,REV\nA1,de,5\n")
    t = parse_companies(p, {"firm_id": "ID", "country": "CTRY", "revenue_usd": "REV"})
    assert t.companies["A1"] == CompanyRecord("A1", "DE", 5.0)


def test_missing_mapped_column(tmp_path):
    p = write(tmp_path / "c.csv", "firm,country\nA,SE\n")
    with pytest.raises(SchemaMismatch, match="firm_id"):
        parse_companies(p)


def test_missing_file_names_path(tmp_path):
    missing = tmp_path / "nope.csv"
    with pytest.raises(IOFailure, match="nope.csv"):
        parse_companies(missing)


@pytest.fixture
def companies(tmp_path):
    return parse_companies(write(tmp_path / "c.csv", "firm_id,country\nS1,SE\nS2,SE\n"))


def test_duplicate_positions_collapse(tmp_path, companies):
    t = parse_affiliations(write(tmp_path / "a.csv", "director_id,firm_id\nd1,S1\nd1,S1\n"), companies)
    assert [(p.director_id, p.firm_id) for p in t.positions] == [("d1", "S1")]
    assert t.duplicate_positions == 1


def test_dangling_position_counted(tmp_path, companies):
    t = parse_affiliations(write(tmp_path / "a.csv", "director_id,firm_id\nd9,UNKNOWN_FIRM\nd1,S1\n"), companies)
    assert t.dangling_positions == 1
    assert all(p.firm_id in t.companies for p in t.positions)


def test_boards_from_positions(tmp_path, companies):
    t = parse_affiliations(write(tmp_path / "a.csv", "director_id,firm_id\nd1,S1\nd2,S1\nd1,S2\n"), companies)
    b = t.boards()
    assert b["S1"] == {"d1", "d2"} and b["S2"] == {"d1"}


def test_aggregate_row(tmp_path):
    p = write(tmp_path / "g.csv", "country,firm_count,total_revenue_usd\nSE,700000,9.1e11\n")
    assert parse_aggregates(p) == [CountryAggregate("SE", 700000, 9.1e11)]


def test_aggregate_size_classes_must_fit():
    with pytest.raises(ValueError):
        CountryAggregate("SE", 10, None, {"<10": 8, "10-19": 5})


def test_indicator_log_flag(tmp_path):
    p = write(tmp_path / "i.csv", "country,X,Y\nSE,100,3\n")
    t = parse_indicators(p, {"X"})
    assert t.rows["SE"]["X"] == pytest.approx(4.6052, abs=1e-4)
    assert t.rows["SE"]["Y"] == 3.0


def test_indicator_nonpositive_under_log_is_missing(tmp_path, caplog):
    p = write(tmp_path / "i.csv", "country,X\nSE,-5\nNO,\n")
    t = parse_indicators(p, {"X"})
    assert t.rows["SE"]["X"] is None and t.rows["NO"]["X"] is None
    assert "nonpositive" in caplog.text


def test_indicator_matrix_nan_for_missing(tmp_path):
    t = parse_indicators(write(tmp_path / "i.csv", "country,A,B\nSE,1,\nNO,2,3\n"))
    countries, codes, X = t.matrix()
    assert countries == ["NO", "SE"] and codes == ["A", "B"]
    assert math.isnan(X[1, 1]) and X[0, 1] == 3


def test_size_bands():
    assert [size_band(e) for e in (0, 9, 10, 19, 20, 49, 50, 249, 250)] == [
        "<10", "<10", "10-19", "10-19", "20-49", "20-49", "50-249", "50-249", ">=250"]


def test_format_decimal_reparses():
    for x in (0.1, 1e300, 123456789.123, 5e-324):
        assert float(format_decimal(x)) == x
    assert format_decimal(None) == "" and format_decimal(7) == "7"


# -- round trips ---------------------------------------------------------------------

ids = st.text("abcdefgh0123456789", min_size=1, max_size=4)
money = st.one_of(st.none(), st.floats(0, 1e12, allow_nan=False, allow_infinity=False))


@st.composite
def tables(draw):
    firms = draw(st.lists(ids, min_size=1, max_size=15, unique=True))
    companies = {}
    for f in firms:
        companies[f] = CompanyRecord(
            f, draw(st.sampled_from(["SE", "NO", "DK"])), draw(money),
            draw(st.one_of(st.none(), st.integers(0, 10 ** 6))),
            draw(st.one_of(st.none(), ids)), draw(money))
    directors = draw(st.lists(ids, min_size=0, max_size=10, unique=True))
    pairs = draw(st.lists(st.tuples(st.sampled_from(directors), st.sampled_from(firms)), max_size=30)
                 if directors else st.just([]))
    from interlock_quality.ingest import AffiliationRecord
    positions = tuple(sorted({AffiliationRecord(d, f) for d, f in pairs}))
    return AffiliationTable(dict(sorted(companies.items())), positions)


@settings(max_examples=60, deadline=None)
@given(tables())
def test_dump_reparse_identity(tmp_path_factory, table):
    d = tmp_path_factory.mktemp("rt")
    c, a = dump_table(table, d)
    again = load_table(c, a)
    assert again == table
    c2, a2 = dump_table(again, d, stem="second_")
    assert c.read_bytes() == c2.read_bytes() and a.read_bytes() == a2.read_bytes()


@settings(max_examples=30, deadline=None)
@given(tables(), st.randoms(use_true_random=False))
def test_row_order_does_not_matter(tmp_path_factory, table, rnd):
    d = tmp_path_factory.mktemp("perm")
    c, a = dump_table(table, d)
    for path in (c, a):
        lines = path.read_text().splitlines()
        body = lines[1:]
        rnd.shuffle(body)
        path.write_text("\n".join([lines[0], *body]) + "\n")
    assert load_table(c, a) == table


def test_positions_always_resolve(golden):
    t = golden.table
    assert all(p.firm_id in t.companies for p in t.positions)


def test_country_filter(tmp_path):
    c = write(tmp_path / "c.csv", "firm_id,country\nA,SE\nB,NO\n")
    a = write(tmp_path / "a.csv", "director_id,firm_id\nd,A\nd,B\n")
    t = load_table(c, a).filter_country("SE")
    assert list(t.companies) == ["A"] and len(t.positions) == 1


def test_shuffled_input_bytes_stable(tmp_path):
    rows = [f"F{i},SE,{i * 1.5}" for i in range(50)]
    random.Random(1).shuffle(rows)
    c = write(tmp_path / "c.csv", "firm_id,country,revenue_usd\n" + "\n".join(rows) + "\n")
    a = write(tmp_path / "a.csv", "director_id,firm_id\n")
    t = load_table(c, a)
    p1, _ = dump_table(t, tmp_path / "x")
    p2, _ = dump_table(load_table(p1, a), tmp_path / "y")
    assert p1.read_bytes() == p2.read_bytes()
