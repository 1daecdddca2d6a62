from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dsqc.efficiency import (
    PRIOR_PROTOCOLS,
    DivisionByZero,
    ProtocolCosts,
    cabello_efficiency,
    efficiency_with_decoys,
    format_table,
    percent,
    row_from_costs,
    comparison_table,
)

# Published comparison values (percent, two decimals).
PUBLISHED = {
    "YZ04": ("25.00", "16.67", "Bell pairs"),
    "CS06": ("16.67", "09.52", "W-state"),
    "DXG08": ("20.00", "12.50", "W-state"),
    "XGC09": ("30.00", "18.75", "Six-particle"),
    "QCY13": ("25.00", "16.67", "Four-qubit cluster"),
    "PP-1": ("40.00", "25.00", "GHZ-like state"),
    "PP-2": ("33.33", "21.43", "Five-qubit Brown"),
}


class TestFormulas:
    def test_worked_examples(self):
        assert cabello_efficiency(ProtocolCosts(4, 6, 4, 6)) == pytest.approx(0.4)
        assert efficiency_with_decoys(ProtocolCosts(4, 6, 4, 6)) == pytest.approx(0.25)
        assert cabello_efficiency(ProtocolCosts(6, 10, 8, 10)) == pytest.approx(1 / 3)
        assert efficiency_with_decoys(ProtocolCosts(6, 10, 8, 10)) == pytest.approx(6 / 28)

    def test_zero_denominator(self):
        with pytest.raises(DivisionByZero):
            cabello_efficiency(ProtocolCosts(0, 0, 0))

    def test_negative_costs_rejected(self):
        with pytest.raises(ValueError):
            ProtocolCosts(1, -1, 0)

    @given(st.integers(0, 50), st.integers(1, 50), st.integers(0, 50), st.integers(0, 50))
    def test_decoys_never_raise_efficiency(self, b_s, q_t, b_t, d):
        c = ProtocolCosts(b_s, q_t, b_t, d)
        assert efficiency_with_decoys(c) <= cabello_efficiency(c)

    def test_percent_rounds_half_up(self):
        assert percent(Fraction(1, 6)) == Decimal("16.67")
        assert percent(Fraction(2, 21)) == Decimal("9.52")
        assert percent(Fraction(1, 8000)) == Decimal("0.01")


@pytest.fixture(scope="module")
def rows():
    return comparison_table()


class TestTable:
    def test_seven_rows_match_published(self, rows):
        got = {r.protocol: (format(r.eta_without_decoy, "05.2f"), format(r.eta_with_decoy, "05.2f"), r.channel)
               for r in rows}
        assert got == PUBLISHED

    def test_proposed_rows_come_from_sessions(self, rows):
        by = {r.protocol: r for r in rows}
        assert by["PP-1"].costs == ProtocolCosts(4, 6, 4, 6)
        assert by["PP-2"].costs == ProtocolCosts(6, 10, 8, 10)
        assert not by["PP-1"].reconstructed

    def test_prior_rows_are_marked_reconstructed(self, rows):
        assert all(r.reconstructed for r in rows[: len(PRIOR_PROTOCOLS)])

    def test_proposed_rows_do_not_depend_on_seed(self):
        assert [r.as_dict() for r in comparison_table(seed=1)] == [r.as_dict() for r in comparison_table(seed=2)]

    def test_format(self, rows):
        text = format_table(rows)
        assert "CS06              16.67       09.52  W-state" in text
        assert len(text.splitlines()) == 9

    def test_row_from_costs(self):
        r = row_from_costs("x", "c", ProtocolCosts(1, 3, 2, 3))
        assert (r.eta_without_decoy, r.eta_with_decoy) == (Decimal("20.00"), Decimal("12.50"))
