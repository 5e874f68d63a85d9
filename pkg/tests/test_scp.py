import numpy as np
import pytest

from conftest import identity_banks
from rssd.errors import DimensionMismatch, OutOfBox, UnstableSection
from rssd.lti import CompensatorBank, FirstOrderSection, PlantSet, StateSpacePlant
from rssd.scp import (
    BankTemplate,
    ScpConstraints,
    check_constraints,
    decode_bank,
    j1_fitness,
    transmission_zeros,
)


def static_trio():
    return PlantSet(tuple(
        StateSpacePlant.from_gain(np.array([[g]]), label=f"g{g}")
        for g in (0.5, 1.0, 2.0)))


WIDE = ((-100.0, 100.0),) * 4


class TestDecodeBank:
    def test_published_coefficients(self):
        bank = decode_bank([1.0, 7.36, 0.007, 10.1], BankTemplate("in", 1),
                           WIDE)
        assert bank.sections[0].dc_gain == pytest.approx(0.7287, abs=1e-4)

    def test_out_of_box_rejected(self):
        with pytest.raises(OutOfBox):
            decode_bank([1.0, 7.36, 0.007, 10.1], BankTemplate("in", 1),
                        ((0.0, 0.5),) + WIDE[1:])

    def test_unstable_section_rejected(self):
        with pytest.raises(UnstableSection):
            decode_bank([1.0, 1.0, 1.0, -1.0], BankTemplate("in", 1), WIDE)

    def test_gene_count_checked(self):
        with pytest.raises(DimensionMismatch):
            decode_bank([1.0, 2.0], BankTemplate("in", 1), WIDE[:2])


class TestTransmissionZeros:
    def test_siso_zero(self):
        # (s+2)/((s+1)(s+3))
        A = np.diag([-1.0, -3.0])
        B = np.ones((2, 1))
        C = np.array([[0.5, 0.5]])
        tz = transmission_zeros(StateSpacePlant(A, B, C, np.zeros((1, 1))))
        assert tz.size == 1
        assert tz[0] == pytest.approx(-2.0)

    def test_no_finite_zero(self):
        tz = transmission_zeros(StateSpacePlant.siso(-1.0, 1.0))
        assert tz.size == 0

    def test_non_square_empty(self):
        p = StateSpacePlant(np.diag([-1.0]), np.ones((1, 2)),
                            np.ones((1, 1)), np.zeros((1, 2)))
        assert transmission_zeros(p).size == 0


class TestCheckConstraints:
    def make(self, floor_db=-20.0, band=(0.01, 0.1)):
        return ScpConstraints(WIDE, WIDE, floor_db, band)

    def test_identity_banks_pass_loose_constraints(self, grid):
        w_in, w_out = identity_banks(1, 1)
        loud = PlantSet(tuple(
            StateSpacePlant.from_gain(np.array([[g]])) for g in (1.5, 2.0, 3.0)))
        report = check_constraints(w_in, w_out, loud, self.make(), grid)
        assert report.passed

    def test_dc_floor_violation(self, grid):
        w_in, w_out = identity_banks(1, 1)
        report = check_constraints(w_in, w_out, static_trio(),
                                   self.make(floor_db=20.0), grid)
        assert not report.passed
        assert any("DC" in r or "dB" in r for r in report.reasons)

    def test_band_violation(self, grid):
        # plant 1/(s+1) falls below 0 dB beyond 1 rad/s
        pset = PlantSet((StateSpacePlant.siso(-1.0, 1.0),))
        w_in, w_out = identity_banks(1, 1)
        report = check_constraints(w_in, w_out, pset,
                                   self.make(floor_db=-20.0, band=(0.1, 10.0)),
                                   grid)
        assert not report.passed

    def test_pole_zero_cancellation_flagged(self, grid):
        # compensator zero at -1 cancels the plant pole at -1
        pset = PlantSet((StateSpacePlant.siso(-1.0, 10.0),))
        w_in = CompensatorBank((FirstOrderSection(1.0, 1.0, 0.1, 1.0),), "in")
        _, w_out = identity_banks(1, 1)
        report = check_constraints(w_in, w_out, pset, self.make(), grid)
        assert not report.passed
        assert any("cancels" in r for r in report.reasons)


class TestJ1Fitness:
    def test_identity_banks_match_raw_central_plant(self, grid):
        w_in, w_out = identity_banks(1, 1)
        j1, idx, p_cp = j1_fitness(w_in, w_out, static_trio(), grid)
        assert idx == 1
        assert j1 == pytest.approx(1.0 / np.sqrt(10.0), abs=1e-6)

    def test_good_compensator_shrinks_j1(self, grid):
        # normalizing each plant towards gain 1 shrinks the spread
        w_in = CompensatorBank((FirstOrderSection(0.0, 1.0, 0.0, 1.0),), "in")
        w_out = w_in
        base, _, _ = j1_fitness(w_in, w_out, static_trio(), grid)
        assert base > 0
