"""Oracle recursions and their agreement with the localization engine."""

import itertools
from fractions import Fraction

import pytest

from gkmgw import presets
from gkmgw.graphsum import TooFewPoints, insertions, nonequivariant_invariant, psi_integral
from gkmgw.oracles import lefschetz_line_check, psi_string_oracle, wdvv_p1p1, wdvv_p2
from gkmgw.targets import CurveClass


def test_wdvv_p2_base_case():
    assert wdvv_p2(1)[1] == 1


def test_wdvv_p2_hand_values():
    table = wdvv_p2(4)
    # N2: 1*1*(C(2,1) - C(2,2)) = 2 - 1
    assert table[2] == 1
    # N3: (1,2) gives 4*5 - 2*10 = 0; (2,1) gives 4*5 - 8*1 = 12
    assert table[3] == 12
    assert table[4] == 620


def test_wdvv_p2_positive_integers():
    table = wdvv_p2(4)
    for d, n in table.entries.items():
        assert n == int(n) and n > 0


def test_wdvv_p1p1_base_cases():
    table = wdvv_p1p1((2, 2))
    assert table[(1, 0)] == 1
    assert table[(0, 1)] == 1


def test_wdvv_p1p1_values():
    table = wdvv_p1p1((3, 3))
    assert table[(1, 1)] == 1
    assert table[(1, 2)] == 1
    assert table[(2, 1)] == 1
    assert table[(2, 2)] == 12
    assert table[(2, 2)] == table[(2, 2)].numerator  # integer
    assert table[(1, 3)] == 1
    assert table[(3, 2)] == table[(2, 3)]


def test_psi_string_oracle_base():
    assert psi_string_oracle((0, 0, 0)) == 1
    assert psi_string_oracle((1, 0, 0, 0)) == 1
    with pytest.raises(TooFewPoints):
        psi_string_oracle((0,))


def test_psi_oracle_matches_closed_form_exhaustively():
    for n in range(3, 9):
        for exps in itertools.combinations_with_replacement(range(n - 2), n):
            for perm in {exps, tuple(reversed(exps))}:
                assert psi_string_oracle(perm) == psi_integral(perm)


def test_engine_matches_wdvv_p2():
    p2 = presets.p2()
    H = p2.generator("H")
    pt = H * H
    table = wdvv_p2(2)
    for d in (1, 2):
        v = nonequivariant_invariant(p2, CurveClass((d,)), insertions([pt] * (3 * d - 1)))
        assert v == table[d]


def test_engine_matches_wdvv_f0_small():
    f0 = presets.f0_bundle()
    pt = f0.generator("h") * f0.generator("b")
    table = wdvv_p1p1((1, 2))
    for bideg in [(1, 0), (0, 1), (1, 1), (1, 2)]:
        npts = 2 * bideg[0] + 2 * bideg[1] - 1
        v = nonequivariant_invariant(
            f0, CurveClass(bideg), insertions([pt] * npts), mode="evaluated"
        )
        assert v == table[bideg], bideg


def test_lefschetz_line_check():
    report = lefschetz_line_check()
    assert report.p1_value == 1
    assert report.p2_twisted_value == 1
    assert report.local_p2_value == 3
    assert report.ok
