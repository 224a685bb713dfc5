"""Smoke test for the higgs_dt_py extension (build it with maturin first)."""

import json
from fractions import Fraction

import higgs_dt_py as h


def main():
    g0 = h.Curve(0)
    kac = dict(h.kac_positive(g0, 2, 3))
    assert kac[(0, 1)] == "v^2 + 1", kac
    assert kac[(1, 2)] == "1"
    assert (2, 1) not in kac

    g2 = h.Curve(2, q=2, points=[4, 6])
    rows = h.omega(g2, 2, 2)
    assert [e.residue for e in rows] == [e.stabilized for e in rows]
    assert rows[0].residue == "18"
    assert len({e.residue for e in rows if e.r == 2}) == 1

    num, den = h.oracle_vol(2, -2, 2, 0)
    assert Fraction(int(num), int(den)) == Fraction(1, 6)
    assert h.formula_vol(2, -2, 2, 0) == "1/6"

    series = {
        "n": 1, "genus": 0, "l": 0, "rmax": 2, "dmax": 2,
        "entries": [
            {"gamma": [[1, 0]], "value": "v^2 + 1"},
            {"gamma": [[1, 1]], "value": "3"},
            {"gamma": [[2, 1]], "value": "11/(v - 1)"},
        ],
    }
    back = json.loads(h.hn_expand(h.hn_factorize(json.dumps(series))))
    assert sorted(map(json.dumps, back["entries"])) == sorted(map(json.dumps, series["entries"]))

    assert h.conjugate([3, 1]) == [2, 1, 1]
    assert h.pairing([2, 1]) == 5

    try:
        h.omega(h.Curve(1), -1, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("twist below 2g-2 must be rejected")

    print("smoke test ok")


if __name__ == "__main__":
    main()
