import numpy as np
import pytest

pytest.importorskip('nomad')

import structlog  # noqa: E402
from nomad.datamodel.datamodel import EntryArchive  # noqa: E402

from nomad_flag_dt_plugin.parsers.parser import (  # noqa: E402
    FlagDTParser,
    _canon_key,
)

ATOL = 1e-10


def parse(fpath):
    archive = EntryArchive()
    FlagDTParser().parse(fpath, archive, structlog.get_logger())
    return archive


def test_canon_key():
    assert _canon_key(' A_1 ') == 'a1'
    assert _canon_key('ε 3') == 'eps3'
    assert _canon_key('Epsilon2') == 'eps2'


def test_exact_r3_run():
    data = parse('tests/data/r3_exact.flagdt').data
    p = data.parameters
    assert list(p.literals) == ['1', '1', '3/5', '1', '1', '1']
    assert p.backend == 'exact'
    assert np.isclose(p.A3, 0.6, atol=ATOL)
    assert data.mode == 'dt'
    assert data.notes.startswith('r3 at A')

    r = data.results[0]
    assert r.irreducible_roots == 1
    assert not r.classification.integrable
    assert len(r.solutions) == 2
    assert sorted(float(s.a) for s in r.solutions) == pytest.approx([-0.8, 0.8])
    for s in r.solutions:
        assert s.root == 'r3'
        assert np.isclose(s.phi2, 0.6, atol=ATOL)
        assert np.isclose(s.slope, -64 / 27, atol=ATOL)
        assert s.verified
        assert s.residual == 0.0

    (classes,) = r.characteristic_classes
    assert list(classes.weight) == [1, 2]
    assert list(classes.w2) == [1, 0]
    assert np.allclose(classes.p1, [-3, 0])


def test_scan_run():
    r = parse('tests/data/example4_scan.flagdt').data.results[0]
    assert r.irreducible_roots == 0
    assert r.classification.nearly_kahler
    assert len(r.scan_curves) == 3
    r3 = next(c for c in r.scan_curves if c.root == 'r3')
    s = np.asarray(r3.s)
    a_plus = np.asarray(r3.a_plus)
    assert s.shape == (11,)
    below = s <= 1.0
    assert np.allclose(a_plus[below], np.sqrt(1 - s[below] ** 2), atol=ATOL)
    assert np.all(np.isnan(a_plus[~below]))
    assert np.allclose(r3.walls, [1.0], atol=1e-8)


def test_phym_run():
    r = parse('tests/data/kahler_einstein.flagdt').data.results[0]
    assert r.classification.integrable
    assert r.irreducible_roots == 2
    assert {s.root for s in r.solutions} == {'r1', 'r2'}
    assert all(s.mode == 'phym' for s in r.solutions)


def test_missing_parameters_leave_no_data():
    assert parse('tests/data/missing_a3.flagdt').data is None
