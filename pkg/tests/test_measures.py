import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singular_elliptic import (
    Domain,
    GridMeasure,
    MeasureSpec,
    Mollifier,
    ParameterError,
    ResolutionError,
    atoms_are_concentrated,
    decompose,
    discretize,
    mollify,
    tv_norm,
)
from singular_elliptic.measures import density


def test_constant_density_masses():
    dom = Domain(0.0, 1.0, 99)
    mu = discretize(MeasureSpec.from_density("constant", 1.0), dom)
    np.testing.assert_allclose(mu.masses, 0.01)
    assert tv_norm(mu) == pytest.approx(0.99)


def test_density_two_tv():
    dom = Domain(0.0, 1.0, 63)
    mu = discretize(MeasureSpec.from_density("constant", 2.0), dom)
    assert mu.tv == pytest.approx(2 * (1 - dom.h), abs=1e-8)


def test_single_atom_on_node():
    dom = Domain(0.0, 1.0, 31)
    mu = discretize(MeasureSpec.dirac(0.5), dom)
    assert mu.masses[dom.nearest_node(0.5)] == 1.0
    assert np.count_nonzero(mu.masses) == 1
    assert mu.atom_tags == (dom.nearest_node(0.5),)


def test_atoms_tv_additive():
    spec = MeasureSpec(atoms=((0.3, 0.3), (0.7, 0.7)))
    assert tv_norm(discretize(spec, Domain(0.0, 1.0, 50))) == pytest.approx(1.0)
    assert tv_norm(np.zeros(4)) == 0.0


def test_masses_read_only():
    mu = discretize(MeasureSpec.dirac(0.5), Domain(0.0, 1.0, 7))
    with pytest.raises(ValueError):
        mu.masses[0] = 2.0


def test_spec_arithmetic():
    a = MeasureSpec.from_density("constant", 1.0)
    b = MeasureSpec.dirac(0.4, 2.0)
    s = (a + b).scaled(3.0)
    assert s.atom_mass == 6.0
    assert s.density_values(np.array([0.5]))[0] == 3.0
    assert s.density_part.atoms == ()
    assert s.atom_part.densities == ()
    assert MeasureSpec().is_trivial()
    assert a.scaled(0.0).is_trivial()
    with pytest.raises(ParameterError):
        a.scaled(-1.0)


def test_grid_measure_arithmetic():
    m = GridMeasure(np.array([1.0, 2.0]))
    assert ((m + m) - m).masses.tolist() == [1.0, 2.0]
    assert (2 * m).tv == 6.0
    assert not (m - 2 * m).is_nonnegative


@pytest.mark.parametrize("spec", [
    lambda: MeasureSpec.from_density("nope"),
    lambda: MeasureSpec.dirac(0.5, -1.0),
    lambda: MeasureSpec((("constant", (1.0,), -2.0),)),
    lambda: MeasureSpec.from_density("constant", 1.0, 2.0),
])
def test_invalid_specs(spec):
    with pytest.raises(ParameterError):
        spec()


def test_atom_outside_domain():
    with pytest.raises(ParameterError):
        discretize(MeasureSpec.dirac(1.5), Domain(0.0, 1.0, 9))


def test_negative_density_rejected():
    with pytest.raises(ParameterError):
        discretize(MeasureSpec.from_density("constant", -1.0), Domain(0.0, 1.0, 9))


def test_registry_densities_are_bounded_and_nonnegative():
    x = np.linspace(0, 1, 1001)
    for d in ("constant", "bump", "step", "hat"):
        v = density(d, (), x)
        assert np.all(v >= 0) and np.all(np.isfinite(v))
    with pytest.raises(ParameterError):
        density("nope", (), x)


def test_mollifier_normalised():
    assert Mollifier(0.3).integral() == pytest.approx(1.0, abs=1e-12)
    j = Mollifier(0.1)
    assert j(np.array([0.1, -0.2, 0.15])).tolist() == [0.0, 0.0, 0.0]
    with pytest.raises(ParameterError):
        Mollifier(0.0)


def test_mollified_atom():
    dom = Domain(0.0, 1.0, 255)
    mu = mollify(MeasureSpec.dirac(0.5), 0.1, dom)
    assert mu.tv == pytest.approx(1.0, abs=1e-6)
    support = dom.nodes[mu.masses > 0]
    assert support.min() >= 0.4 and support.max() <= 0.6
    assert mu.lost_mass == 0.0


def test_mollified_density_loses_mass_at_boundary_only():
    dom = Domain(0.0, 1.0, 255)
    spec = MeasureSpec.from_density("constant", 1.0)
    mu = mollify(spec, 0.05, dom)
    plain = discretize(spec, dom)
    assert mu.tv <= plain.tv
    assert mu.lost_mass > 0
    interior = (dom.nodes > 0.06) & (dom.nodes < 0.94)
    np.testing.assert_allclose(mu.masses[interior], plain.masses[interior], rtol=1e-10)


def test_mollify_interior_density_preserves_tv():
    dom = Domain(0.0, 1.0, 511)
    spec = MeasureSpec.from_density("bump", 0.5, 0.2, 1.0)
    mu = mollify(spec, 0.05, dom)
    assert mu.tv == pytest.approx(discretize(spec, dom).tv, abs=1e-6)


def test_mollify_under_resolved():
    with pytest.raises(ResolutionError):
        mollify(MeasureSpec.dirac(0.5), 0.01, Domain(0.0, 1.0, 63))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 0.8), st.floats(0.05, 0.15), st.floats(0.1, 5.0))
def test_mollified_atoms_keep_mass(x, eps, m):
    dom = Domain(0.0, 1.0, 255)
    mu = mollify(MeasureSpec.dirac(x, m), eps, dom)
    assert mu.tv + mu.lost_mass == pytest.approx(m, rel=1e-12)
    assert mu.is_nonnegative


def test_decompose_by_polarity():
    spec = MeasureSpec.from_density("constant", 1.0) + MeasureSpec.dirac(0.5)
    d, c = decompose(spec, 0.5)
    assert d.atoms == () and c.atom_mass == 1.0
    d, c = decompose(spec, 2.0)
    assert c.is_trivial() and d.atom_mass == 1.0
    d, c = decompose(MeasureSpec.from_density("bump"), 1.0)
    assert c.is_trivial()
    assert atoms_are_concentrated(1.0) and not atoms_are_concentrated(1.01)
