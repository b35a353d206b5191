from sympy.physics import units as u
from sympy.physics.units.systems.si import dimsys_SI

from spinnoise.dimensions import audit, closure, dimension_of


def test_closure():
    assert closure()


def test_every_item_passes_and_both_chains_covered():
    items = audit()
    assert all(i.ok for i in items), [i for i in items if not i.ok]
    chains = {i.chain for i in items}
    assert {"edm", "gradient", "axion", "spins", "signal"} <= chains
    names = {i.name for i in items}
    assert "g_d" in names and "g_aNN" in names


def test_negative_case_detected():
    # hbar * Omega is an energy, not an energy squared
    wrong = dimension_of(u.hbar / u.second)
    assert dimsys_SI.equivalent_dims(wrong, u.energy)
    assert not dimsys_SI.equivalent_dims(wrong, u.energy**2)
