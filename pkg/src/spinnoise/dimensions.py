"""Dimensional audit of the sensitivity chains using ``sympy.physics.units``.

Each step of the EDM and gradient coupling chains, and the spin-physics
formulas feeding them, is rebuilt symbolically from SI quantities and checked
against the expected dimension. :func:`audit` returns the individual checks;
:func:`closure` is True when every check passes.
"""

from dataclasses import dataclass

import sympy as sp
from sympy.physics import units as u
from sympy.physics.units.systems.si import SI, dimsys_SI

__all__ = ["AuditItem", "audit", "closure", "dimension_of"]

GEV = u.giga * u.electronvolt


@dataclass(frozen=True)
class AuditItem:
    chain: str
    name: str
    dimension: str
    expected: str
    ok: bool


def dimension_of(expr):
    """Dimension of a quantity expression, as a ``sympy`` Dimension."""
    return u.Dimension(SI.get_dimensional_expr(expr))


def _check(chain, name, expr, expected):
    dim = dimension_of(expr)
    ok = dimsys_SI.equivalent_dims(dim, expected)
    return AuditItem(chain, name, str(dimsys_SI.get_dimensional_dependencies(dim)), str(expected), bool(ok))


def audit():
    """Run all dimensional checks."""
    hbar, c, e, mu0, kB = u.hbar, u.speed_of_light, u.elementary_charge, u.magnetic_constant, u.boltzmann
    second, meter, kelvin, tesla, ohm, volt = u.second, u.meter, u.kelvin, u.tesla, u.ohm, u.volt
    rad_per_s_t = 1 / (second * tesla)  # gyromagnetic ratio
    n = 1 / meter**3
    energy, length, time = u.energy, u.length, u.time
    one = u.Dimension(1)
    items = []

    # spin physics
    m0 = n * hbar**2 * rad_per_s_t**2 * tesla / (kB * kelvin)
    items.append(_check("spins", "Curie magnetization M0", m0, u.current / length))
    items.append(_check("spins", "radiation damping rate", rad_per_s_t * mu0 * m0, 1 / time))
    items.append(_check("spins", "susceptibility peak", rad_per_s_t * mu0 * m0 * second, one))
    s_spin = ohm * hbar / second
    items.append(_check("spins", "spin-noise PSD (per rad/s)", s_spin, u.voltage**2 * time))
    items.append(_check("circuit", "Nyquist PSD 2 R kB theta / pi", ohm * kB * kelvin, u.voltage**2 * time))

    # Rabi-frequency limit
    v1 = sp.sqrt(s_spin / second)
    transduction = (1 / second) * meter**2 * mu0 * m0 * second
    omega1 = v1 / transduction
    items.append(_check("signal", "V1 (averaged noise voltage)", v1, u.voltage))
    items.append(_check("signal", "Omega1 min", omega1, 1 / time))

    # axion field in natural units
    rho_si = u.kilogram / meter**3
    rho_nat = rho_si * c**2 * (hbar * c) ** 3
    items.append(_check("axion", "rho_DM in natural units", rho_nat, energy**4))
    a0 = sp.sqrt(rho_nat) / GEV
    items.append(_check("axion", "field amplitude a0", a0, energy))
    grad = GEV * a0
    items.append(_check("axion", "gradient amplitude m v a0", grad, energy**2))

    # coupling chains
    items.append(_check("edm", "E* interaction energy per e", e * volt / meter * meter, energy))
    g_d = hbar * omega1 / (e * (volt / meter) * a0 * (hbar * c))
    items.append(_check("edm", "g_d", g_d, energy**-2))
    g_ann = hbar * omega1 / grad
    items.append(_check("gradient", "g_aNN", g_ann, energy**-1))
    return items


def closure():
    return all(item.ok for item in audit())
