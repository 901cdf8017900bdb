"""Friedrichs-truncated pseudospectral solver for Ericksen-Leslie nematic flow.

Modules: :mod:`coefficients` (Leslie coefficients and dissipativity),
:mod:`doi_onsager` (Maier-Saupe closure), :mod:`fields` (grids, transforms,
projections, snapshots), :mod:`constitutive` (stresses and director rate),
:mod:`solver`, :mod:`diagnostics`, :mod:`config` and :mod:`cli`.
"""

__version__ = "0.1.0"
