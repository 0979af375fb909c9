"""Exact computations around Kudla-Millson Schwartz functions.

Modules: ``gausspoly`` (polynomial-times-Gaussian calculus), ``howe_km``
(wedge algebra and Howe operators), ``ikeda`` (isotropic splitting and the
Ikeda map), ``weil`` (archimedean Weil action and series assembly),
``numlat`` (number fields, hermitian lattices, finite group models) and
``cli``.
"""

__version__ = "0.1.0"
