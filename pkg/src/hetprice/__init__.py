"""Revealed-preference tests and constructive certificates for price and preference heterogeneity.

All arithmetic is exact over rationals.  The main entry points:

* :mod:`hetprice.revpref`: GARP / GAPP verdicts with witness cycles, Afriat utilities.
* :mod:`hetprice.constructions`: heterogeneous prices that aggregate to the
  observed index and rationalize a panel, stable scalings, perceived prices.
* :mod:`hetprice.rum`: sorting searches for cross sections, random-price
  certificates, budget patches, the single-good refutation.
"""

from __future__ import annotations

from ._closure import BACKEND
from .aggregators import AggregatorSpec, arithmetic, weighted_harmonic
from .behavioral import BehavioralExpenditure, eval_phi, make_price_systems, misperception, reference
from .constructions import (
    ConstructionParams,
    StableScale,
    check_stable_invariance,
    prop1_rationalize,
    prop2_disaggregate,
    prop4_stable_prices,
    prop6_au_lambdas,
    scale_transform_verify,
)
from .dataset import (
    CrossSection,
    HeterogeneousPrices,
    PanelDataset,
    SortingFunction,
    implied_bundle,
    load_cross_section,
    load_panel,
)
from .revpref import (
    AfriatSolution,
    GarpVerdict,
    Observation,
    PriceSystem,
    afriat_construct,
    check_gapp,
    check_garp,
    direct_relations,
    evaluate_afriat,
)
from .rum import (
    PatchDecomposition,
    RpmCertificate,
    RumVerdict,
    au_rum_check,
    check_one_good_refutation,
    compute_patches,
    rpm_check,
    rpm_from_rum_discrete,
    rum_check,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "afriat_construct",
    "AfriatSolution",
    "AggregatorSpec",
    "arithmetic",
    "au_rum_check",
    "BACKEND",
    "BehavioralExpenditure",
    "check_gapp",
    "check_garp",
    "check_one_good_refutation",
    "check_stable_invariance",
    "compute_patches",
    "ConstructionParams",
    "CrossSection",
    "direct_relations",
    "eval_phi",
    "evaluate_afriat",
    "GarpVerdict",
    "HeterogeneousPrices",
    "implied_bundle",
    "load_cross_section",
    "load_panel",
    "make_price_systems",
    "misperception",
    "Observation",
    "PanelDataset",
    "PatchDecomposition",
    "PriceSystem",
    "prop1_rationalize",
    "prop2_disaggregate",
    "prop4_stable_prices",
    "prop6_au_lambdas",
    "reference",
    "rpm_check",
    "rpm_from_rum_discrete",
    "RpmCertificate",
    "rum_check",
    "RumVerdict",
    "scale_transform_verify",
    "SortingFunction",
    "StableScale",
    "weighted_harmonic",
]
