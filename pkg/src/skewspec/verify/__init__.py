"""Independent oracles: Monte Carlo estimators and brute-force identity checks."""
from .density import DensityHistogram, mc_density_histogram, mirror_chi2
from .factorization import check_factorization, check_zprod, pfaffian_route, sector_sum_n1, sector_sum_n2_ginibre
from .identities import check_debruijn, check_pfaffian_suite, check_vandermonde_suite, debruijn_sides
from .massive_checks import (
    check_decoupling,
    check_hratio,
    check_massive_gram,
    check_pfid,
    check_removable_singularity,
    mass_convention_experiment,
    massive_sop_table,
)
from .mc import (
    McReport,
    default_kappa,
    draw_samples,
    mc_cauchy,
    mc_char_polys,
    mc_even_sop,
    mc_massive,
    mc_odd_sop,
    mc_two_dets,
)
from .orthogonality import check_laurent, check_skew_orthogonality, laurent_coefficient, sop_gram
from .suites import SUITES, SuiteOptions, run_suite, run_suites

__all__ = [
    "DensityHistogram",
    "mc_density_histogram",
    "mirror_chi2",
    "check_factorization",
    "check_zprod",
    "pfaffian_route",
    "sector_sum_n1",
    "sector_sum_n2_ginibre",
    "check_debruijn",
    "check_pfaffian_suite",
    "check_vandermonde_suite",
    "debruijn_sides",
    "check_decoupling",
    "check_hratio",
    "check_massive_gram",
    "check_pfid",
    "check_removable_singularity",
    "mass_convention_experiment",
    "massive_sop_table",
    "McReport",
    "default_kappa",
    "draw_samples",
    "mc_cauchy",
    "mc_char_polys",
    "mc_even_sop",
    "mc_massive",
    "mc_odd_sop",
    "mc_two_dets",
    "check_laurent",
    "check_skew_orthogonality",
    "laurent_coefficient",
    "sop_gram",
    "SUITES",
    "SuiteOptions",
    "run_suite",
    "run_suites",
]
