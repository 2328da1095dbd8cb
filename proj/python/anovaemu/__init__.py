"""ANOVA-based emulators of models with and without derivatives.

Derivative-based (Db-ANOVA) emulators use exact cross-partial derivatives;
derivative-free emulators reconstruct the same expansion from local stochastic
evaluations via elementary symmetric polynomials. Sensitivity indices and
their upper bounds choose unbiased truncation structures.
"""

try:
    from ._anovaemu import *  # noqa: F401,F403
    from ._anovaemu import __doc__ as _core_doc  # noqa: F401
except ImportError:  # pragma: no cover - in-tree builds put the module on sys.path
    from _anovaemu import *  # type: ignore # noqa: F401,F403

__all__ = [
    "Marginal",
    "uniform",
    "mixture",
    "sobol_points",
    "sample_design",
    "esp",
    "recommend_truncation",
    "screen",
    "problem_marginals",
    "problem_value",
    "DfEmulator",
    "DbEmulator",
    "fit_df_emulator",
    "fit_db_emulator",
    "load_df_emulator",
    "pde_qoi",
    "pde_qoi_gradient",
]
