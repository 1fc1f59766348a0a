"""Numerical tolerances shared across the package.

The defaults below are the documented contract values. The command line
front end can override any of them from a JSON file; library functions
accept explicit keyword overrides instead.
"""

from dataclasses import asdict, dataclass, fields, replace

# eigenvalues of a PSD input above -PSD_CLAMP_RTOL * ||M|| are clamped to zero
PSD_CLAMP_RTOL = 1e-12


@dataclass(frozen=True)
class Tolerances:
    lyapunov_rtol: float = 1e-10
    psd_clamp_rtol: float = PSD_CLAMP_RTOL
    realizability_tol: float = 1e-10
    ali_tol: float = 1e-9
    decay_margin_tol: float = 1e-9
    quad_tol: float = 1e-9
    verify_tau_points: int = 50
    verify_tau_span: float = 10.0  # tau grid covers [0, span / mu]
    mu_grid: int = 64
    theta_grid: int = 256
    curve_points: int = 64

    def to_dict(self):
        return asdict(self)

    def updated(self, overrides):
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown tolerance keys: {sorted(unknown)}")
        return replace(self, **overrides)


DEFAULTS = Tolerances()
