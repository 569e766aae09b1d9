"""Numerical tolerances, overridable through environment variables."""
import os

STRUCTURAL_ZERO = 1e-12
CANCELLATION_BAND = 1e-8
DEFAULT_STATE_CAP = 1_000_000
# irreducibility of Q(eps) is probed at half the upper end of the eps domain
EPS_DOMAIN_UPPER = 1.0


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ValueError(f"{name}={raw!r} is not a number") from exc


def tol_eq() -> float:
    """Tolerance for equality checks (closed forms, identities)."""
    return _env_float("PERTURBMC_TOL_EQ", 1e-10)


def tol_rec() -> float:
    """Tolerance for residuals of the expansion recursion."""
    return _env_float("PERTURBMC_TOL_REC", 1e-8)
