"""Global numeric defaults shared across modules."""

# Absolute tolerance for zero tests (norms, volumes, residuals).  Functions
# accept an explicit ``tol`` argument; ``None`` falls back to this value.
ZERO_TOL = 1e-9

# Dense multivector storage stays small only for modest ambient dimension.
MAX_AMBIENT_DIM = 12

# Desk-scale guard: complexes beyond this size are refused at construction.
MAX_SIMPLICES = 50_000


def zero_tol(tol=None):
    return ZERO_TOL if tol is None else float(tol)
