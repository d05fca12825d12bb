"""Random link-parameter draws shared by the test modules."""

import numpy as np
from hypothesis import strategies as st

from qilink.chain import LinkParams

_KAPPAS = (
    "kappa_A", "kappa_1", "kappa_B", "kappa_B_prime", "kappa_2", "kappa_A_prime",
    "kappa_I", "kappa_d", "kappa_E", "eta_E", "kappa_d_prime", "eta_d_A", "eta_d_E",
)


def random_link(rng: np.random.Generator, *, n_b_decades: float = 1.0) -> LinkParams:
    """Draw valid parameters; N_B lands within ``n_b_decades`` of the classicality threshold."""
    kw = {k: float(rng.uniform(0.01, 0.99)) for k in _KAPPAS}
    g_b = float(10.0 ** rng.uniform(0.0, 5.0))
    thresh = kw["kappa_1"] * kw["kappa_A"] * kw["kappa_B"] * g_b
    n_b = max(g_b - 1.0, thresh * 10.0 ** rng.uniform(-n_b_decades, n_b_decades))
    return LinkParams(
        **kw,
        G_B=g_b,
        N_B=n_b,
        G_A=1.0 + float(10.0 ** rng.uniform(-7.0, 0.0)),
        M=int(rng.integers(1, 10**7)),
        W=None,
        T=None,
    )


@st.composite
def link_params(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_link(np.random.default_rng(seed))


def rel_err(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


__all__ = ["link_params", "random_link", "rel_err"]
