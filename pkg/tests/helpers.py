"""Shared construction helpers for the test suite."""
from dataclasses import replace

import numpy as np

from see_mimo import SystemConfig, generate_layout


def make_instance(seed=0, **overrides):
    """One seeded (config, layout) pair with the layout's EVA gain applied."""
    cfg = replace(SystemConfig(), **overrides)
    rng = np.random.default_rng([seed, 1000])
    layout = generate_layout(cfg, rng)
    return replace(cfg, zeta_e=layout.zeta_e), layout
