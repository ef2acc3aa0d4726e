"""Named default configurations for sweeps and figure reproduction.

The source material reports curve shapes but not the parameter sets behind
them, so these presets are this package's declared choices; tests and the
CLI refer to them by name to keep every qualitative claim auditable.
Natural units (c = 1) throughout; the cavity length sets the length scale.
"""

from __future__ import annotations

import numpy as np

from .cavity import CavityConfig
from .experiment import ExperimentSetup
from .response import DetectorConfig, FieldPreparation
from .worldline import LAB_FRAME, PROPER_FRAME

# Shared cavity/detector/field defaults: gap parked between the mode-4 and
# mode-6 resonances, weak coupling, bright coherent state in the lowest
# mode to amplify the signal above vacuum noise.
BASE_CAVITY = CavityConfig(L=1.0, n_max=200, n_min=20, mode_tail_tol=1e-6)
BASE_DETECTOR = DetectorConfig(Omega=5.0 * np.pi, coupling=0.01)
BASE_FIELD = FieldPreparation(mode_index=1, alpha=10.0)

# Acceleration family used for spectral-response figure sets, spanning
# nonrelativistic to relativistic exit speeds.
FIGURE_ACCELERATIONS = (0.005, 0.01, 0.05, 0.1, 0.4, 0.7, 1.0)


def setup(scenario: str, a0: float, **overrides) -> ExperimentSetup:
    kwargs = dict(
        scenario=scenario,
        a0=a0,
        cavity=BASE_CAVITY,
        detector=BASE_DETECTOR,
        field=BASE_FIELD,
    )
    kwargs.update(overrides)
    return ExperimentSetup(**kwargs)


# Sweep presets: name -> (setup, swept grid, fixed value of the other knob).
# Amplitude presets fix gamma; spectrum presets fix epsilon.

ACCELEROMETER_AMPLITUDE = {
    "setup": lambda: setup(PROPER_FRAME, 0.005),
    "epsilon_grid": tuple(np.linspace(0.0, 0.5, 6)),
    "gamma": 1.0,
}

ACCELEROMETER_SPECTRUM = {
    "setup": lambda: setup(PROPER_FRAME, 0.05),
    "gamma_grid": tuple(np.geomspace(0.5, 50.0, 9)),
    "epsilon": 0.05,
}

ALIGNMENT_AMPLITUDE = {
    "setup": lambda: setup(LAB_FRAME, 0.05),
    "epsilon_grid": tuple(np.linspace(0.02, 0.1, 5)),
    "gamma": 5.0,
}

ALIGNMENT_SPECTRUM = {
    "setup": lambda: setup(LAB_FRAME, 0.05),
    "gamma_grid": tuple(np.geomspace(0.5, 10.0, 8)),
    "epsilon": 0.05,
}

SWEEP_PRESETS = {
    "accelerometer-amplitude": ACCELEROMETER_AMPLITUDE,
    "accelerometer-spectrum": ACCELEROMETER_SPECTRUM,
    "alignment-amplitude": ALIGNMENT_AMPLITUDE,
    "alignment-spectrum": ALIGNMENT_SPECTRUM,
}
