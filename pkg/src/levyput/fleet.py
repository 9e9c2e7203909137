"""Named reference models used by the tests, demos and the CLI (``fleet:<name>``)."""

from __future__ import annotations

from .american import PutProblem
from .models import JumpComponent, LevyModel, PhaseType

_CYCLIC = PhaseType(
    (1.0, 0.0, 0.0),
    ((-3.0, 3.0, 0.0), (0.0, -3.0, 3.0), (0.5, 0.0, -3.0)),
)


def _build():
    return {
        "brownian": LevyModel(2.0, 0.0),
        "brownian_drift": LevyModel(1.0, 0.25),
        "sn_bv_up": LevyModel(0.0, 1.0, down=JumpComponent(1.0, PhaseType.exponential(1.0))),
        "sn_bv_down": LevyModel(0.0, -0.5, down=JumpComponent(1.0, PhaseType.exponential(1.0))),
        "two_sided": LevyModel(
            1.0,
            0.2,
            up=JumpComponent(0.5, PhaseType.hyperexponential((0.4, 0.6), (2.0, 5.0))),
            down=JumpComponent(1.0, _CYCLIC),
        ),
        "subordinator": LevyModel(0.0, 0.5, up=JumpComponent(1.0, PhaseType.exponential(2.0))),
    }


MODELS: dict[str, LevyModel] = _build()

# (strike, rate) per model
PUT_DEFAULTS = {
    "brownian": (2.0, 1.0),
    "brownian_drift": (1.0, 0.5),
    "sn_bv_up": (2.0, 2.0),
    "sn_bv_down": (1.0, 0.5),
    "two_sided": (1.0, 0.3),
    "subordinator": (1.0, 0.5),
}

SPECTRALLY_NEGATIVE = ("brownian", "brownian_drift", "sn_bv_up")


def model(name: str) -> LevyModel:
    try:
        return MODELS[name]
    except KeyError:
        raise KeyError(f"unknown fleet model {name!r}; choose from {sorted(MODELS)}") from None


def put_problem(name: str) -> PutProblem:
    K, r = PUT_DEFAULTS[name]
    return PutProblem(K, r, model(name))
