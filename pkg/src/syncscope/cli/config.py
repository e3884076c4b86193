"""Schema of the JSON system description.

Angles are radians and amplitudes are linear; complex numbers are written as
[re, im] pairs or as bare reals.
"""
import math
from typing import Annotated, List, Literal, Optional, Tuple

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator

def _coerce_complex(value):
    if isinstance(value, bool):
        raise ValueError("expected a number or an [re, im] pair")
    if isinstance(value, (int, float)):
        return (float(value), 0.0)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return tuple(value)
    raise ValueError("expected a number or an [re, im] pair")

ComplexValue = Annotated[Tuple[float, float], BeforeValidator(_coerce_complex)]

def as_complex(value: ComplexValue) -> complex:
    return complex(value[0], value[1])

class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True, allow_inf_nan=False)

class GridSpec(_Strict):
    omega_lo: float = Field(1e-4, gt=0)
    omega_hi: float = Field(1e6, gt=0)
    points: int = Field(2000, ge=3)

    @model_validator(mode="after")
    def _ordered(self):
        if not self.omega_lo < self.omega_hi:
            raise ValueError(f"omega_lo ({self.omega_lo}) must be below omega_hi ({self.omega_hi})")
        return self

class SystemSpec(_Strict):
    omega0: float = Field(2.0 * math.pi * 50.0, gt=0)
    dt: float = Field(1e-4, gt=0)
    dt_out: float = Field(1e-3, gt=0)
    duration: float = Field(10.0, gt=0)
    zeta_grid: GridSpec = Field(default_factory=GridSpec)
    gain_mode: Literal["dynamic", "quasistatic"] = "dynamic"
    # Unit labels are optional; anything but the native units is rejected
    angle_unit: Literal["rad"] = "rad"
    amplitude_unit: Literal["linear"] = "linear"

class ChannelSpec(_Strict):
    """Either a pole/residue list or a constant gain."""
    poles: List[ComplexValue] = Field(default_factory=list)
    residues: List[ComplexValue] = Field(default_factory=list)
    gain: Optional[ComplexValue] = None

    @model_validator(mode="after")
    def _one_form(self):
        if self.gain is not None:
            if self.poles or self.residues:
                raise ValueError("give either 'gain' or 'poles'/'residues', not both")
            return self
        if not self.poles:
            raise ValueError("a channel needs 'poles' and 'residues' (or a constant 'gain')")
        if len(self.poles) != len(self.residues):
            raise ValueError(f"{len(self.poles)} poles but {len(self.residues)} residues")
        return self

class EdgeSpec(ChannelSpec):
    m: str
    n: str

class NodeSpec(_Strict):
    id: str = Field(min_length=1)
    kind: Literal["voltage", "current"]
    inertia: float = Field(gt=0)
    damping: float = Field(0.0, ge=0)
    epsilon: Optional[float] = None
    amplitude: float = Field(1.0, gt=0)
    angle: float = 0.0
    self_channel: Optional[ChannelSpec] = None

    @model_validator(mode="after")
    def _default_epsilon(self):
        if self.epsilon is None:
            self.epsilon = 0.0 if self.kind == "voltage" else 0.5 * math.pi
        return self

class BranchSpec(_Strict):
    frm: str = Field(alias="from")
    to: str
    resistance: float = Field(0.0, ge=0)
    inductance: float = Field(gt=0)

class NetworkSpec(_Strict):
    branches: List[BranchSpec] = Field(min_length=1)
    passive_nodes: List[str] = Field(default_factory=list)

class PerturbationSpec(_Strict):
    node: str
    delta_theta: float = 0.0
    delta_omega: float = 0.0

class SystemConfig(_Strict):
    system: SystemSpec = Field(default_factory=SystemSpec)
    nodes: List[NodeSpec] = Field(min_length=1)
    channels: Optional[List[EdgeSpec]] = None
    network: Optional[NetworkSpec] = None
    perturbations: List[PerturbationSpec] = Field(default_factory=list)

    @model_validator(mode="after")
    def _one_network_form(self):
        if (self.channels is None) == (self.network is None):
            raise ValueError("exactly one of 'channels' or 'network' must be given")
        return self
