"""
Constitutive module: concentration- and shear-rate-dependent apparent viscosity

All four models share the form

    mu_hat = mu0_hat(c) * {p_beta + p_gamma * [s_theta^2 + s_z^2]} ** n(c)

and differ only in the zero-shear ratio mu0_hat(c) and the shear index n(c).
Evaluation functions accept scalars or numpy arrays and broadcast.
"""

import math
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Union

import numpy as np

from modules.errors import DomainError, ParameterError, SingularityError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# ============================================================================
# MODEL RECORDS
# ============================================================================

class ModelKind(Enum):
    """The four constitutive models"""

    NEWTONIAN = "newtonian"
    MODEL1 = "model1"
    MODEL2A = "model2a"
    MODEL2B = "model2b"

    @classmethod
    def parse(cls, text: str) -> "ModelKind":
        """
        Parse a model name as written in study files

        Accepts 'newtonian', 'model1', 'model2a', 'model2b' in any case, with or
        without the 'model' prefix ('1', '2a', '2b').

        Raises:
            ParameterError: Unknown model name
        """
        key = str(text).strip().lower().replace(' ', '').replace('_', '')
        if key in ('1', '2a', '2b'):
            key = f"model{key}"
        for kind in cls:
            if kind.value == key:
                return kind
        raise ParameterError(f"unknown model kind '{text}'")


@dataclass(frozen=True)
class ConstitutiveModel:
    """Model kind plus its parameter record"""

    kind: ModelKind
    alpha: float
    beta: float
    gamma: float
    sigma: Optional[float] = None
    n_const: Optional[float] = None

    def with_overrides(self, **overrides) -> "ConstitutiveModel":
        """Copy with some parameters replaced (fitting / what-if studies)"""
        return replace(self, **overrides)

    def as_dict(self) -> dict:
        return {
            'kind': self.kind.value,
            'alpha': self.alpha,
            'beta': self.beta,
            'gamma': self.gamma,
            'sigma': self.sigma,
            'n_const': self.n_const,
        }


@dataclass(frozen=True)
class ShearState:
    """Shear measures s_theta = dv/dr - v/(r + p_g) and s_z = dw/dr"""

    s_theta: ArrayLike
    s_z: ArrayLike

    def squared_norm(self) -> ArrayLike:
        return np.square(self.s_theta) + np.square(self.s_z)


@dataclass
class ValidationReport:
    """Result of validate(): ok iff there are no violations"""

    violations: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

# ============================================================================
# PRESETS
# ============================================================================

# gamma is a quarter of the literature value: the models are written in terms
# of A1 = 2D rather than D
_PRESETS = {
    ModelKind.NEWTONIAN: dict(alpha=0.0, beta=1.0, gamma=0.0, n_const=0.0),
    ModelKind.MODEL1: dict(alpha=21.3, beta=1.0, gamma=6.96 / 4, n_const=-0.28),
    ModelKind.MODEL2A: dict(alpha=3.3, beta=7.1e-9, gamma=5.8e-8 / 4),
    ModelKind.MODEL2B: dict(alpha=31.0, beta=1.3e-8, gamma=8.5e-8 / 4, sigma=0.44),
}


def builtin_model(kind: Union[ModelKind, str]) -> ConstitutiveModel:
    """
    Return the tabulated parameter record of a model

    Args:
        kind: Model kind (or its name)

    Returns:
        ConstitutiveModel with the reference parameter values
    """
    if not isinstance(kind, ModelKind):
        kind = ModelKind.parse(kind)
    return ConstitutiveModel(kind=kind, **_PRESETS[kind])

# ============================================================================
# EVALUATION
# ============================================================================

def _as_concentration(c: ArrayLike) -> np.ndarray:
    c_arr = np.asarray(c, dtype=float)
    inside = (c_arr >= 0.0) & (c_arr <= 1.0)
    if not np.all(inside):
        bad = c_arr[~inside] if c_arr.ndim else c_arr
        raise DomainError(f"concentration outside [0, 1]: {np.ravel(bad)[:5]}")
    return c_arr


def _scalar_or_array(value: np.ndarray) -> ArrayLike:
    return float(value) if np.ndim(value) == 0 else value


def shear_index(model: ConstitutiveModel, c: ArrayLike) -> ArrayLike:
    """
    Concentration-dependent power-law exponent n(c)

    Args:
        model: Constitutive model
        c: Concentration fraction(s) in [0, 1]

    Returns:
        n(c); negative values mean shear-thinning

    Raises:
        DomainError: c outside [0, 1]
    """
    c_arr = _as_concentration(c)

    if model.kind is ModelKind.NEWTONIAN:
        n = np.zeros_like(c_arr)
    elif model.kind is ModelKind.MODEL1:
        n = np.full_like(c_arr, model.n_const)
    elif model.kind is ModelKind.MODEL2A:
        n = 0.5 * np.expm1(-model.alpha * c_arr)
    else:
        n = model.sigma * (1.0 / (model.alpha * c_arr ** 2 + 1.0) - 1.0)

    return _scalar_or_array(n)


def zero_shear_ratio(model: ConstitutiveModel, c: ArrayLike) -> ArrayLike:
    """
    Zero-shear-rate viscosity ratio mu0_hat(c)

    Only Model 1 thickens through the zero-shear viscosity; the shear-index
    models keep it at the plasma value.

    Raises:
        DomainError: c outside [0, 1]
    """
    c_arr = _as_concentration(c)

    if model.kind is ModelKind.MODEL1:
        ratio = np.exp(model.alpha * c_arr)
    else:
        ratio = np.ones_like(c_arr)

    return _scalar_or_array(ratio)


def apparent_viscosity(model: ConstitutiveModel, p_beta: float, p_gamma: float,
                       c: ArrayLike, shear: ShearState) -> ArrayLike:
    """
    Non-dimensional apparent viscosity

    Args:
        model: Constitutive model
        p_beta: Dimensionless beta
        p_gamma: Dimensionless shear-rate scale
        c: Concentration(s)
        shear: Shear measures, broadcastable against c

    Returns:
        mu_hat > 0

    Raises:
        ParameterError: Negative p_beta or p_gamma
        DomainError: c outside [0, 1]
        SingularityError: Base p_beta + p_gamma * |shear|^2 is not positive
            where n(c) != 0
    """
    if p_beta < 0 or p_gamma < 0:
        raise ParameterError(f"p_beta and p_gamma must be >= 0 (got {p_beta}, {p_gamma})")

    n = np.asarray(shear_index(model, c))
    mu0 = np.asarray(zero_shear_ratio(model, c))
    base = p_beta + p_gamma * np.asarray(shear.squared_norm(), dtype=float)
    base, n, mu0 = np.broadcast_arrays(base, n, mu0)

    active = n != 0.0
    singular = active & ~(base > 0.0)
    if np.any(singular):
        raise SingularityError(
            "viscosity base p_beta + p_gamma*|shear|^2 is not positive "
            "where the shear index is non-zero (zero-shear singularity)"
        )

    log_base = np.log(np.where(active, base, 1.0))
    mu = mu0 * np.exp(n * log_base)
    return _scalar_or_array(mu)


def stress_power(mu: ArrayLike, shear: ShearState) -> ArrayLike:
    """Reduced-flow stress power mu_hat * (s_theta^2 + s_z^2)"""
    return _scalar_or_array(np.asarray(mu) * np.asarray(shear.squared_norm()))

# ============================================================================
# VALIDATION
# ============================================================================

def validate(model: ConstitutiveModel) -> ValidationReport:
    """
    Check a parameter record against the dissipation constraint

    Args:
        model: Constitutive model to check

    Returns:
        ValidationReport listing named violations and warnings
    """
    report = ValidationReport()

    for name in ('alpha', 'beta', 'gamma'):
        if not math.isfinite(getattr(model, name)):
            report.violations.append(f"{name} not finite")

    if model.gamma < 0:
        report.violations.append("gamma negative")
    if model.beta < 0:
        report.violations.append("beta negative")

    if model.kind is ModelKind.MODEL1:
        if model.n_const is None or not math.isfinite(model.n_const):
            report.violations.append("n missing")
        elif model.n_const > 0:
            report.warnings.append("shear index positive (shear-thickening)")
    elif model.kind is ModelKind.MODEL2B:
        if model.sigma is None or not math.isfinite(model.sigma):
            report.violations.append("sigma missing")
        elif model.sigma < 0:
            report.warnings.append("shear index positive (shear-thickening)")
    elif model.kind is ModelKind.MODEL2A and model.alpha < 0:
        report.warnings.append("shear index positive (shear-thickening)")

    if model.kind is not ModelKind.NEWTONIAN and model.beta == 0:
        report.warnings.append("zero-shear singularity possible when n<0")

    for warning in report.warnings:
        logger.warning(f"{model.kind.value}: {warning}")

    return report
