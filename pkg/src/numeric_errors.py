"""
Exception types raised when a numerical contract of the simulation is broken.

Every class derives from NumericContractError so that the command line entry
point can map all of them to a single exit code. Plain precondition failures
(negative rates, negative times, malformed inputs) are reported with ValueError
instead and are not part of this hierarchy.
"""

import numpy as np


class NumericContractError(Exception):
    """Base class for every breach of a numerical tolerance or convergence contract."""


class ConvergenceError(NumericContractError):
    """A matrix function or a quadrature did not converge to the requested accuracy."""


class BranchCutError(NumericContractError, ValueError):
    """An eigenvalue (or scalar) lies on the closed negative real axis of the principal logarithm."""


class ConditioningError(NumericContractError, np.linalg.LinAlgError):
    """The eigenvector matrix is too ill-conditioned and the fallback method failed as well."""


class PositivityError(NumericContractError):
    """A state that must be positive semidefinite has an eigenvalue below the positivity tolerance."""


class TraceDriftError(NumericContractError):
    """The trace of an integrated state drifted away from one; usually the step is too large."""


class ToleranceBreachError(NumericContractError):
    """Two computational routes that must agree differ by more than the allowed tolerance."""


class StateValidityError(NumericContractError):
    """A computed density matrix is not Hermitian or not of unit trace within the state tolerances."""


class StepBudgetError(NumericContractError):
    """The stability limit of an explicit integrator asks for more steps than the configured budget."""
