"""Exception hierarchy shared by all modules."""


class DimerscatError(Exception):
    """Base class for all package errors."""


class ValidationError(DimerscatError, ValueError):
    """Invalid parameters or inputs; the CLI maps this to exit code 2."""


class NumericalError(DimerscatError, ArithmeticError):
    """A numerical routine failed; the CLI maps this to exit code 3."""


class ConvergenceError(NumericalError):
    def __init__(self, index, iterations):
        self.index = index
        self.iterations = iterations
        super().__init__(
            f"tridiagonal QL iteration did not converge for eigenvalue {index} "
            f"after {iterations} iterations"
        )


class SingularMatrixError(NumericalError):
    def __init__(self, pivot_index, magnitude, batch_index=None):
        self.pivot_index = pivot_index
        self.magnitude = magnitude
        self.batch_index = batch_index
        where = "" if batch_index is None else f" (system {batch_index})"
        super().__init__(
            f"matrix is singular to working precision{where}: pivot {pivot_index} "
            f"has magnitude {magnitude:.3e}"
        )


class ClosedChannelError(NumericalError):
    def __init__(self, channel, kinetic_energy, lead_hopping):
        self.channel = channel
        self.kinetic_energy = kinetic_energy
        super().__init__(
            f"channel {channel} is closed: kinetic energy {kinetic_energy:.6g} "
            f"outside the band (-{2 * lead_hopping:g}, {2 * lead_hopping:g})"
        )


class DriftError(NumericalError):
    def __init__(self, norm_drift, energy_drift, tolerance):
        self.norm_drift = norm_drift
        self.energy_drift = energy_drift
        super().__init__(
            f"integration drift exceeds {tolerance:g} (norm {norm_drift:.2e}, "
            f"energy {energy_drift:.2e}); use a smaller dt"
        )
