"""Exception types raised by molbec."""


class MolbecError(Exception):
    """Base class for all library errors."""


class SectorError(MolbecError, ValueError):
    """Invalid conserved quantum numbers or basis index."""


class CouplingError(MolbecError, ValueError):
    """Coupling values outside an operation's domain (e.g. Omega = 0)."""


class DomainError(MolbecError, ValueError):
    """Phase-space or coordinate argument outside the allowed domain."""


class DegenerateGroundStateError(MolbecError, ArithmeticError):
    """Ground state is (numerically) degenerate, so it is not unique."""

    def __init__(self, gap, tolerance):
        self.gap = gap
        self.tolerance = tolerance
        super().__init__(
            f"ground state is degenerate: gap {gap:.3e} <= tolerance {tolerance:.3e}"
        )


class BetheError(MolbecError, ArithmeticError):
    """Bethe root extraction or refinement failed."""
