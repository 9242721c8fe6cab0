"""Exception hierarchy shared across the package."""


class TreeLogicError(Exception):
    """Base class for all domain errors raised by treelogic."""


class ModelFormatError(TreeLogicError):
    """A model file could not be parsed into a valid ensemble."""


class InconsistentAssumptions(TreeLogicError):
    """A query fixed feature values that no completion can satisfy."""


class CellBudgetExceeded(TreeLogicError):
    """Brute-force cell enumeration would exceed the configured cap."""
