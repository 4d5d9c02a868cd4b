class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class NoCrossingError(RuntimeError):
    """The red and blue exponent curves do not cross in the search interval."""
