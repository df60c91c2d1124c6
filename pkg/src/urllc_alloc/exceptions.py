class Infeasible(Exception):
    """No allocation satisfies the constraints of the problem instance."""


class NumericError(ArithmeticError):
    """An iterative search hit its iteration cap or produced a non-finite value."""
