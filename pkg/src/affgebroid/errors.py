"""Exception types shared across the package."""


class ParseError(ValueError):
    """Syntax error in an expression string (carries position info in the message)."""


class UnknownVariableError(ParseError):
    """Expression references a name outside the declared variable list."""


class UnknownFunctionError(ParseError):
    """Expression calls a function not in the builtin table."""


class EvaluationError(ArithmeticError):
    """Numeric failure while evaluating an expression."""


class DomainError(EvaluationError):
    """Evaluation left the domain: log/sqrt of a bad argument, div by zero, overflow."""


class NonFiniteState(RuntimeError):
    """An integrator produced NaN or Inf; message records step index and time."""


class StepUnderflow(RuntimeError):
    """Adaptive integrator drove the step size below the sanity floor."""


class SingularLagrangian(RuntimeError):
    """Fibre Hessian of the Lagrangian is singular at the requested point."""


class NewtonDivergence(RuntimeError):
    """Newton solve for the inverse Legendre transform failed to converge."""


class JacobiViolation(ValueError):
    """Structure constants fail the Jacobi identity."""


class ConfigError(ValueError):
    """Malformed run configuration (bad schema, unknown key, out-of-box value)."""
