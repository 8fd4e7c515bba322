from .checks import finite_difference_check, finite_difference_gradient
from .tape import Node, Op, Tape

__all__ = ["Node", "Op", "Tape", "finite_difference_check", "finite_difference_gradient"]
