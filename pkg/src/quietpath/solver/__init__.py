from .conic import ConicConfig, ConicSolution, Status, make_workspace, solve_conic

__all__ = ["ConicConfig", "ConicSolution", "Status", "make_workspace", "solve_conic"]
