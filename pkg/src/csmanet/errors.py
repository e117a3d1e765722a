"""Exception types shared across the package."""


class CsmanetError(Exception):
    """Base class for all package-specific errors."""


class TopologyError(CsmanetError):
    """Malformed topology document or violated network invariants."""


class GuardRailError(CsmanetError):
    """Problem size exceeds a method's guard rail (brute-force limits)."""


class StateSpaceCapError(GuardRailError):
    """Reachable state enumeration exceeded the configured cap."""


class SubgraphConditionError(CsmanetError):
    """RTS/CTS analysis requested but the interference graph is not a
    subgraph of the sensing graph."""
