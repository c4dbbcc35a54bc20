"""Static analysis of state-update consistency in Solidity projects."""

__version__ = "0.1.0"
TOOL_NAME = "state-sentinel"
