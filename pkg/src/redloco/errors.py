"""Shared exception types."""


class ContractError(ValueError):
    """An operation was called outside its declared contract."""


class ConfigError(ValueError):
    """Malformed configuration key or value."""


class CheckpointError(ValueError):
    """Unreadable or incompatible checkpoint container."""


class RolloutAbort(RuntimeError):
    """Non-finite value detected during rollout collection."""
