"Error handling module."

class Error(Exception):
    "Generic library exception."

class ConfigError(Error):
    "Invalid command-line arguments or preferences."

class DomainError(Error):
    "Mathematically inadmissible request (non-invariant space, singular map, ...)."
