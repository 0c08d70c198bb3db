"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems exit with 2,
file-format and I/O problems with 3.
"""


class ValidationError(ValueError):
    """An input violates a documented precondition or invariant."""


class DataFormatError(ValueError):
    """A binary or text file does not match its declared format.

    The message names the first header field or payload section that
    failed to parse.
    """
