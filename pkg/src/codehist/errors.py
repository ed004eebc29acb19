"""Exception types shared across the package.

The CLI maps exceptions to exit codes as follows:

    ValueError               -> 2  bad parameters, incompatible inputs
    FormatError, OSError     -> 3  unreadable or malformed input files
    NumericError             -> 4  non-finite results, divergence
"""

# FormatError.code values. Each distinct failure mode gets its own code so
# callers can branch without parsing messages.
BAD_MAGIC = "bad_magic"
BAD_VERSION = "bad_version"
BAD_HEADER = "bad_header"
TOKEN_RANGE = "token_out_of_range"
TRUNCATED = "truncated"
TRAILING = "trailing_data"
NON_FINITE = "non_finite"
BAD_TOKEN = "bad_token_literal"
BAD_LINE = "wrong_line_length"
DIGEST_MISMATCH = "digest_mismatch"


class FormatError(Exception):
    """Malformed or unreadable file content; ``code`` names the failure mode."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class NumericError(Exception):
    """A computation produced non-finite values or failed to converge."""
