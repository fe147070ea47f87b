from __future__ import annotations


class VarietyLabError(ValueError):
    """Validation or contract failure, tagged with a stable error code.

    The code (e.g. ``"empty-support"``) is what the CLI prints and what tests
    match on; the message is free text.
    """

    def __init__(self, code: str, message: str = "") -> None:
        self.code = code
        self.message = message
        super().__init__(f"{code}: {message}" if message else code)
