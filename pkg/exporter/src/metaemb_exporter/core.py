"""Job description and sentence input handling."""

from dataclasses import dataclass
from pathlib import Path


class ExportError(Exception):
    """Raised when an export job cannot run: bad encoder spec, encoder load
    failure, empty input, or an inconsistent encoder result."""


@dataclass(frozen=True)
class ExportJob:
    """One export run: encode every line of a sentence file, write one embedding file.

    Output row order matches input line order exactly.
    """

    sentences_path: Path
    encoder_spec: str
    out_path: Path
    batch_size: int = 64

    def __post_init__(self):
        if self.batch_size < 1:
            raise ExportError(f"batch size must be >= 1, got {self.batch_size}")


def load_sentences(path) -> list[str]:
    """Read one sentence per line; a file with no lines at all is an error."""
    text = Path(path).read_text(encoding="utf-8")
    sentences = text.splitlines()
    if not sentences:
        raise ExportError(f"{path}: sentence file is empty")
    return sentences
