"""Python bindings for the mrag multilingual RAG evaluation harness."""

from pathlib import Path

from ._mrag import (
    ConfigError,
    DenseIndex,
    Error,
    PreconditionError,
    char3_recall,
    char_ngrams,
    chunk_document,
    clr_eligible,
    cli,
    languages,
    mock_embed,
    normalize,
    token_recall,
)
from . import _mrag

__all__ = [
    "ConfigError",
    "DenseIndex",
    "Error",
    "PreconditionError",
    "char3_recall",
    "char_ngrams",
    "chunk_document",
    "clr_eligible",
    "cli",
    "data_dir",
    "identify",
    "languages",
    "mock_embed",
    "normalize",
    "render_system_prompt",
    "token_recall",
]


def data_dir() -> Path:
    """Prompt catalogs and langid profiles: bundled copy if installed, else the source tree."""
    bundled = Path(__file__).parent / "data"
    return bundled if bundled.is_dir() else Path(_mrag.default_data_dir())


def identify(text: str):
    """Builtin language identification; returns a language code or None."""
    return _mrag.identify(text, data_dir())


def render_system_prompt(label: str, ul: str) -> str:
    return _mrag.render_system_prompt(label, ul, data_dir())
