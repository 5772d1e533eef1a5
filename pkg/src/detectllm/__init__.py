"""Zero-shot detection of machine-generated text from language-model statistics."""

__version__ = "0.1.0"
