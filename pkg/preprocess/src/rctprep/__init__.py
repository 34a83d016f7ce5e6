"""Offline preprocessing: labeled raw abstracts to CoNLL-U sentence graphs."""

__version__ = "0.1.0"
