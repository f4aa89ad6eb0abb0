"""Harris Hawks wrapper feature selection with Random Weight Network classifiers."""

__version__ = "0.1.0"
