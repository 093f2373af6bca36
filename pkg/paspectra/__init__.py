"""paspectra: spectra of preferential-attachment graphs."""

__version__ = "0.1.0"
