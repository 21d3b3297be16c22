"""Time-frequency quantum metrology with one- and two-photon spectral states."""

__version__ = "0.1.0"
