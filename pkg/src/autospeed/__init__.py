"""Speed-of-sound imaging from raw pulse-echo ultrasound via linked autoencoders."""

__version__ = "0.1.0"
