"""rmfsim: discrete-event simulator for robotic mobile fulfillment systems."""

__version__ = "0.1.0"
