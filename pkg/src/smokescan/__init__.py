"""smokescan: batch smoke-emission detection for static-camera timelapses."""

__version__ = "0.1.0"
