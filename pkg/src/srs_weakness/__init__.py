"""Software weakness prediction from requirement specifications"""

__version__ = "1.0.0"
