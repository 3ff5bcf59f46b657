# Towed movable antenna array simulator - source package

__version__ = "0.1.0"
