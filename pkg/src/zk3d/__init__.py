"""Fourier pseudospectral solver for the 3D Zakharov-Kuznetsov equation."""
