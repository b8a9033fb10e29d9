"""Monocular window detection, homography pose and visual ingress navigation.

Modules:

- ``imaging``: filtering, pyramids, equalization, Canny, dilation
- ``detect``: lines, contours, quadrilateral screening, histogram matching
- ``pose``: homography estimation and decomposition, Euler angles
- ``simworld``: single-wall world, ray-cast camera, kinematic UAV
- ``nav``: ingress state machine and mission runner
- ``cli``: ``windowingress`` command-line front end
"""
__version__ = "0.1.0"
