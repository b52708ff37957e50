"""
LaneBench
=========

Desk-scale lane-keeping test bench comparing offline (open-loop prediction
error) and online (closed-loop lane departure) testing of steering controllers.
"""

__version__ = "1.0.0"
