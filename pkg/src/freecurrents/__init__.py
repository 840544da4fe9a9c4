"""Geodesic currents on free groups, marked metric graphs, and prefix-span rigidity experiments."""

from .words import CyclicWord, format_word, parse_word
from .currents import WeightVector, counting_weights, level_space, uniform_weights
from .outer_space import MarkedMetricGraph, rose, theta, translation_length
from .walks import Trajectory, sample_trajectory, universal_trajectory

__version__ = "0.1.0"
