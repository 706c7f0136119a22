"""Pulse-shaped AFDM waveform analysis: ambiguity functions, echoes and estimation."""
