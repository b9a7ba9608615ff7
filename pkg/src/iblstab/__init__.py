"""Instability analysis of shear flows in interactive boundary-layer models."""
