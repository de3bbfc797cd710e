"""hololab: numerical holonomy of weighted affine connections on manifolds
with density."""

__version__ = "0.1.0"
