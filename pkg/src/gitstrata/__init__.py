"""gitstrata: exact stability and stratification workbench for linear torus
actions on projective space and point configurations on the projective line."""

__version__ = "0.1.0"
