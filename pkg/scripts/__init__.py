"""Command-line entry points for the mixed-cat waveguide engine."""
