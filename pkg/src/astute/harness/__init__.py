"""Experiment harness: configs, commands, manifests, SVG charts."""
