"""Graded Weight Workbench: graph complexes, weight systems and jet identities."""
