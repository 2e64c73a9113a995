"""Batch pipeline stages: map, ingest, staging, trajectory, warehouse, cube, journey, scorecard, simulation."""
