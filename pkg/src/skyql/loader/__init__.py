"""Data loader: synthetic catalog generation, CSV ingestion, CSV export."""

from .export import export_csv  # noqa: F401
from .load import LoadManifest, load  # noqa: F401
from .synth import generate_synthetic  # noqa: F401
