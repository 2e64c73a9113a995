import io

import numpy as np

from helpers.workspace_ops import dump_yaml


class ReportExporter:
    """Structured YAML documents and the whitespace-separated heatmap matrix."""

    @staticmethod
    def export_document(document: dict) -> str:
        return dump_yaml(document)

    @staticmethod
    def export_raster(raster: np.ndarray) -> str:
        """One text row per raster row, top edge first."""
        out = io.StringIO()
        if raster.size:
            np.savetxt(out, raster, fmt='%.10g', delimiter=' ')
        return out.getvalue()
