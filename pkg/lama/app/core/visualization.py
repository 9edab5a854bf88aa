"""
Visualization module for LAMA.
Renders analysis histograms and maneuver distributions as standalone SVG bar charts.
"""
import io
from pathlib import Path
from typing import List, Sequence, Union

import matplotlib
from matplotlib.figure import Figure

from .dynamics import OUT_OF_RANGE, Histogram
from .logging import get_logger

_LOGGER = get_logger(__name__)

# fixed salt keeps SVG element ids identical between runs
_SVG_RC = {"svg.hashsalt": "lama", "svg.fonttype": "path"}


class ChartGenerator:
    """Generates bar charts for analysis reports."""

    def __init__(self, width: float = 8.0, height: float = 4.5, color: str = "#4c72b0"):
        """Initialize chart generator."""
        self.width = width
        self.height = height
        self.color = color

    def bar_chart(
        self,
        labels: Sequence[str],
        counts: Sequence[int],
        title: str,
        xlabel: str,
        ylabel: str = "Agents",
    ) -> str:
        """Bar chart as SVG text."""
        with matplotlib.rc_context(_SVG_RC):
            fig = Figure(figsize=(self.width, self.height))
            ax = fig.add_subplot(111)
            positions = list(range(len(labels)))
            ax.bar(positions, list(counts), color=self.color)
            ax.set_xticks(positions)
            ax.set_xticklabels(list(labels), rotation=30, ha="right")
            ax.set_xlabel(xlabel)
            ax.set_ylabel(ylabel)
            ax.set_title(title)
            ax.grid(True, axis="y", alpha=0.3)
            fig.tight_layout()

            buf = io.StringIO()
            fig.savefig(buf, format="svg", metadata={"Date": None})
        return buf.getvalue()

    def histogram_chart(
        self,
        histogram: Histogram,
        labels: Sequence[str],
        title: str,
        xlabel: str,
    ) -> str:
        """Histogram bars; under- and overflow share one trailing bar when present."""
        bar_labels: List[str] = list(labels)
        counts = list(histogram.counts)
        outside = histogram.underflow + histogram.overflow
        if outside:
            bar_labels.append(OUT_OF_RANGE)
            counts.append(outside)
        return self.bar_chart(bar_labels, counts, title, xlabel)

    def save(self, svg: str, path: Union[str, Path]) -> Path:
        """Write SVG text to path."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(svg, encoding="utf-8")
        _LOGGER.debug("Chart written", path=str(path))
        return path
