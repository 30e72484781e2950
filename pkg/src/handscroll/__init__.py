"""Provenance biographies for handscroll artworks.

Layered engine: corpus storage and reference databases, date normalization
for ancient Chinese era expressions, entity validation against the reference
stores, feature/theme similarity search, saliency-aware circular layout, and
importance-ranked biography assembly. An HTTP facade (`handscroll.service`)
and a batch CLI (`handscroll.cli`) compose the pieces.
"""

__version__ = "0.1.0"
