"""Patent portfolio analysis of cities over IPC/CPC technology classes."""

from .compare import PortfolioDistanceMatrix, cosine_sim, distance_matrix, pearson, restricted_spearman, spearman
from .diversity import DiversityRecord, diversity_record, gini_simpson, proportions, rao_stirling, true_diversity, variety
from .errors import PortfolioError
from .ingest import Location, PatentRecord, QuerySpec, build_search_string, filter_by_year, parse_records, parse_table, read_records
from .network import (
    CohesionReport,
    CooccurrenceMatrix,
    SimilarityGraph,
    cohesion_report,
    cooccurrence,
    cosine_rows,
    largest_component,
    threshold_graph,
)
from .portfolio import ClassVector, MatrixStore, RaoStore, append_column, append_diversity_row, count_classes
from .taxonomy import ClassSimilarityMap, load_basemap, normalize_class, truncate3

__version__ = "0.1.0"
