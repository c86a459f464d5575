"""Lead-lag analysis of weekly music-chart data.

The pipeline: ingest weekly (week, city, artist, listeners) charts, place
each city-week on the unit sphere of artist space, difference consecutive
weeks into velocities, regress each city's next velocity on lagged
velocities (its own history vs. every city's history), and score both models
on a temporal holdout against the zero-change baseline.
"""

from .chart_store import (
    ArtistIndex,
    ChartRecord,
    ChartSeries,
    build_artist_index,
    chart_csv_text,
    filter_by_tag,
    load_tags,
    parse_chart_csv,
    parse_chart_csv_text,
    write_chart_csv,
)
from .design import (
    ALL_HISTORY,
    OWN_HISTORY,
    ColMeta,
    LabeledDesign,
    LagConfig,
    RowMeta,
    SplitDesign,
    build_design,
    default_boundary,
    dump_design_csv,
    temporal_split,
)
from .errors import ChartFlowError
from .evaluate import (
    CityResult,
    RegionReport,
    baseline_rmse,
    build_report,
    evaluate_city,
    evaluate_region,
    percent_of_baseline,
    read_labels_csv,
    report_csv_text,
    report_json_text,
    report_table_text,
    rmse,
)
from .preprocess import (
    ListenersMatrix,
    NormalizedMatrix,
    VelocitySeries,
    build_velocities,
    compute_velocities,
    normalize_rows,
    restrict_artists,
    to_listeners_matrices,
)
from .solver import (
    Coefficients,
    fit_nnls,
    fit_ols,
    oracle_nnls,
    oracle_ols,
    predict,
)
from .synth import Influence, PlantSpec, fingerprint, generate_planted

__version__ = "0.1.0"

__all__ = [
    "ALL_HISTORY",
    "OWN_HISTORY",
    "ArtistIndex",
    "ChartFlowError",
    "ChartRecord",
    "ChartSeries",
    "CityResult",
    "Coefficients",
    "ColMeta",
    "Influence",
    "LabeledDesign",
    "LagConfig",
    "ListenersMatrix",
    "NormalizedMatrix",
    "PlantSpec",
    "RegionReport",
    "RowMeta",
    "SplitDesign",
    "VelocitySeries",
    "baseline_rmse",
    "build_artist_index",
    "build_design",
    "build_report",
    "build_velocities",
    "chart_csv_text",
    "compute_velocities",
    "default_boundary",
    "dump_design_csv",
    "evaluate_city",
    "evaluate_region",
    "filter_by_tag",
    "fingerprint",
    "fit_nnls",
    "fit_ols",
    "generate_planted",
    "load_tags",
    "normalize_rows",
    "oracle_nnls",
    "oracle_ols",
    "parse_chart_csv",
    "parse_chart_csv_text",
    "percent_of_baseline",
    "predict",
    "read_labels_csv",
    "report_csv_text",
    "report_json_text",
    "report_table_text",
    "restrict_artists",
    "rmse",
    "temporal_split",
    "to_listeners_matrices",
    "write_chart_csv",
]
