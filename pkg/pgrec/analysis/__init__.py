from .gmv import (
    GmvCurve,
    curves_frame,
    gmv_curve,
    gmv_curves,
    gmv_from_ranking,
    gmv_total,
    rank_profile,
)
from .influence import (
    InfluenceRecord,
    extract_influence,
    label_frequent_buyers,
    price_bucket_report,
    price_bucket_tests,
    read_records,
    records_from_frame,
    write_records,
)
from .stats import ChiSquareResult, TTestResult, chi_square_test, t_test_two_sample

__all__ = [
    "ChiSquareResult",
    "GmvCurve",
    "InfluenceRecord",
    "TTestResult",
    "chi_square_test",
    "curves_frame",
    "extract_influence",
    "gmv_curve",
    "gmv_curves",
    "gmv_from_ranking",
    "gmv_total",
    "label_frequent_buyers",
    "price_bucket_report",
    "price_bucket_tests",
    "rank_profile",
    "read_records",
    "records_from_frame",
    "t_test_two_sample",
    "write_records",
]
