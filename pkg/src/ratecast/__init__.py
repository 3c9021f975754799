"""ratecast: Box-Cox transformed principal-component forecasting of
age-by-year rate surfaces, with forecast-accuracy-based selection of the
transformation parameter."""

from .arima import (ArimaFit, ArimaSpec, auto_select, choose_diff_order,
                    difference, kpss_statistic)
from .arima import fit as fit_arima
from .arima import forecast as forecast_arima
from .boxcox import (BoxCoxTransform, TransformedSurface, box_cox,
                     inv_box_cox, transform_surface, validate_lambda)
from .decomposition import (SurfaceDecomposition, center, decompose,
                            residual_variance, select_k, svd_decompose)
from .evaluation import (HorizonErrorTable, averaged_interval_score,
                         interval_score, mafe, rolling_origin)
from .exceptions import DataError, NumericalError, RatecastError
from .forecasting import (RateForecast, ScoreForecast, SurfaceForecaster,
                          back_transform, forecast_scores, point_forecast,
                          prediction_interval, total_variance)
from .lambda_select import (LambdaSelection, compare_lambdas, objective,
                            optimize_lambda)
from .simulate import default_rate_curve, synthetic_surface
from .surface import (AgeRateSurface, SampleSplit, load_rates, save_rates,
                      split_by_fraction)

__version__ = "0.1.0"

__all__ = [
    "AgeRateSurface", "SampleSplit", "load_rates", "save_rates",
    "split_by_fraction",
    "box_cox", "inv_box_cox", "transform_surface", "validate_lambda",
    "BoxCoxTransform", "TransformedSurface",
    "center", "svd_decompose", "select_k", "residual_variance", "decompose",
    "SurfaceDecomposition",
    "ArimaSpec", "ArimaFit", "difference", "fit_arima", "auto_select",
    "forecast_arima", "kpss_statistic", "choose_diff_order",
    "ScoreForecast", "RateForecast", "forecast_scores", "point_forecast",
    "total_variance", "prediction_interval", "back_transform",
    "SurfaceForecaster",
    "mafe", "interval_score", "averaged_interval_score", "rolling_origin",
    "HorizonErrorTable",
    "objective", "optimize_lambda", "compare_lambdas", "LambdaSelection",
    "synthetic_surface", "default_rate_curve",
    "RatecastError", "DataError", "NumericalError",
]
