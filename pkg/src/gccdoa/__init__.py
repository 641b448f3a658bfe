"""Two-microphone GCC-PHAT direction-of-arrival toolkit.

Exact, FFT-interpolated, quadratic-corrected, and low-rank SVD back-ends over
a shared angle grid, plus room simulation and accuracy/timing harnesses.
"""
from .core import (AngularGrid, GccParams, SteeringMatrix, normalization_gains,
                   steering_matrix, theta_grid)
from .errors import (ConfigurationError, DimensionError, FormatError,
                     InputError, NumericalError)
from .estimators import (DoaEstimate, FftEstimator, InterpolatedLags,
                         MatrixEstimator, SvdEstimator, build_estimator,
                         fft_correlate, map_lags, method_names, mm_correlate,
                         parse_method, pick_peak, qi_correlate, svd_correlate)
from .factorization import (LowRankFactors, factorize, load_factors,
                            save_factors, select_rank, split_steering)
from .stft import cross_spectrum, stft_frames
from .simulator import (RenderedPair, RoomSpec, Scenario, image_rir,
                        place_pair_and_source, random_scenario, render,
                        sample_room, speech_like_source)
from .evaluation import (CellReport, ConfigurationResult, TimingReport,
                         emit_reports, rmse, run_accuracy_sweep, run_bench,
                         weighted_doa)

__version__ = "0.1.0"
