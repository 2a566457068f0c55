"""Classification-based least-squares trained filters for repairing weak enhancers."""
from .classify import ClassifierSpec, classify, extract_aperture
from .degrade import CompressionSpec, GaussianSpec, compress_blocky, downsample_2x, gaussian_blur
from .enhance import PeakingSpec, bilinear_upscale_2x, peaking_filter, smooth_artifacts
from .frame_io import FormatError, Yuv422Frame, read_pgm, read_sequence, write_pgm, write_sequence
from .lsq_train import ClassAccumulators, CoefficientTable, solve_table, train
from .metrics import QualityReport, SsimSpec, evaluate, mse, psnr, ssim
from .pipeline import Embodiment
from .repair import classify_map, repair_plane

__version__ = "0.1.0"
