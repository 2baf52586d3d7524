import logging
import os

from . import general, core_model, frac_deriv, levy_stable, function_spaces
from . import multiscale_approx, prokhorov_metric, qfgd_opt, elliptic_spectral
from . import bench_cli

_root = os.path.split(os.path.split(os.path.abspath(__file__))[0])[0]

_logger = logging.getLogger(__name__)
if not _logger.handlers:
    _handler = logging.StreamHandler()
    _handler.setFormatter(
        logging.Formatter('[%(levelname)s] %(name)s: %(message)s'))
    _logger.addHandler(_handler)
    _logger.setLevel(logging.WARNING)
