from .quality import psnr, ms_ssim, bpp
from .curves import RDPoint, RDCurve, read_curves, write_curves
from .bdrate import bd_rate
