"""shinylab: specular-stimulus rendering and illumination statistics.

Library modules:
    optics   - Fresnel reflectance from a complex index of refraction
    envmap   - equirectangular HDR maps: I/O, scaling, desaturation, filtering
    sphharm  - spherical-harmonic spectra, per-order power, light statistics
    render   - analytic sphere renderer, exposure normalization, tone mapping
    imstats  - specular coverage and mean intensity over the object mask
    analysis - rating records, bias index, OLS regressions
    exprig   - rating-experiment service (trial sequencing, persistence, HTTP)
    cli      - `shinylab` command-line entry point
"""

from .analysis import RatingRecord, RegressionFit, StimulusStat, bias_index, linear_fit
from .envmap import EquirectMap, desaturate, gaussian_blur, high_pass, load, low_pass, save, scale_intensity
from .imstats import CoverageResult, mean_intensity, specular_coverage
from .optics import ComplexIOR, ReflectanceCurve, curve, ior_from_facing_grazing, metalness_ior, normal_incidence_reflectance, reflectance_unpolarized
from .render import MaterialSpec, Stimulus, StimulusMeta, normalize_exposure, render_condition_set, render_sphere, tone_map
from .sphharm import ShSpectrum, brilliance, diffuseness, diffuseness2, light_metrics, order_powers, project, reconstruct

__version__ = "0.1.0"
