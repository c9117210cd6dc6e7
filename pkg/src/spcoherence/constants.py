"""Physical constants and length units (SI)."""

from scipy import constants as _c

c = _c.c
eps0 = _c.epsilon_0
mu0 = _c.mu_0
eta0 = (mu0 / eps0) ** 0.5
e_charge = _c.e

# electron rest energy in keV; fixed rather than taken from CODATA
ELECTRON_REST_KEV = 510.999

nm = 1e-9
um = 1e-6
mm = 1e-3

# FWHM of the far-field intensity of a Gaussian aperture (amplitude FWHM d)
# is GAUSSIAN_FWHM_CONSTANT * wavelength / d in the small-angle limit.
GAUSSIAN_FWHM_CONSTANT = 2.0 * 2.0**0.5 * 0.6931471805599453 / 3.141592653589793
