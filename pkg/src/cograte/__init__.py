"""Achievable rates of pilot-assisted secondary links under imperfect sensing.

Subpackages and modules
-----------------------
specfun      incomplete gamma, exponential integral, Gaussian tail
sensing      energy detector: false-alarm / detection probabilities, ROC, Monte Carlo
channel      Gauss-Markov fading, frame geometry, undersampled spectra
estimation   noncausal and causal pilot-aided MMSE, finite Wiener-filter oracle
rate         four-scenario ergodic rate bound
optimizer    power allocation and threshold search under the interference cap
frame        system parameter bundle and validation
cli          command line tool ``cograte``
"""

__version__ = "0.1.0"
