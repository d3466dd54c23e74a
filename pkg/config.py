"""Configuration for the syzygy computations and the command-line driver."""
import os

from dotenv import load_dotenv

# Load environment variables from .env (SYZLAB_* overrides)
load_dotenv()

BASE_DIR = os.path.dirname(os.path.abspath(__file__))

SYZLAB_VERSION = os.environ.get("SYZLAB_VERSION", "0.1.0")

# Seeds are never taken from the wall clock
DEFAULT_SEED = int(os.environ.get("SYZLAB_DEFAULT_SEED", "1"))
DEFAULT_TRIALS = int(os.environ.get("SYZLAB_DEFAULT_TRIALS", "3"))

# Genericity floor: default prime is the smallest prime > max(FACTOR * gamma, FLOOR)
PRIME_FLOOR = int(os.environ.get("SYZLAB_PRIME_FLOOR", "1000"))
PRIME_FACTOR = int(os.environ.get("SYZLAB_PRIME_FACTOR", "8"))

# Largest side of any matrix the Hilbert-Kunz engine may build
MATRIX_CEILING = int(os.environ.get("SYZLAB_MATRIX_CEILING", "10000"))

# Redraws of random linear systems / Weierstrass pairs before giving up
CURVE_RETRIES = int(os.environ.get("SYZLAB_CURVE_RETRIES", "50"))

# Elliptic curves over F_p with p at most this are enumerated point by point
ENUMERATION_LIMIT = int(os.environ.get("SYZLAB_ENUMERATION_LIMIT", "200000"))

LOG_LEVEL = os.environ.get("SYZLAB_LOG_LEVEL", "WARNING")
