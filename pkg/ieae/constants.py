SCALE_EXPONENT = 14
BYTE_MODULUS = 256

# (q1, q2) -> (p1, p2)
BLOCK_SIZES = {
    (0, 0): (8, 8), (0, 1): (8, 16), (0, 2): (8, 32),
    (1, 0): (16, 8), (1, 1): (16, 16), (1, 2): (16, 32),
    (2, 0): (32, 8), (2, 1): (32, 16), (2, 2): (32, 32),
}

INDEX_LIMIT = 256
MU_RANGE = (3.9, 4.0)
LOGISTIC_SEED_EXPONENT = 8
ARNOLD_SEED_EXPONENT = 5

THETA_MAX = 30.0
DEFAULT_EMBED_M = 2
DEFAULT_EPSILON_FRACTION = 0.1

DEFAULT_EXECUTOR = 'simple'
DEFAULT_WORKERS = 4

META_SUFFIX = '.meta'
LENGTH_FINGERPRINT = 16

# a'=7, b'=8, e=4: period -> number of components
PUBLISHED_ARNOLD_CENSUS = {16: 8, 8: 8, 4: 8, 2: 11, 1: 8}
