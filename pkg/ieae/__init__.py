from .attack import decrypt_with_mask, extract_mask, nested_sum
from .cipher import GrayImage, PublicParams, SecretKey, decrypt, encrypt, prepare
from .experiment import Experiment
from .lyapunov import EmbeddingConfig, seed_from_lambda, wolf_lle
from .records import KeyFile, SidecarMetadata

__all__ = [
    'EmbeddingConfig',
    'Experiment',
    'GrayImage',
    'KeyFile',
    'PublicParams',
    'SecretKey',
    'SidecarMetadata',
    'decrypt',
    'decrypt_with_mask',
    'encrypt',
    'extract_mask',
    'nested_sum',
    'prepare',
    'seed_from_lambda',
    'wolf_lle',
]
