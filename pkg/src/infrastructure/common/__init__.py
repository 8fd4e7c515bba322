from .atomic import atomic_write
from .registry import NameResolver
from .serialization import decode_big_ints, dumps, encode_big_ints, loads
from .shutdown import GracefulShutdown, get_shutdown_handler

__all__ = [
    "NameResolver",
    "atomic_write",
    "dumps",
    "loads",
    "encode_big_ints",
    "decode_big_ints",
    "GracefulShutdown",
    "get_shutdown_handler",
]
