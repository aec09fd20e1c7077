from pathlib import Path

PATHS = {
    "root": Path(__file__).absolute().parent.parent,
    "logs": Path(__file__).absolute().parent.parent / "logs",
}

VERSION = "0.1.0"

# Disorder PRNG recorded in output headers
RNG_ALGORITHM = "PCG64"
