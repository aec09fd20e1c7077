from fermichain.constants import VERSION as __version__  # noqa: F401
