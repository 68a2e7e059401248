"""Software model of a waiting-time QRNG with a lookup-table Elias extractor."""

__version__ = "0.1.0"
