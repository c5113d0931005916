"""
mimolimits - Kapazität von MIMO-Kanälen mit Transceiver-Impairments.

Numerische Bibliothek und Experiment-CLI für Kapazität, Kapazitätsgrenzen und
den Multiplexing-Gewinn bei endlichem SNR, wenn der Sender eine residuale
Verzerrung proportional zur Signalleistung erzeugt.
"""
__version__ = "1.0.0"

__all__ = ["__version__"]
