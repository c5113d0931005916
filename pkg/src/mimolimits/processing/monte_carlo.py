"""Parallele Ausführung von Monte-Carlo-Trials mit fester Reduktionsreihenfolge."""
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Union

import numpy as np

from ..config import get_logger
from ..models import MonteCarloConfig

logger = get_logger("monte_carlo")

TrialResult = Union[float, np.ndarray]
TrialFunction = Callable[[int], TrialResult]

# Chunks pro Worker, damit langsame Trials sich verteilen
CHUNKS_PER_WORKER = 4


class MonteCarloRunner:
    """
    Führt Trials 0..trials-1 aus und sammelt die Ergebnisse nach Trial-Index.

    Trial i bekommt nur seinen Index; die Trial-Funktion leitet daraus
    RngStream(master_seed, i) ab. Ergebnisse landen an Position i, die
    Reduktion erfolgt danach in aufsteigender Reihenfolge. Damit ist das
    Ergebnis bitidentisch für jede Anzahl Worker.
    """

    def __init__(self, config: MonteCarloConfig) -> None:
        self.config = config

    def run(self, trial: TrialFunction) -> np.ndarray:
        """
        Führt alle Trials aus.

        Args:
            trial: Funktion Trial-Index -> Skalar oder Vektor

        Returns:
            Array der Form (trials,) bzw. (trials, k) in Trial-Reihenfolge
        """
        trials = self.config.trials
        workers = min(self.config.max_parallelism, trials)

        if workers <= 1:
            logger.debug(f"Starte {trials} Trials sequenziell")
            results = [trial(index) for index in range(trials)]
        else:
            results = self._run_parallel(trial, trials, workers)

        return np.asarray(results, dtype=np.float64)

    def _run_parallel(self, trial: TrialFunction, trials: int, workers: int) -> List[TrialResult]:
        chunk_size = max(1, math.ceil(trials / (workers * CHUNKS_PER_WORKER)))
        chunks = [range(start, min(start + chunk_size, trials)) for start in range(0, trials, chunk_size)]
        logger.debug(f"Starte {trials} Trials parallel ({workers} Worker, {len(chunks)} Chunks)")

        results: List[TrialResult] = [0.0] * trials
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {
                executor.submit(self._run_chunk, trial, chunk): chunk
                for chunk in chunks
            }
            for future in as_completed(futures):
                chunk = futures[future]
                try:
                    values = future.result()
                except Exception as e:
                    logger.error(f"Fehler in Trials {chunk.start}-{chunk.stop - 1}: {e}")
                    raise
                for index, value in zip(chunk, values):
                    results[index] = value
        return results

    @staticmethod
    def _run_chunk(trial: TrialFunction, chunk: range) -> List[TrialResult]:
        return [trial(index) for index in chunk]
